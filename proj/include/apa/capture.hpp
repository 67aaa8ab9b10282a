#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apa/common.hpp"

namespace apa {

enum class LinkType { ethernet, ieee80211, ppp, raw };
enum class OsiLayer { link, transport, application };

const char* to_string(LinkType t);
const char* to_string(OsiLayer l);
OsiLayer osi_layer_from_string(const std::string& s);

struct RawPacket {
    byte_vec bytes;
    std::uint64_t capture_ts = 0; // microseconds since epoch
    LinkType link_type = LinkType::raw;
    std::optional<std::string> truth_label;
};

struct Dataset {
    std::vector<RawPacket> packets;
    OsiLayer osi_target = OsiLayer::link;
    std::string name;
};

struct HeaderSlice {
    byte_vec bytes;
    std::size_t origin = 0;       // index of the source packet
    std::size_t declared_len = 0; // length requested at extraction
};

// Classic libpcap format only: 24-byte global header with magic
// 0xa1b2c3d4 (or byte-swapped 0xd4c3b2a1), 16-byte record headers.
std::vector<RawPacket> load_pcap(const std::string& path);

// Serialization counterpart used by the synthetic generator and tests.
// network: raw pcap linktype value written to the global header.
void write_pcap(const std::string& path, const std::vector<RawPacket>& packets,
                std::uint32_t network);

// Sidecar ground truth: CSV with header row, columns packet_index,label
// (0-based index into the capture).
std::vector<std::pair<std::size_t, std::string>> load_labels_csv(const std::string& path);
void apply_labels(std::vector<RawPacket>& packets,
                  const std::vector<std::pair<std::size_t, std::string>>& labels);

// Returns the payload starting at the first byte of the target layer.
// Understands Ethernet, IPv4 (IHL respected), IPv6, TCP (data offset) and
// UDP; anything else throws so the caller can skip the packet.
byte_vec strip_lower_layers(const RawPacket& p, OsiLayer target);

// link/transport: first min(header_len, payload) bytes.
// application: the whole payload, header_len ignored.
HeaderSlice extract_header(const byte_vec& payload, std::size_t header_len,
                           OsiLayer layer, std::size_t origin = 0);

// Largest-remainder apportionment of `cap` across truth labels with a
// minimum of one packet per label present, then uniform sampling inside
// each label. Keeps everything when the input is at or below cap.
Dataset stratified_sample(const std::vector<RawPacket>& packets, std::size_t cap,
                          std::uint64_t seed, OsiLayer osi_target,
                          const std::string& name = "");

// Median printable-byte ratio rule; below threshold means binary.
enum class PayloadClass { textual, binary };
PayloadClass detect_text_protocol(const Dataset& d, double threshold = 0.75);

} // namespace apa
