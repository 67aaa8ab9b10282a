#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apa/capture.hpp"

namespace apa {

// Byte template: fixed values plus wildcard positions filled per packet.
struct SyntheticClass {
    std::string label;
    std::size_t support = 0;
    std::vector<int> pattern; // 0..255 fixed byte, -1 wildcard
    std::size_t tail_min = 0; // random payload appended after the pattern
    std::size_t tail_max = 0;
    bool tail_printable = false;   // draw tail bytes from printable ASCII
    std::size_t tail_alphabet = 0; // 0 = any byte, N = N-symbol noise alphabet
    byte_vec tail_charset;         // explicit noise byte set; overrides tail_alphabet
};

struct SyntheticSpec {
    std::string name;
    OsiLayer layer = OsiLayer::link;
    std::vector<SyntheticClass> classes;

    static SyntheticSpec from_json(const std::string& json_text);
    static SyntheticSpec from_json_file(const std::string& path);
};

// "aa bb ?? 01" -> fixed/wildcard byte pattern
std::vector<int> parse_byte_pattern(const std::string& text);

struct GeneratedCapture {
    std::vector<RawPacket> packets; // labeled, deterministic for a seed
    std::uint32_t network = 0;      // pcap linktype for write_pcap
};

// Transport/application specs get real Ethernet+IPv4(+UDP) framing so the
// stripper runs the same path it would on a live capture.
GeneratedCapture generate_capture(const SyntheticSpec& spec, std::uint64_t seed);

void write_generated(const GeneratedCapture& cap, const std::string& pcap_path,
                     const std::string& labels_path);

Dataset generated_dataset(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace apa
