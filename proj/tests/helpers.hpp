#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "apa/capture.hpp"
#include "apa/common.hpp"

namespace testutil {

using apa::byte_vec;

inline std::string tmp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "apa_tests";
    std::filesystem::create_directories(dir);
    return (dir / (std::to_string(::getpid()) + "_" + name)).string();
}

// Ethernet II frame around an L3 payload.
inline byte_vec eth_frame(std::uint16_t ethertype, const byte_vec& l3) {
    byte_vec f = {0x02, 0, 0, 0, 0, 1, 0x02, 0, 0, 0, 0, 2};
    f.push_back(static_cast<std::uint8_t>(ethertype >> 8));
    f.push_back(static_cast<std::uint8_t>(ethertype & 0xff));
    f.insert(f.end(), l3.begin(), l3.end());
    return f;
}

// Minimal IPv4 header; options (when ihl_words > 5) are zero-filled.
inline byte_vec ipv4_packet(std::uint8_t ihl_words, std::uint8_t proto,
                            const byte_vec& payload) {
    byte_vec h(static_cast<std::size_t>(ihl_words) * 4, 0);
    h[0] = static_cast<std::uint8_t>(0x40 | ihl_words);
    std::size_t total = h.size() + payload.size();
    h[2] = static_cast<std::uint8_t>(total >> 8);
    h[3] = static_cast<std::uint8_t>(total & 0xff);
    h[8] = 64;
    h[9] = proto;
    h[12] = 10; h[15] = 1; // 10.0.0.0 -> 0.0.0.1, fields we never parse
    h.insert(h.end(), payload.begin(), payload.end());
    return h;
}

inline byte_vec tcp_segment(std::uint8_t data_off_words, const byte_vec& payload) {
    byte_vec h(static_cast<std::size_t>(data_off_words) * 4, 0);
    h[1] = 80;
    h[12] = static_cast<std::uint8_t>(data_off_words << 4);
    h.insert(h.end(), payload.begin(), payload.end());
    return h;
}

inline byte_vec udp_datagram(const byte_vec& payload) {
    byte_vec h(8, 0);
    std::size_t len = 8 + payload.size();
    h[4] = static_cast<std::uint8_t>(len >> 8);
    h[5] = static_cast<std::uint8_t>(len & 0xff);
    h.insert(h.end(), payload.begin(), payload.end());
    return h;
}

// Same record stream as apa::write_pcap but with byte-swapped header
// fields (magic reads back as 0xd4c3b2a1).
inline void write_pcap_swapped(const std::string& path,
                               const std::vector<apa::RawPacket>& packets,
                               std::uint32_t network) {
    std::string out;
    auto put_be = [&](std::uint32_t v) {
        out.push_back(static_cast<char>((v >> 24) & 0xff));
        out.push_back(static_cast<char>((v >> 16) & 0xff));
        out.push_back(static_cast<char>((v >> 8) & 0xff));
        out.push_back(static_cast<char>(v & 0xff));
    };
    auto put_be16 = [&](std::uint16_t v) {
        out.push_back(static_cast<char>((v >> 8) & 0xff));
        out.push_back(static_cast<char>(v & 0xff));
    };
    put_be(0xa1b2c3d4u); // stored big-endian, reads as the swapped magic
    put_be16(2);
    put_be16(4);
    put_be(0);
    put_be(0);
    put_be(65535);
    put_be(network);
    for (const auto& p : packets) {
        put_be(static_cast<std::uint32_t>(p.capture_ts / 1000000ull));
        put_be(static_cast<std::uint32_t>(p.capture_ts % 1000000ull));
        put_be(static_cast<std::uint32_t>(p.bytes.size()));
        put_be(static_cast<std::uint32_t>(p.bytes.size()));
        out.append(reinterpret_cast<const char*>(p.bytes.data()), p.bytes.size());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace testutil
