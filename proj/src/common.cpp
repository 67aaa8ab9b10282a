#include "apa/common.hpp"

namespace apa {

static const char* kHexDigits = "0123456789abcdef";

std::string to_hex(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.resize(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out[2 * i] = kHexDigits[data[i] >> 4];
        out[2 * i + 1] = kHexDigits[data[i] & 0x0f];
    }
    return out;
}

std::string to_hex(const byte_vec& bytes) {
    return to_hex(bytes.data(), bytes.size());
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

byte_vec from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0)
        fail(ErrorKind::invalid_argument, "hex string has odd length: " + hex);
    byte_vec out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0)
            fail(ErrorKind::invalid_argument, "invalid hex digit in: " + hex);
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

} // namespace apa
