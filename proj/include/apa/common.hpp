#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace apa {

using byte_vec = std::vector<std::uint8_t>;

enum class ErrorKind {
    invalid_argument,
    io,
    format,
    runtime,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

// Warnings are collected, not thrown: a bad packet should not kill a run.
using warning_list = std::vector<std::string>;

std::string to_hex(const std::uint8_t* data, std::size_t len);
std::string to_hex(const byte_vec& bytes);
byte_vec from_hex(const std::string& hex);

} // namespace apa
