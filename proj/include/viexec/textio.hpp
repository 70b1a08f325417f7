#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace viexec {

/// Shortest decimal string that round-trips to the same double; used for all
/// CSV output so identical runs produce identical bytes.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// FNV-1a content hash rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& content);

}  // namespace viexec
