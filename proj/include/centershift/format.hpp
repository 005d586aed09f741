#pragma once

#include <charconv>
#include <string>

namespace centershift {

/// Shortest round-trip decimal representation, independent of any locale.
/// Every CSV number in the project goes through here so reruns are
/// byte-identical.
inline std::string format_double(double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace centershift
