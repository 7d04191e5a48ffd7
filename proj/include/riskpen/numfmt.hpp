#pragma once

#include <charconv>
#include <string>
#include <string_view>

namespace riskpen {

/// Shortest decimal text that reads back to the same double.
inline std::string format_real(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

/// Parses a full token as a double; returns false on trailing garbage.
inline bool parse_real(std::string_view text, double& out) {
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && end == text.data() + text.size();
}

} // namespace riskpen
