#pragma once

#include <string>
#include <string_view>

#include "asnsim/kernels/bytescan.hpp"

namespace asnsim {

inline bool is_ascii_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::string to_lower_copy(std::string_view s) {
    std::string out(s);
    kernels::to_lower_ascii(out);
    return out;
}

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

}  // namespace asnsim
