#include "asnsim/kernels/bytescan.hpp"

namespace asnsim::kernels {

const unsigned char* find_byte_scalar(const unsigned char* first, const unsigned char* last,
                                      unsigned char needle) noexcept {
    for (; first != last; ++first) {
        if (*first == needle) return first;
    }
    return last;
}

void to_lower_ascii_scalar(char* data, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char c = static_cast<unsigned char>(data[i]);
        if (c >= 'A' && c <= 'Z') data[i] = static_cast<char>(c + 0x20);
    }
}

}  // namespace asnsim::kernels
