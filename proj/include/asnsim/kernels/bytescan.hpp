#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Byte-scanning kernels behind the ingestion and DOI-normalization hot
// loops. Scalar implementations are the reference; the AVX2 variants are
// selected at runtime when the CPU supports them and must be bit-equivalent
// (enforced by the kernel equivalence tests).

namespace asnsim::kernels {

// Reference kernels.
const unsigned char* find_byte_scalar(const unsigned char* first, const unsigned char* last,
                                      unsigned char needle) noexcept;
void to_lower_ascii_scalar(char* data, std::size_t n) noexcept;

#if defined(__x86_64__) || defined(__i386__)
#define ASNSIM_HAVE_AVX2_KERNELS 1
bool cpu_has_avx2() noexcept;
const unsigned char* find_byte_avx2(const unsigned char* first, const unsigned char* last,
                                    unsigned char needle) noexcept;
void to_lower_ascii_avx2(char* data, std::size_t n) noexcept;
#endif

// Dispatched entry points. Selection happens once per process; set
// ASNSIM_FORCE_SCALAR=1 in the environment to pin the reference kernels.
const unsigned char* find_byte(const unsigned char* first, const unsigned char* last,
                               unsigned char needle) noexcept;
void to_lower_ascii(char* data, std::size_t n) noexcept;

// Name of the implementation the dispatcher picked ("avx2" or "scalar").
const char* active_implementation() noexcept;

inline const char* find_char(const char* first, const char* last, char needle) noexcept {
    return reinterpret_cast<const char*>(
        find_byte(reinterpret_cast<const unsigned char*>(first),
                  reinterpret_cast<const unsigned char*>(last),
                  static_cast<unsigned char>(needle)));
}

inline std::size_t find_char(std::string_view haystack, char needle) noexcept {
    const char* p = find_char(haystack.data(), haystack.data() + haystack.size(), needle);
    return p == haystack.data() + haystack.size() ? std::string_view::npos
                                                  : static_cast<std::size_t>(p - haystack.data());
}

inline void to_lower_ascii(std::string& s) noexcept { to_lower_ascii(s.data(), s.size()); }

}  // namespace asnsim::kernels
