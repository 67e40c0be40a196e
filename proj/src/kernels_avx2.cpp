#include "asnsim/kernels/bytescan.hpp"

#if defined(ASNSIM_HAVE_AVX2_KERNELS)

#include <immintrin.h>

namespace asnsim::kernels {

bool cpu_has_avx2() noexcept { return __builtin_cpu_supports("avx2"); }

const unsigned char* find_byte_avx2(const unsigned char* first, const unsigned char* last,
                                    unsigned char needle) noexcept {
    const __m256i n = _mm256_set1_epi8(static_cast<char>(needle));
    while (last - first >= 32) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(first));
        const unsigned mask =
            static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, n)));
        if (mask != 0) return first + __builtin_ctz(mask);
        first += 32;
    }
    return find_byte_scalar(first, last, needle);
}

void to_lower_ascii_avx2(char* data, std::size_t n) noexcept {
    // Bytes >= 0x80 are negative under signed compare, so UTF-8 continuation
    // bytes never satisfy v > 'A'-1 and pass through unchanged.
    const __m256i lo = _mm256_set1_epi8('A' - 1);
    const __m256i hi = _mm256_set1_epi8('Z' + 1);
    const __m256i delta = _mm256_set1_epi8(0x20);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
        const __m256i ge = _mm256_cmpgt_epi8(v, lo);
        const __m256i le = _mm256_cmpgt_epi8(hi, v);
        const __m256i mask = _mm256_and_si256(ge, le);
        v = _mm256_add_epi8(v, _mm256_and_si256(mask, delta));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(data + i), v);
    }
    to_lower_ascii_scalar(data + i, n - i);
}

}  // namespace asnsim::kernels

#endif  // ASNSIM_HAVE_AVX2_KERNELS
