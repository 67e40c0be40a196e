#include "asnsim/kernels/bytescan.hpp"

#include <cstdlib>

namespace asnsim::kernels {

namespace {

using FindByteFn = const unsigned char* (*)(const unsigned char*, const unsigned char*,
                                            unsigned char) noexcept;
using ToLowerFn = void (*)(char*, std::size_t) noexcept;

struct Dispatch {
    FindByteFn find_byte = &find_byte_scalar;
    ToLowerFn to_lower = &to_lower_ascii_scalar;
    const char* name = "scalar";
};

Dispatch select() noexcept {
    Dispatch d;
    const char* force = std::getenv("ASNSIM_FORCE_SCALAR");
    if (force != nullptr && force[0] != '\0' && force[0] != '0') return d;
#if defined(ASNSIM_HAVE_AVX2_KERNELS)
    if (cpu_has_avx2()) {
        d.find_byte = &find_byte_avx2;
        d.to_lower = &to_lower_ascii_avx2;
        d.name = "avx2";
    }
#endif
    return d;
}

const Dispatch& dispatch() noexcept {
    static const Dispatch d = select();
    return d;
}

}  // namespace

const unsigned char* find_byte(const unsigned char* first, const unsigned char* last,
                               unsigned char needle) noexcept {
    return dispatch().find_byte(first, last, needle);
}

void to_lower_ascii(char* data, std::size_t n) noexcept { dispatch().to_lower(data, n); }

const char* active_implementation() noexcept { return dispatch().name; }

}  // namespace asnsim::kernels
