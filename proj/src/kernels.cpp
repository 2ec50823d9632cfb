// SPDX-License-Identifier: MIT
// Runtime kernel selection.

#include <cstdlib>
#include <string_view>

#include "lvcal/kernels.hpp"

namespace lvcal::simd {

#if defined(LVCAL_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

const KernelTable* avx2_kernels() noexcept {
#if defined(LVCAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (supported) return &avx2_table();
#endif
    return nullptr;
}

const KernelTable& active_kernels() noexcept {
    static const KernelTable* table = [] {
        const char* env = std::getenv("LVCAL_SIMD");
        if (env && std::string_view(env) == "scalar") return &scalar_kernels();
        const KernelTable* avx = avx2_kernels();
        return avx ? avx : &scalar_kernels();
    }();
    return *table;
}

}  // namespace lvcal::simd
