#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace spi::simd {

std::string_view to_string(Level level) {
    switch (level) {
        case Level::Scalar: return "scalar";
        case Level::Avx2: return "avx2";
        case Level::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? avx2_table_if_built() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_kernels() { return neon_table_if_built(); }

namespace {

const KernelTable& select() {
    const char* env = std::getenv("SPI_SIMD");
    std::string forced = env ? env : "";
    if (forced == "scalar") return scalar_kernels();
    if (forced == "avx2" && avx2_kernels()) return *avx2_kernels();
    if (forced == "neon" && neon_kernels()) return *neon_kernels();
    if (auto* t = avx2_kernels()) return *t;
    if (auto* t = neon_kernels()) return *t;
    return scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace spi::simd
