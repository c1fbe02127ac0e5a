#pragma once

// Data-parallel inner loops used across the pipeline. Every kernel has a
// scalar reference implementation; vector variants (AVX2+FMA on x86-64,
// NEON on AArch64) are selected once at runtime and must agree with the
// scalar path up to floating-point reassociation.
//
// Set SPI_SIMD=scalar|avx2|neon in the environment to force a level.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace spi::simd {

enum class Level { Scalar, Avx2, Neon };

std::string_view to_string(Level level);

struct KernelTable {
    Level level;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i mask[i] * x[i], mask entries 0/1
    double (*masked_sum)(const std::uint8_t* mask, const double* x, std::size_t n);
    // sum_i (a[i] - b[i])^2
    double (*sq_diff_sum)(const double* a, const double* b, std::size_t n);
    // out[i] += table[labels[i]]
    void (*gather_add)(double* out, const double* table, const std::uint32_t* labels, std::size_t n);
    // x[i] = keep[i] ? x[i] * scale[labels[i]] + offset[labels[i]] : 0
    void (*affine_gather)(double* x, const std::uint32_t* labels, const double* scale, const double* offset,
                          const std::uint8_t* keep, std::size_t n);
    // out[i] = sum_k taps[k] * in[i + k] for i in [0, n - ntaps]
    void (*fir_valid)(const double* in, std::size_t n, const double* taps, std::size_t ntaps, double* out);
    // y[i] += a * x[i]
    void (*axpy)(double* y, const double* x, double a, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// The table picked for this process (honours SPI_SIMD).
const KernelTable& kernels();

}  // namespace spi::simd
