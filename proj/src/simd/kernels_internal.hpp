#pragma once

#include "spi/kernels.hpp"

namespace spi::simd {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double masked_sum(const std::uint8_t* mask, const double* x, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
void gather_add(double* out, const double* table, const std::uint32_t* labels, std::size_t n);
void affine_gather(double* x, const std::uint32_t* labels, const double* scale, const double* offset,
                   const std::uint8_t* keep, std::size_t n);
void fir_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps, double* out);
void axpy(double* y, const double* x, double a, std::size_t n);
}  // namespace scalar

// Defined in the per-ISA translation units; each returns nullptr when the
// variant is not built for this target.
const KernelTable* avx2_table_if_built();
const KernelTable* neon_table_if_built();

}  // namespace spi::simd
