#include "kernels_internal.hpp"

namespace spi::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double masked_sum(const std::uint8_t* mask, const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) s += x[i];
    return s;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void gather_add(double* out, const double* table, const std::uint32_t* labels, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += table[labels[i]];
}

void affine_gather(double* x, const std::uint32_t* labels, const double* scale, const double* offset,
                   const std::uint8_t* keep, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        auto l = labels[i];
        x[i] = keep[i] ? x[i] * scale[l] + offset[l] : 0.0;
    }
}

void fir_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps, double* out) {
    if (n < ntaps) return;
    for (std::size_t i = 0; i + ntaps <= n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < ntaps; ++k) s += taps[k] * in[i + k];
        out[i] = s;
    }
}

void axpy(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace spi::simd::scalar

namespace spi::simd {

const KernelTable& scalar_kernels() {
    static const KernelTable table{Level::Scalar,        scalar::dot,           scalar::masked_sum,
                                   scalar::sq_diff_sum,  scalar::gather_add,    scalar::affine_gather,
                                   scalar::fir_valid,    scalar::axpy};
    return table;
}

}  // namespace spi::simd
