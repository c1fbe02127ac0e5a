// NEON variants for AArch64, where Advanced SIMD with float64 lanes is part
// of the baseline ISA. Two doubles per register; gathers are done with
// scalar lane inserts since NEON has no gather instruction.

#include "kernels_internal.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace spi::simd::neon {

namespace {

inline uint64x2_t byte_mask2(const std::uint8_t* p) {
    uint64x2_t v = {static_cast<std::uint64_t>(p[0]), static_cast<std::uint64_t>(p[1])};
    return vcgtq_u64(v, vdupq_n_u64(0));
}

inline float64x2_t gather2(const double* table, const std::uint32_t* idx) {
    float64x2_t v = vdupq_n_f64(table[idx[0]]);
    return vsetq_lane_f64(table[idx[1]], v, 1);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double masked_sum(const std::uint8_t* mask, const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t bits = vandq_u64(byte_mask2(mask + i), vreinterpretq_u64_f64(vld1q_f64(x + i)));
        acc = vaddq_f64(acc, vreinterpretq_f64_u64(bits));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i)
        if (mask[i]) s += x[i];
    return s;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void gather_add(double* out, const double* table, const std::uint32_t* labels, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), gather2(table, labels + i)));
    for (; i < n; ++i) out[i] += table[labels[i]];
}

void affine_gather(double* x, const std::uint32_t* labels, const double* scale, const double* offset,
                   const std::uint8_t* keep, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vaddq_f64(vmulq_f64(vld1q_f64(x + i), gather2(scale, labels + i)), gather2(offset, labels + i));
        uint64x2_t bits = vandq_u64(byte_mask2(keep + i), vreinterpretq_u64_f64(v));
        vst1q_f64(x + i, vreinterpretq_f64_u64(bits));
    }
    for (; i < n; ++i) {
        auto l = labels[i];
        x[i] = keep[i] ? x[i] * scale[l] + offset[l] : 0.0;
    }
}

void fir_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps, double* out) {
    if (n < ntaps) return;
    const std::size_t count = n - ntaps + 1;
    std::size_t i = 0;
    for (; i + 2 <= count; i += 2) {
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t k = 0; k < ntaps; ++k) acc = vfmaq_n_f64(acc, vld1q_f64(in + i + k), taps[k]);
        vst1q_f64(out + i, acc);
    }
    for (; i < count; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < ntaps; ++k) s += taps[k] * in[i + k];
        out[i] = s;
    }
}

void axpy(double* y, const double* x, double a, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), a));
    for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace spi::simd::neon

namespace spi::simd {

const KernelTable* neon_table_if_built() {
    static const KernelTable table{Level::Neon,       neon::dot,        neon::masked_sum,
                                   neon::sq_diff_sum, neon::gather_add, neon::affine_gather,
                                   neon::fir_valid,   neon::axpy};
    return &table;
}

}  // namespace spi::simd

#else

namespace spi::simd {
const KernelTable* neon_table_if_built() { return nullptr; }
}  // namespace spi::simd

#endif
