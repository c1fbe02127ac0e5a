// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// on x86-64; callers must only reach it through the dispatch table, which
// checks CPU support first.

#include "kernels_internal.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstring>

namespace spi::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// 4 bytes -> 4 all-ones/all-zeros 64-bit lanes
inline __m256d byte_mask4(const std::uint8_t* p) {
    std::int32_t word;
    std::memcpy(&word, p, sizeof(word));
    __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(word));
    return _mm256_castsi256_pd(_mm256_cmpgt_epi64(wide, _mm256_setzero_si256()));
}

inline __m128i load_labels4(const std::uint32_t* p) {
    return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double masked_sum(const std::uint8_t* mask, const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_and_pd(byte_mask4(mask + i), _mm256_loadu_pd(x + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_and_pd(byte_mask4(mask + i + 4), _mm256_loadu_pd(x + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_and_pd(byte_mask4(mask + i), _mm256_loadu_pd(x + i)));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        if (mask[i]) s += x[i];
    return s;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void gather_add(double* out, const double* table, const std::uint32_t* labels, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_i32gather_pd(table, load_labels4(labels + i), 8);
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), t));
    }
    for (; i < n; ++i) out[i] += table[labels[i]];
}

void affine_gather(double* x, const std::uint32_t* labels, const double* scale, const double* offset,
                   const std::uint8_t* keep, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m128i idx = load_labels4(labels + i);
        __m256d s = _mm256_i32gather_pd(scale, idx, 8);
        __m256d o = _mm256_i32gather_pd(offset, idx, 8);
        // mul then add (no fma) so the result rounds like the scalar path
        __m256d v = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), s), o);
        _mm256_storeu_pd(x + i, _mm256_and_pd(byte_mask4(keep + i), v));
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
    for (; i + 4 <= count; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < ntaps; ++k)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(in + i + k), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < count; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < ntaps; ++k) s += taps[k] * in[i + k];
        out[i] = s;
    }
}

void axpy(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace spi::simd::avx2

namespace spi::simd {

const KernelTable* avx2_table_if_built() {
    static const KernelTable table{Level::Avx2,       avx2::dot,        avx2::masked_sum,
                                   avx2::sq_diff_sum, avx2::gather_add, avx2::affine_gather,
                                   avx2::fir_valid,   avx2::axpy};
    return &table;
}

}  // namespace spi::simd

#else

namespace spi::simd {
const KernelTable* avx2_table_if_built() { return nullptr; }
}  // namespace spi::simd

#endif
