#include "spi/metrics.hpp"

#include <array>
#include <cmath>

#include "spi/error.hpp"
#include "spi/kernels.hpp"

namespace spi::metrics {

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_dims(const SceneImage& a, const SceneImage& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw Error(ErrorCode::DimensionMismatch, "images differ in size");
}

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (std::size_t i = 0; i < kWindow; ++i) {
        double d = static_cast<double>(i) - static_cast<double>(kWindow / 2);
        taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += taps[i];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

// Separable valid-mode Gaussian filter: (w - 10) x (h - 10) output.
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t w, std::size_t h,
                                 const std::array<double, kWindow>& taps) {
    const auto& k = simd::kernels();
    const std::size_t ow = w - kWindow + 1, oh = h - kWindow + 1;
    std::vector<double> rows(ow * h);
    for (std::size_t y = 0; y < h; ++y) k.fir_valid(in.data() + y * w, w, taps.data(), kWindow, rows.data() + y * ow);
    std::vector<double> out(ow * oh, 0.0);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t t = 0; t < kWindow; ++t) k.axpy(out.data() + y * ow, rows.data() + (y + t) * ow, taps[t], ow);
    return out;
}

}  // namespace

double mse(const SceneImage& ref, const SceneImage& test) {
    check_dims(ref, test);
    const auto& k = simd::kernels();
    return k.sq_diff_sum(ref.data().data(), test.data().data(), ref.size()) / static_cast<double>(ref.size());
}

double psnr(const SceneImage& ref, const SceneImage& test) {
    double e = mse(ref, test);
    if (e == 0.0) return kInfinitePsnr;
    return 10.0 * std::log10(1.0 / e);
}

double ssim(const SceneImage& ref, const SceneImage& test) {
    check_dims(ref, test);
    const std::size_t w = ref.width(), h = ref.height();
    if (w < kWindow || h < kWindow) throw Error(ErrorCode::TooSmall, "SSIM needs at least 11x11 pixels");

    const std::size_t n = ref.size();
    std::vector<double> a(ref.data().begin(), ref.data().end()), b(test.data().begin(), test.data().end());
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto taps = gaussian_taps();
    auto mu_a = filter_valid(a, w, h, taps);
    auto mu_b = filter_valid(b, w, h, taps);
    auto m_aa = filter_valid(aa, w, h, taps);
    auto m_bb = filter_valid(bb, w, h, taps);
    auto m_ab = filter_valid(ab, w, h, taps);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ua = mu_a[i], ub = mu_b[i];
        const double va = m_aa[i] - ua * ua, vb = m_bb[i] - ub * ub, cov = m_ab[i] - ua * ub;
        total += ((2.0 * ua * ub + kC1) * (2.0 * cov + kC2)) / ((ua * ua + ub * ub + kC1) * (va + vb + kC2));
    }
    return total / static_cast<double>(mu_a.size());
}

MetricResult evaluate(const SceneImage& ref, const SceneImage& test) { return {psnr(ref, test), ssim(ref, test)}; }

}  // namespace spi::metrics
