#pragma once

#include <limits>

#include "spi/model.hpp"

namespace spi::metrics {

constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) with peak value 1; +inf for identical images.
double psnr(const SceneImage& ref, const SceneImage& test);

double mse(const SceneImage& ref, const SceneImage& test);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, L = 1, averaged over all fully contained window positions.
/// Requires min(width, height) >= 11.
double ssim(const SceneImage& ref, const SceneImage& test);

struct MetricResult {
    double psnr_db;
    double ssim;
};

MetricResult evaluate(const SceneImage& ref, const SceneImage& test);

}  // namespace spi::metrics
