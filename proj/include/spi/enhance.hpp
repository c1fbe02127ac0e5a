#pragma once

// Second reconstruction stage: regions whose recovered mean is close to
// zero are declared empty and their pixels pinned to zero for the whole
// run; the remaining regions are then rescaled map by map until their
// measured means are restored.

#include <string>
#include <vector>

#include "spi/model.hpp"

namespace spi::enhance {

struct EnhanceParams {
    double tau_rel = 0.02;
    double tau_abs = 0.0;
    int max_iterations = 5;
    double stop_tol = 1e-4;
    bool clamp_nonneg = true;
    bool clamp_unit = false;
};

struct RegionRef {
    std::size_t map;
    std::size_t region;
    friend bool operator==(const RegionRef&, const RegionRef&) = default;
    friend auto operator<=>(const RegionRef&, const RegionRef&) = default;
};

struct PinMask {
    std::vector<std::uint8_t> pinned;  // per pixel, 1 = forced to zero
    std::vector<RegionRef> empty;      // sorted by (map, region)
    double threshold = 0.0;            // tau actually applied

    std::size_t pinned_count() const;
};

/// (m, r) is empty iff |mean| <= max(tau_rel * max|mean|, tau_abs).
PinMask detect_empty_regions(const RegionStats& stats, const MapStack& stack, const EnhanceParams& params);

struct Inconsistency {
    RegionRef region;
    double target_sum;
};

/// One cyclic pass over all maps. Non-empty regions are multiplied by
/// S / c (c = current unpinned sum, S = measured sum) or, when c is
/// negligible, shifted by (S - c) / |unpinned|. Pinned pixels stay zero.
/// Fully pinned regions with S > tau |r| are reported and skipped.
SceneImage rescale_sweep(const SceneImage& x, const RegionStats& stats, const MapStack& stack, const PinMask& pin,
                         const EnhanceParams& params, std::vector<Inconsistency>* inconsistencies = nullptr);

struct EnhanceReport {
    int iterations = 0;
    std::vector<double> max_change;
    std::size_t empty_regions = 0;
    std::size_t pinned_pixels = 0;
    std::vector<Inconsistency> inconsistencies;

    std::string to_json() const;
};

struct EnhanceResult {
    SceneImage image;
    EnhanceReport report;
};

/// Pins once, then sweeps up to max_iterations times, stopping early when
/// max|x_i - x_{i-1}| < stop_tol * max|x_i|.
EnhanceResult enhance(const SceneImage& x0, const RegionStats& stats, const MapStack& stack,
                      const EnhanceParams& params);

}  // namespace spi::enhance
