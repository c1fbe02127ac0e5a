#include "spi/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "spi/error.hpp"
#include "spi/kernels.hpp"

namespace spi::enhance {

std::size_t PinMask::pinned_count() const {
    return static_cast<std::size_t>(std::count(pinned.begin(), pinned.end(), std::uint8_t{1}));
}

static void check_aligned(const RegionStats& stats, const MapStack& stack) {
    if (stats.maps.size() != stack.maps.size())
        throw Error(ErrorCode::BlockMismatch, "region stats do not match the map stack");
    for (std::size_t m = 0; m < stack.maps.size(); ++m)
        if (stats.maps[m].sums.size() != stack.maps[m].region_count() ||
            stats.maps[m].means.size() != stack.maps[m].region_count())
            throw Error(ErrorCode::BlockMismatch, "region count mismatch in map " + std::to_string(m));
}

PinMask detect_empty_regions(const RegionStats& stats, const MapStack& stack, const EnhanceParams& params) {
    check_aligned(stats, stack);
    PinMask pin;
    pin.threshold = std::max(params.tau_rel * stats.max_abs_mean(), params.tau_abs);
    pin.pinned.assign(stack.width() * stack.height(), 0);
    for (std::size_t m = 0; m < stack.maps.size(); ++m) {
        const auto& means = stats.maps[m].means;
        std::vector<std::uint8_t> empty(means.size(), 0);
        bool any = false;
        for (std::size_t r = 0; r < means.size(); ++r) {
            if (std::abs(means[r]) <= pin.threshold) {
                empty[r] = 1;
                any = true;
                pin.empty.push_back({m, r});
            }
        }
        if (!any) continue;
        auto labels = stack.maps[m].labels();
        for (std::size_t p = 0; p < labels.size(); ++p) pin.pinned[p] |= empty[labels[p]];
    }
    return pin;
}

static void clamp_image(SceneImage& x, const EnhanceParams& params) {
    if (!params.clamp_nonneg && !params.clamp_unit) return;
    for (auto& v : x.data()) {
        if (params.clamp_nonneg) v = std::max(v, 0.0);
        if (params.clamp_unit) v = std::min(v, 1.0);
    }
}

SceneImage rescale_sweep(const SceneImage& x, const RegionStats& stats, const MapStack& stack, const PinMask& pin,
                         const EnhanceParams& params, std::vector<Inconsistency>* inconsistencies) {
    check_aligned(stats, stack);
    if (x.width() != stack.width() || x.height() != stack.height())
        throw Error(ErrorCode::DimensionMismatch, "image and map stack dimensions differ");
    if (pin.pinned.size() != x.size()) throw Error(ErrorCode::DimensionMismatch, "pin mask size differs from image");

    const auto& k = simd::kernels();
    std::vector<std::uint8_t> keep(x.size());
    for (std::size_t p = 0; p < keep.size(); ++p) keep[p] = pin.pinned[p] ^ 1;

    SceneImage out = x;
    auto px = out.data();
    std::size_t next_empty = 0;
    for (std::size_t m = 0; m < stack.maps.size(); ++m) {
        const auto& map = stack.maps[m];
        const auto& pm = stats.maps[m];
        const std::size_t regions = map.region_count();
        auto labels = map.labels();

        std::vector<std::uint8_t> is_empty(regions, 0);
        for (; next_empty < pin.empty.size() && pin.empty[next_empty].map == m; ++next_empty)
            is_empty[pin.empty[next_empty].region] = 1;

        std::vector<double> current(regions, 0.0);
        std::vector<std::size_t> free_count(regions, 0);
        for (std::size_t p = 0; p < labels.size(); ++p) {
            if (!keep[p]) continue;
            current[labels[p]] += px[p];
            ++free_count[labels[p]];
        }

        std::vector<double> scale(regions, 1.0), offset(regions, 0.0);
        for (std::size_t r = 0; r < regions; ++r) {
            if (is_empty[r]) continue;
            const double target = pm.sums[r];
            const double size = static_cast<double>(pm.sizes[r]);
            if (free_count[r] == 0) {
                if (target > pin.threshold * size && inconsistencies)
                    inconsistencies->push_back({{m, r}, target});
                continue;
            }
            if (current[r] > 1e-12 * size) {
                scale[r] = target / current[r];
            } else {
                offset[r] = (target - current[r]) / static_cast<double>(free_count[r]);
            }
        }
        k.affine_gather(px.data(), labels.data(), scale.data(), offset.data(), keep.data(), px.size());
    }
    clamp_image(out, params);
    return out;
}

EnhanceResult enhance(const SceneImage& x0, const RegionStats& stats, const MapStack& stack,
                      const EnhanceParams& params) {
    if (params.max_iterations < 1) throw Error(ErrorCode::BadParam, "need at least one iteration");
    if (params.tau_rel < 0.0) throw Error(ErrorCode::BadParam, "tau_rel must be non-negative");
    if (x0.width() != stack.width() || x0.height() != stack.height())
        throw Error(ErrorCode::DimensionMismatch, "initial image does not match the map stack");

    auto pin = detect_empty_regions(stats, stack, params);
    EnhanceResult result{x0, {}};
    for (std::size_t p = 0; p < pin.pinned.size(); ++p)
        if (pin.pinned[p]) result.image[p] = 0.0;
    result.report.empty_regions = pin.empty.size();
    result.report.pinned_pixels = pin.pinned_count();

    for (int it = 0; it < params.max_iterations; ++it) {
        auto next = rescale_sweep(result.image, stats, stack, pin, params,
                                  it == 0 ? &result.report.inconsistencies : nullptr);
        double change = 0.0, peak = 0.0;
        for (std::size_t p = 0; p < next.size(); ++p) {
            change = std::max(change, std::abs(next[p] - result.image[p]));
            peak = std::max(peak, std::abs(next[p]));
        }
        result.image = std::move(next);
        result.report.iterations = it + 1;
        result.report.max_change.push_back(change);
        if (change == 0.0 || change < params.stop_tol * peak) break;
    }
    return result;
}

std::string EnhanceReport::to_json() const {
    nlohmann::ordered_json j;
    j["iterations"] = iterations;
    j["max_change"] = max_change;
    j["empty_regions"] = empty_regions;
    j["pinned_pixels"] = pinned_pixels;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& inc : inconsistencies)
        arr.push_back({{"map", inc.region.map}, {"region", inc.region.region}, {"target_sum", inc.target_sum}});
    j["inconsistencies"] = arr;
    return j.dump(2);
}

}  // namespace spi::enhance
