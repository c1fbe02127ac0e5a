#include "spi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "spi/error.hpp"
#include "spi/kernels.hpp"

namespace spi::sim {

MeasurementSet forward_measure(const SceneImage& scene, const patterns::PatternSet& set, MeasurementMode mode) {
    if (scene.width() != set.width() || scene.height() != set.height())
        throw Error(ErrorCode::DimensionMismatch, "scene and pattern set dimensions differ");
    const auto& k = simd::kernels();
    const std::size_t n = scene.size();
    const std::size_t per_pattern = mode == MeasurementMode::Complementary ? 2 : 1;

    MeasurementSet ms;
    ms.mode = mode;
    ms.values.reserve(set.pattern_count() * per_pattern);
    std::vector<std::uint8_t> mask(n), complement(n);
    for (std::size_t m = 0; m < set.lookups.size(); ++m) {
        ms.map_offsets.push_back(static_cast<std::uint32_t>(ms.values.size()));
        const auto& map = set.stack->maps[m];
        for (std::size_t row = 0; row < set.lookups[m].size(); ++row) {
            patterns::materialize_pattern(map, set.lookups[m].row(row), mask);
            ms.values.push_back(k.masked_sum(mask.data(), scene.data().data(), n));
            if (mode == MeasurementMode::Complementary) {
                for (std::size_t p = 0; p < n; ++p) complement[p] = mask[p] ^ 1;
                ms.values.push_back(k.masked_sum(complement.data(), scene.data().data(), n));
            }
        }
    }
    return ms;
}

double rms(const MeasurementSet& ms) {
    if (ms.values.empty()) return 0.0;
    const auto& k = simd::kernels();
    double ss = k.dot(ms.values.data(), ms.values.data(), ms.values.size());
    return std::sqrt(ss / static_cast<double>(ms.values.size()));
}

MeasurementSet add_noise(const MeasurementSet& ms, const NoiseSpec& spec) {
    if (!spec.snr_db) return ms;
    if (!std::isfinite(*spec.snr_db))
        throw Error(ErrorCode::BadParam, "snr_db must be finite");
    MeasurementSet out = ms;
    const double sigma = rms(ms) * std::pow(10.0, -*spec.snr_db / 20.0);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out.values) v += sigma * normal(rng);
    out.snr_db = spec.snr_db;
    out.noise_seed = spec.seed;
    return out;
}

MeasurementSet daq_quantize(const MeasurementSet& ms, int bits, std::optional<double> full_scale) {
    if (bits < 4 || bits > 24) throw Error(ErrorCode::BadParam, "DAQ bits must lie in [4, 24]");
    double fs = full_scale.value_or(ms.values.empty() ? 0.0 : *std::max_element(ms.values.begin(), ms.values.end()));
    if (!(fs > 0.0)) throw Error(ErrorCode::BadParam, "DAQ full scale must be positive");
    const double step = fs / (std::ldexp(1.0, bits) - 1.0);
    const double lo = ms.mode == MeasurementMode::Raw ? 0.0 : -fs;
    MeasurementSet out = ms;
    for (auto& v : out.values) v = std::clamp(std::round(v / step) * step, lo, fs);
    out.daq_bits = bits;
    return out;
}

std::string sidecar_json(const MeasurementSet& ms) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(ms.mode));
    j["snr_db"] = ms.snr_db ? nlohmann::ordered_json(*ms.snr_db) : nlohmann::ordered_json(nullptr);
    j["daq_bits"] = ms.daq_bits ? nlohmann::ordered_json(*ms.daq_bits) : nlohmann::ordered_json(nullptr);
    j["seed"] = ms.noise_seed ? nlohmann::ordered_json(*ms.noise_seed) : nlohmann::ordered_json(nullptr);
    j["pattern_count_displayed"] = ms.pattern_count_displayed();
    return j.dump(2);
}

}  // namespace spi::sim
