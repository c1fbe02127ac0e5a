#pragma once

#include <cstdint>
#include <optional>

#include "spi/model.hpp"
#include "spi/patterns.hpp"

namespace spi::sim {

struct NoiseSpec {
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
};

/// Noiseless detector readings, map blocks in stack order. Raw mode gives
/// d_k = sum_p mask_k(p) x(p); complementary mode gives the pair
/// (d+_k, d-_k) with d-_k = sum_p (1 - mask_k(p)) x(p), interleaved.
MeasurementSet forward_measure(const SceneImage& scene, const patterns::PatternSet& set,
                               MeasurementMode mode = MeasurementMode::Raw);

/// Root-mean-square of the readings.
double rms(const MeasurementSet& ms);

/// Adds i.i.d. Gaussian noise with sigma = rms(ms) * 10^(-snr_db/20).
/// An absent snr_db returns the input unchanged.
MeasurementSet add_noise(const MeasurementSet& ms, const NoiseSpec& spec);

/// Uniform quantizer with step full_scale / (2^bits - 1). Readings are
/// clipped to [0, full_scale] in raw mode and [-full_scale, full_scale]
/// in complementary mode. full_scale defaults to the largest reading.
MeasurementSet daq_quantize(const MeasurementSet& ms, int bits, std::optional<double> full_scale = std::nullopt);

/// JSON sidecar: mode, snr_db, daq_bits, seed, pattern_count_displayed.
std::string sidecar_json(const MeasurementSet& ms);

}  // namespace spi::sim
