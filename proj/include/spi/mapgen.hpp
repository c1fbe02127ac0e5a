#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "spi/model.hpp"

namespace spi::mapgen {

struct ComplexField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::complex<double>> values;  // row-major
};

/// I.i.d. circular complex Gaussian noise with unit total variance per pixel.
ComplexField white_noise(std::size_t width, std::size_t height, std::uint64_t seed);

/// Multiplies the spectrum of `field` by H(u,v) = exp(-2 pi^2 l^2 (u^2 + v^2)),
/// u, v in cycles/pixel on the periodic DFT grid. l may be any value >= 0.
ComplexField gaussian_lowpass(const ComplexField& field, double characteristic_size);

/// Correlated complex Gaussian field: white_noise(seed) low-passed with
/// characteristic size l. Requires 0 < l <= min(width, height) / 2.
ComplexField gen_correlated_field(std::size_t width, std::size_t height, double characteristic_size,
                                  std::uint64_t seed);

/// label = min(floor((arg + pi) * Q / 2pi), Q - 1), then unused bins are
/// removed, keeping the original id order.
ImageMap quantize_phase_to_map(const ComplexField& field, std::uint32_t levels);

/// Map m is built from seed split_seed(master_seed, m).
MapStack build_map_stack(std::size_t width, std::size_t height, std::span<const FieldParams> params,
                         std::uint64_t master_seed);

}  // namespace spi::mapgen
