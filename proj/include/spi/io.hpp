#pragma once

// Binary containers (little-endian):
//   SPIF  "SPIF" u32 version=1, u32 width, u32 height, f64[width*height]
//   SPIM  "SPIM" u32 version=1, u32 width, u32 height, u32 region_count, u32[width*height]
//   SPIV  "SPIV" u32 version=1, u8 mode, u32 count, f64[count], u32 map_count, u32[map_count]
//   SPIL  "SPIL" u32 version=1, u32 map_count, per map: u32 R, u8[R*R]
// plus 8-bit binary PGM (P5) for viewing.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spi/model.hpp"

namespace spi::io {

std::vector<std::uint8_t> encode_spif(const SceneImage& img);
SceneImage decode_spif(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_spim(const ImageMap& map);
ImageMap decode_spim(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_spiv(const MeasurementSet& ms);
MeasurementSet decode_spiv(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_spil(std::span<const LookupMatrix> lookups);
std::vector<LookupMatrix> decode_spil(std::span<const std::uint8_t> bytes);

/// Values scaled by 255 and rounded half-up, clamped to [0, 255].
std::vector<std::uint8_t> encode_pgm(const SceneImage& img);
SceneImage decode_pgm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

inline SceneImage read_spif(const std::filesystem::path& p) { return decode_spif(read_file(p)); }
inline void write_spif(const std::filesystem::path& p, const SceneImage& img) { write_file(p, encode_spif(img)); }
inline ImageMap read_spim(const std::filesystem::path& p) { return decode_spim(read_file(p)); }
inline void write_spim(const std::filesystem::path& p, const ImageMap& m) { write_file(p, encode_spim(m)); }
inline MeasurementSet read_spiv(const std::filesystem::path& p) { return decode_spiv(read_file(p)); }
inline void write_spiv(const std::filesystem::path& p, const MeasurementSet& ms) { write_file(p, encode_spiv(ms)); }
inline std::vector<LookupMatrix> read_spil(const std::filesystem::path& p) { return decode_spil(read_file(p)); }
inline void write_spil(const std::filesystem::path& p, std::span<const LookupMatrix> l) { write_file(p, encode_spil(l)); }
inline SceneImage read_pgm(const std::filesystem::path& p) { return decode_pgm(read_file(p)); }
inline void write_pgm(const std::filesystem::path& p, const SceneImage& img) { write_file(p, encode_pgm(img)); }

}  // namespace spi::io
