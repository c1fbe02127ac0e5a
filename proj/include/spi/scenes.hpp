#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "spi/model.hpp"

namespace spi::scenes {

/// Uniform-size 8-bit glyph rasters, e.g. 28x28 handwritten digits.
struct GlyphSet {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per glyph

    std::span<const std::uint8_t> glyph(std::size_t i) const { return {pixels.data() + i * rows * cols, rows * cols}; }
    /// Glyph i as an image with values in [0, 1].
    SceneImage image(std::size_t i) const;
};

/// Parses an IDX3 unsigned-byte file (magic 0x00000803, big-endian dims).
GlyphSet parse_idx_glyphs(std::span<const std::uint8_t> bytes);
GlyphSet load_idx_glyphs(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_idx_glyphs(const GlyphSet& glyphs);

/// Stroke-rendered digits 0-9 with random slant, scale and thickness; a
/// stand-in for handwritten digit datasets when none is available.
GlyphSet synthetic_digit_glyphs(std::size_t count, std::uint64_t seed, std::size_t size = 28);

enum class SceneKind { LineArt, Glyphs, Siemens };

struct LineArtKnobs {
    int min_strokes = 3;
    int max_strokes = 12;
    int min_width = 1;
    int max_width = 3;
    int max_ellipses = 3;
    double extent = 0.35;  // stroke control-point spread, fraction of min(width, height)
};

struct GlyphKnobs {
    int min_count = 3;
    int max_count = 10;
    double min_scale = 0.5;
    double max_scale = 2.0;
    std::optional<std::pair<std::size_t, std::size_t>> position;  // forces every placement (x, y)
};

struct SiemensKnobs {
    int spokes = 32;
    double gamma = 2.0;
};

struct SceneSpec {
    SceneKind kind = SceneKind::LineArt;
    double sparsity_max = 0.05;
    std::uint64_t seed = 0;
    LineArtKnobs lineart;
    GlyphKnobs glyphs;
    SiemensKnobs siemens;
};

SceneKind parse_scene_kind(std::string_view text);

/// Binary strokes (quadratic Bezier) and ellipse outlines, redrawn up to 100
/// times until the support fraction is <= sparsity_max.
SceneImage gen_lineart(std::size_t width, std::size_t height, const SceneSpec& spec);

/// Randomly placed, bilinearly scaled glyphs composited by per-pixel max.
SceneImage compose_glyph_scene(std::size_t width, std::size_t height, const GlyphSet& glyphs, const SceneSpec& spec);

/// star(theta) * exp(-(rho/R)^2 gamma), star = 1 on even angular sectors,
/// centre (width/2, height/2), R = min(width, height)/2.
SceneImage siemens_star(std::size_t width, std::size_t height, int spokes, double gamma);

/// Dispatches on spec.kind. Glyph scenes are redrawn (up to 100 times)
/// until they satisfy sparsity_max; siemens scenes ignore it.
SceneImage generate_scene(std::size_t width, std::size_t height, const SceneSpec& spec,
                          const GlyphSet* glyphs = nullptr);

}  // namespace spi::scenes
