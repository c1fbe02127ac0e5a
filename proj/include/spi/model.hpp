#pragma once

// Shared data model for the single-pixel imaging pipeline: scenes, image
// maps, look-up matrices, measurements and recovered region statistics.
// All raster data is row-major with the origin at the top-left pixel.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spi {

/// Real-valued intensity raster, nominally in [0, 1].
class SceneImage {
public:
    SceneImage() = default;
    SceneImage(std::size_t width, std::size_t height, double fill = 0.0);
    SceneImage(std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    double at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// Fraction of pixels with a non-zero value.
    double support_fraction() const;
    double sum() const;

    friend bool operator==(const SceneImage&, const SceneImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

struct MapViolation {
    enum class Kind { LabelOutOfRange, UnusedId, SizeMismatch, EmptyRaster };
    Kind kind;
    std::size_t index;  // pixel index for LabelOutOfRange, region id for UnusedId
    std::string message;
};

/// Checks a raw label raster. An empty result means the labels form a valid
/// partition with every id in [0, region_count) used at least once.
std::vector<MapViolation> validate_map(std::size_t width, std::size_t height,
                                       std::span<const std::uint32_t> labels,
                                       std::uint32_t region_count);

/// Partition of the pixel grid into labelled regions. Regions need not be
/// connected. Construction rejects any labelling that validate_map flags.
class ImageMap {
public:
    ImageMap() = default;
    ImageMap(std::size_t width, std::size_t height, std::vector<std::uint32_t> labels,
             std::uint32_t region_count);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::uint32_t region_count() const noexcept { return region_count_; }
    std::uint32_t label(std::size_t i) const { return labels_[i]; }
    std::span<const std::uint32_t> labels() const noexcept { return labels_; }

    friend bool operator==(const ImageMap&, const ImageMap&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint32_t> labels_;
    std::uint32_t region_count_ = 0;
};

/// Always empty for a constructed ImageMap; kept for symmetry with the raw form.
std::vector<MapViolation> validate_map(const ImageMap& map);

std::vector<std::size_t> region_sizes(const ImageMap& map);
std::vector<double> region_sums_of_image(const SceneImage& img, const ImageMap& map);
std::vector<double> region_means_of_image(const SceneImage& img, const ImageMap& map);

struct FieldParams {
    double characteristic_size = 8.0;  // l, pixels
    std::uint32_t levels = 16;         // Q
};

struct MapStack {
    std::vector<ImageMap> maps;
    std::uint64_t seed = 0;
    std::vector<FieldParams> params;

    std::size_t width() const { return maps.empty() ? 0 : maps.front().width(); }
    std::size_t height() const { return maps.empty() ? 0 : maps.front().height(); }
    std::size_t total_regions() const;
    /// Throws DimensionMismatch unless every map shares one raster size.
    void check_consistent() const;
};

/// Binary R x R matrix; row k selects the regions lit by pattern k.
class LookupMatrix {
public:
    LookupMatrix() = default;
    LookupMatrix(std::uint32_t size, std::vector<std::uint8_t> entries);

    std::uint32_t size() const noexcept { return size_; }
    std::uint8_t operator()(std::size_t row, std::size_t col) const { return entries_[row * size_ + col]; }
    std::span<const std::uint8_t> row(std::size_t k) const { return {entries_.data() + k * size_, size_}; }
    std::span<const std::uint8_t> entries() const noexcept { return entries_; }
    std::size_t row_sum(std::size_t k) const;

    friend bool operator==(const LookupMatrix&, const LookupMatrix&) = default;

private:
    std::uint32_t size_ = 0;
    std::vector<std::uint8_t> entries_;
};

enum class MeasurementMode : std::uint8_t { Raw = 0, Complementary = 1 };

std::string_view to_string(MeasurementMode mode);
MeasurementMode parse_measurement_mode(std::string_view text);

/// Detector readings in display order. Each map contributes one contiguous
/// block; in complementary mode a block holds interleaved (d+, d-) pairs.
struct MeasurementSet {
    std::vector<double> values;
    MeasurementMode mode = MeasurementMode::Raw;
    std::optional<double> snr_db;
    std::optional<int> daq_bits;
    std::optional<std::uint64_t> noise_seed;
    std::vector<std::uint32_t> map_offsets;

    std::size_t pattern_count_displayed() const noexcept { return values.size(); }
    std::size_t block_size(std::size_t map) const;
};

struct RegionStats {
    struct PerMap {
        std::vector<double> sums;
        std::vector<std::size_t> sizes;
        std::vector<double> means;
    };
    std::vector<PerMap> maps;

    double max_abs_mean() const;
};

RegionStats region_stats_of_image(const SceneImage& img, const MapStack& stack);

struct PipelineConfig {
    std::size_t width = 256;
    std::size_t height = 192;
    std::vector<FieldParams> maps;
    double beta = 0.05;
    double lookup_cond_max = 1e8;  // condition cap for look-up matrices; presets tighten it
    MeasurementMode mode = MeasurementMode::Raw;
    std::optional<double> snr_db;
    std::optional<int> daq_bits;
    double tau_rel = 0.02;
    double tau_abs = 0.0;
    int iterations = 5;
    double stop_tol = 1e-4;
    bool clamp_nonneg = true;
    bool clamp_unit = false;
    std::uint64_t seed_maps = 1;
    std::uint64_t seed_patterns = 2;
    std::uint64_t seed_scene = 3;
    std::uint64_t seed_noise = 4;
    double dmd_rate_hz = 22000.0;

    /// Upper bound on displayed patterns: sum of Q over maps, doubled in
    /// complementary mode. Actual counts can be lower after compaction.
    std::size_t nominal_pattern_count() const;
    double compression_ratio() const;
    double frame_rate_hz() const;

    static PipelineConfig desk_default();
    static PipelineConfig full_default();
};

double compression_ratio(std::size_t pattern_count_displayed, std::size_t width, std::size_t height);
double frame_rate_hz(double dmd_rate_hz, std::size_t pattern_count_displayed);

/// Seed for the m-th member of a family derived from one master seed.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return master ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace spi
