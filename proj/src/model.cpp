#include "spi/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spi/error.hpp"

namespace spi {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::BadParam: return "BadParam";
        case ErrorCode::BalanceUnachievable: return "BalanceUnachievable";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::BlockMismatch: return "BlockMismatch";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::UnsupportedType: return "UnsupportedType";
        case ErrorCode::SparsityUnreachable: return "SparsityUnreachable";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

SceneImage::SceneImage(std::size_t width, std::size_t height, double fill)
    : SceneImage(width, height, std::vector<double>(width * height, fill)) {}

SceneImage::SceneImage(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width == 0 || height == 0) throw Error(ErrorCode::BadParam, "image must be at least 1x1");
    if (data_.size() != width * height)
        throw Error(ErrorCode::DimensionMismatch, "image data length does not match width*height");
    for (double v : data_)
        if (!std::isfinite(v)) throw Error(ErrorCode::BadParam, "image contains non-finite values");
}

double SceneImage::support_fraction() const {
    if (data_.empty()) return 0.0;
    auto nz = std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; });
    return static_cast<double>(nz) / static_cast<double>(data_.size());
}

double SceneImage::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

std::vector<MapViolation> validate_map(std::size_t width, std::size_t height,
                                       std::span<const std::uint32_t> labels,
                                       std::uint32_t region_count) {
    std::vector<MapViolation> out;
    if (width == 0 || height == 0) {
        out.push_back({MapViolation::Kind::EmptyRaster, 0, "raster must be at least 1x1"});
        return out;
    }
    if (labels.size() != width * height) {
        out.push_back({MapViolation::Kind::SizeMismatch, labels.size(),
                       "label count " + std::to_string(labels.size()) + " != width*height"});
        return out;
    }
    std::vector<bool> used(region_count, false);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        if (labels[p] >= region_count) {
            out.push_back({MapViolation::Kind::LabelOutOfRange, p,
                           "pixel " + std::to_string(p) + " has label " + std::to_string(labels[p])});
        } else {
            used[labels[p]] = true;
        }
    }
    for (std::uint32_t r = 0; r < region_count; ++r)
        if (!used[r]) out.push_back({MapViolation::Kind::UnusedId, r, "id " + std::to_string(r) + " unused"});
    return out;
}

ImageMap::ImageMap(std::size_t width, std::size_t height, std::vector<std::uint32_t> labels,
                   std::uint32_t region_count)
    : width_(width), height_(height), labels_(std::move(labels)), region_count_(region_count) {
    auto violations = validate_map(width_, height_, labels_, region_count_);
    if (!violations.empty())
        throw Error(ErrorCode::BadParam, "invalid image map: " + violations.front().message);
}

std::vector<MapViolation> validate_map(const ImageMap& map) {
    return validate_map(map.width(), map.height(), map.labels(), map.region_count());
}

std::vector<std::size_t> region_sizes(const ImageMap& map) {
    std::vector<std::size_t> sizes(map.region_count(), 0);
    for (auto l : map.labels()) ++sizes[l];
    return sizes;
}

static void check_same_raster(const SceneImage& img, const ImageMap& map) {
    if (img.width() != map.width() || img.height() != map.height())
        throw Error(ErrorCode::DimensionMismatch, "image and map dimensions differ");
}

std::vector<double> region_sums_of_image(const SceneImage& img, const ImageMap& map) {
    check_same_raster(img, map);
    std::vector<double> sums(map.region_count(), 0.0);
    auto labels = map.labels();
    for (std::size_t p = 0; p < labels.size(); ++p) sums[labels[p]] += img[p];
    return sums;
}

std::vector<double> region_means_of_image(const SceneImage& img, const ImageMap& map) {
    auto sums = region_sums_of_image(img, map);
    auto sizes = region_sizes(map);
    for (std::size_t r = 0; r < sums.size(); ++r) sums[r] /= static_cast<double>(sizes[r]);
    return sums;
}

std::size_t MapStack::total_regions() const {
    std::size_t n = 0;
    for (const auto& m : maps) n += m.region_count();
    return n;
}

void MapStack::check_consistent() const {
    for (const auto& m : maps)
        if (m.width() != width() || m.height() != height())
            throw Error(ErrorCode::DimensionMismatch, "maps in a stack must share dimensions");
}

LookupMatrix::LookupMatrix(std::uint32_t size, std::vector<std::uint8_t> entries)
    : size_(size), entries_(std::move(entries)) {
    if (entries_.size() != static_cast<std::size_t>(size_) * size_)
        throw Error(ErrorCode::DimensionMismatch, "lookup entries must be R*R");
    for (auto e : entries_)
        if (e > 1) throw Error(ErrorCode::BadParam, "lookup entries must be 0 or 1");
}

std::size_t LookupMatrix::row_sum(std::size_t k) const {
    auto r = row(k);
    return static_cast<std::size_t>(std::count(r.begin(), r.end(), std::uint8_t{1}));
}

std::string_view to_string(MeasurementMode mode) {
    return mode == MeasurementMode::Raw ? "raw" : "complementary";
}

MeasurementMode parse_measurement_mode(std::string_view text) {
    if (text == "raw") return MeasurementMode::Raw;
    if (text == "complementary") return MeasurementMode::Complementary;
    throw Error(ErrorCode::BadParam, "unknown measurement mode '" + std::string(text) + "'");
}

std::size_t MeasurementSet::block_size(std::size_t map) const {
    std::size_t end = map + 1 < map_offsets.size() ? map_offsets[map + 1] : values.size();
    return end - map_offsets[map];
}

double RegionStats::max_abs_mean() const {
    double m = 0.0;
    for (const auto& pm : maps)
        for (double v : pm.means) m = std::max(m, std::abs(v));
    return m;
}

RegionStats region_stats_of_image(const SceneImage& img, const MapStack& stack) {
    RegionStats stats;
    for (const auto& map : stack.maps) {
        RegionStats::PerMap pm;
        pm.sums = region_sums_of_image(img, map);
        pm.sizes = region_sizes(map);
        pm.means.resize(pm.sums.size());
        for (std::size_t r = 0; r < pm.sums.size(); ++r)
            pm.means[r] = pm.sums[r] / static_cast<double>(pm.sizes[r]);
        stats.maps.push_back(std::move(pm));
    }
    return stats;
}

std::size_t PipelineConfig::nominal_pattern_count() const {
    std::size_t n = 0;
    for (const auto& p : maps) n += p.levels;
    return mode == MeasurementMode::Complementary ? 2 * n : n;
}

double PipelineConfig::compression_ratio() const {
    return spi::compression_ratio(nominal_pattern_count(), width, height);
}

double PipelineConfig::frame_rate_hz() const { return spi::frame_rate_hz(dmd_rate_hz, nominal_pattern_count()); }

double compression_ratio(std::size_t pattern_count_displayed, std::size_t width, std::size_t height) {
    return static_cast<double>(pattern_count_displayed) / static_cast<double>(width * height);
}

double frame_rate_hz(double dmd_rate_hz, std::size_t pattern_count_displayed) {
    if (pattern_count_displayed == 0) throw Error(ErrorCode::BadParam, "no patterns displayed");
    return dmd_rate_hz / static_cast<double>(pattern_count_displayed);
}

static std::vector<FieldParams> log_spaced(double lo, double hi, std::size_t n, std::uint32_t q) {
    std::vector<FieldParams> out;
    for (std::size_t i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back({std::round(lo * std::pow(hi / lo, t)), q});
    }
    return out;
}

PipelineConfig PipelineConfig::desk_default() {
    PipelineConfig c;
    c.width = 256;
    c.height = 192;
    for (double l : {4.0, 5.0, 7.0, 9.0, 12.0, 16.0, 21.0, 28.0, 37.0, 48.0}) c.maps.push_back({l, 20});
    c.lookup_cond_max = 1e2;
    return c;
}

PipelineConfig PipelineConfig::full_default() {
    PipelineConfig c;
    c.width = 1024;
    c.height = 768;
    c.maps = log_spaced(4.0, 192.0, 26, 124);
    c.lookup_cond_max = 1e4;
    return c;
}

}  // namespace spi
