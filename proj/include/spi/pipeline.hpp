#pragma once

// End-to-end orchestration behind the `spi` command line tool.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spi/model.hpp"
#include "spi/scenes.hpp"

namespace spi::pipeline {

/// Failure inside a named pipeline stage; the CLI maps it to exit code 2.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct SceneEntry {
    std::string id;
    std::optional<std::filesystem::path> file;  // SPIF or PGM; otherwise generated from `spec`
    scenes::SceneSpec spec;
};

enum class InverseKind { Backproject, Tikhonov };

struct RunConfig {
    PipelineConfig params;
    std::vector<SceneEntry> scenes;
    std::vector<std::filesystem::path> map_files;       // overrides map generation
    std::optional<std::filesystem::path> lookup_file;   // overrides look-up generation
    std::optional<std::filesystem::path> glyphs_idx;    // glyph source for glyph scenes
    std::size_t synthetic_glyph_count = 100;
    std::optional<std::string> nn_command;              // "{in}" / "{out}" are substituted
    InverseKind inverse = InverseKind::Backproject;
    double tikhonov_alpha = 1e-4;

    /// Relative paths are resolved against base_dir.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

struct StageTiming {
    std::string stage;
    double seconds;
    double pixels_per_second;
};

struct MetricRow {
    std::string scene_id;
    std::string method;  // initial | iterative | nn
    double psnr_db;
    double ssim;
};

struct RunManifest {
    nlohmann::ordered_json config;
    std::vector<std::filesystem::path> artifacts;
    std::vector<StageTiming> timings;
    double total_seconds = 0.0;
    std::vector<MetricRow> rows;
    std::size_t pattern_count_displayed = 0;
    double compression_ratio = 0.0;
    double frame_rate_hz = 0.0;
    std::optional<double> snr_db;
    std::vector<int> iterations_used;  // per scene

    nlohmann::ordered_json to_json() const;
};

/// Runs maps -> patterns -> scenes -> simulate -> recon -> enhance [-> nn]
/// -> metrics, writing every artifact plus manifest.json, metrics.csv and
/// timing.json under out_dir. Scenes fan out over `jobs` threads
/// (0 = hardware concurrency). Throws StageError.
RunManifest run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir, unsigned jobs = 0);

struct BenchReport {
    std::vector<StageTiming> median;  // per stage, over repeats
    std::size_t pattern_count_displayed = 0;
    double theoretical_frame_rate_hz = 0.0;
    double recon_seconds_per_frame = 0.0;  // initial + one enhancement sweep
    int repeats = 0;

    nlohmann::ordered_json to_json() const;
};

/// Requires repeats >= 3. Uses the first configured scene (or a default
/// line-art scene).
BenchReport run_bench(const RunConfig& config, int repeats);

struct MontageResult {
    SceneImage montage;
    std::vector<MetricRow> rows;  // scene_id = image label, method empty
};

/// Horizontal concatenation with 4-pixel separators (value 1.0) and
/// per-image PSNR/SSIM against ref.
MontageResult make_montage(const SceneImage& ref, const std::vector<SceneImage>& images,
                           const std::vector<std::string>& labels);

std::string metrics_csv(const std::vector<MetricRow>& rows);
std::string format_psnr(double psnr_db);
nlohmann::ordered_json metric_json(double psnr_db, double ssim);

}  // namespace spi::pipeline
