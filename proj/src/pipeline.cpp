#include "spi/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "spi/enhance.hpp"
#include "spi/error.hpp"
#include "spi/io.hpp"
#include "spi/mapgen.hpp"
#include "spi/metrics.hpp"
#include "spi/patterns.hpp"
#include "spi/recon.hpp"
#include "spi/sim.hpp"

namespace spi::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < jobs; ++t)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::string two_digits(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", i);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
}

std::string kind_name(scenes::SceneKind k) {
    switch (k) {
        case scenes::SceneKind::LineArt: return "lineart";
        case scenes::SceneKind::Glyphs: return "glyphs";
        case scenes::SceneKind::Siemens: return "siemens";
    }
    return "unknown";
}

scenes::SceneSpec parse_scene_spec(const json& j, std::uint64_t default_seed) {
    scenes::SceneSpec spec;
    spec.kind = scenes::parse_scene_kind(j.value("kind", std::string("lineart")));
    spec.seed = j.value("seed", default_seed);
    spec.sparsity_max = j.value("sparsity_max", spec.sparsity_max);
    spec.siemens.spokes = j.value("spokes", spec.siemens.spokes);
    spec.siemens.gamma = j.value("gamma", spec.siemens.gamma);
    spec.glyphs.min_count = j.value("min_glyphs", spec.glyphs.min_count);
    spec.glyphs.max_count = j.value("max_glyphs", spec.glyphs.max_count);
    spec.lineart.max_strokes = j.value("max_strokes", spec.lineart.max_strokes);
    return spec;
}

SceneImage load_scene_file(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::Io, "scene file not found: " + path.string());
    return path.extension() == ".pgm" ? io::read_pgm(path) : io::read_spif(path);
}

std::string substitute(std::string text, const std::string& key, const std::string& value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
        text.replace(pos, key.size(), value);
    return text;
}

// SSIM is undefined below an 11x11 window; reported as NaN (null/empty).
metrics::MetricResult evaluate_any(const SceneImage& ref, const SceneImage& test) {
    if (std::min(ref.width(), ref.height()) >= 11) return metrics::evaluate(ref, test);
    return {metrics::psnr(ref, test), std::numeric_limits<double>::quiet_NaN()};
}

std::string format_ssim(double ssim) {
    if (std::isnan(ssim)) return "";
    std::ostringstream s;
    s.precision(17);
    s << ssim;
    return s.str();
}

enhance::EnhanceParams enhance_params(const PipelineConfig& p) {
    enhance::EnhanceParams e;
    e.tau_rel = p.tau_rel;
    e.tau_abs = p.tau_abs;
    e.max_iterations = p.iterations;
    e.stop_tol = p.stop_tol;
    e.clamp_nonneg = p.clamp_nonneg;
    e.clamp_unit = p.clamp_unit;
    return e;
}

std::shared_ptr<const MapStack> make_stack(const RunConfig& config) {
    const auto& p = config.params;
    if (config.map_files.empty()) return std::make_shared<const MapStack>(mapgen::build_map_stack(p.width, p.height, p.maps, p.seed_maps));
    MapStack stack;
    stack.seed = p.seed_maps;
    for (const auto& f : config.map_files) stack.maps.push_back(io::read_spim(f));
    stack.check_consistent();
    if (stack.width() != p.width || stack.height() != p.height)
        throw Error(ErrorCode::DimensionMismatch, "map files do not match configured width/height");
    return std::make_shared<const MapStack>(std::move(stack));
}

patterns::LookupOptions lookup_options(const PipelineConfig& p) {
    patterns::LookupOptions o;
    o.cond_max = p.lookup_cond_max;
    return o;
}

std::shared_ptr<const patterns::PatternSet> make_patterns(const RunConfig& config, std::shared_ptr<const MapStack> stack) {
    const auto& p = config.params;
    if (config.lookup_file)
        return std::make_shared<const patterns::PatternSet>(
            patterns::assemble_pattern_set(std::move(stack), io::read_spil(*config.lookup_file), p.beta));
    return std::make_shared<const patterns::PatternSet>(patterns::build_pattern_set(std::move(stack), p.beta, p.seed_patterns, lookup_options(p)));
}

scenes::GlyphSet make_glyphs(const RunConfig& config) {
    if (config.glyphs_idx) return scenes::load_idx_glyphs(*config.glyphs_idx);
    return scenes::synthetic_digit_glyphs(config.synthetic_glyph_count, config.params.seed_scene);
}

bool needs_glyphs(const RunConfig& config) {
    return std::any_of(config.scenes.begin(), config.scenes.end(), [](const SceneEntry& s) {
        return !s.file && s.spec.kind == scenes::SceneKind::Glyphs;
    });
}

SceneImage make_scene(const SceneEntry& entry, const RunConfig& config, const scenes::GlyphSet* glyphs) {
    if (entry.file) {
        auto img = load_scene_file(*entry.file);
        if (img.width() != config.params.width || img.height() != config.params.height)
            throw Error(ErrorCode::DimensionMismatch, "scene " + entry.id + " does not match configured size");
        return img;
    }
    return scenes::generate_scene(config.params.width, config.params.height, entry.spec, glyphs);
}

MeasurementSet simulate(const SceneImage& scene, const patterns::PatternSet& set, const PipelineConfig& p,
                        std::uint64_t noise_seed) {
    auto ms = sim::forward_measure(scene, set, p.mode);
    ms = sim::add_noise(ms, {p.snr_db, noise_seed});
    if (p.daq_bits) ms = sim::daq_quantize(ms, *p.daq_bits);
    return ms;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
    RunConfig c;
    auto preset = j.value("preset", std::string("desk"));
    if (preset == "desk") c.params = PipelineConfig::desk_default();
    else if (preset == "full") c.params = PipelineConfig::full_default();
    else throw Error(ErrorCode::BadParam, "unknown preset '" + preset + "'");

    auto& p = c.params;
    p.width = j.value("width", p.width);
    p.height = j.value("height", p.height);
    if (j.contains("maps")) {
        p.maps.clear();
        for (const auto& m : j.at("maps")) p.maps.push_back({m.at("l").get<double>(), m.at("q").get<std::uint32_t>()});
    }
    p.beta = j.value("beta", p.beta);
    p.lookup_cond_max = j.value("lookup_cond_max", p.lookup_cond_max);
    if (j.contains("mode")) p.mode = parse_measurement_mode(j.at("mode").get<std::string>());
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) p.snr_db = j.at("snr_db").get<double>();
    if (j.contains("daq_bits") && !j.at("daq_bits").is_null()) p.daq_bits = j.at("daq_bits").get<int>();
    p.tau_rel = j.value("tau_rel", p.tau_rel);
    p.tau_abs = j.value("tau_abs", p.tau_abs);
    p.iterations = j.value("iters", p.iterations);
    p.stop_tol = j.value("stop_tol", p.stop_tol);
    p.clamp_unit = j.value("clamp01", p.clamp_unit);
    p.clamp_nonneg = j.value("clamp_nonneg", p.clamp_nonneg);
    p.dmd_rate_hz = j.value("dmd_rate_hz", p.dmd_rate_hz);
    if (j.contains("seeds")) {
        const auto& s = j.at("seeds");
        p.seed_maps = s.value("maps", p.seed_maps);
        p.seed_patterns = s.value("patterns", p.seed_patterns);
        p.seed_scene = s.value("scene", p.seed_scene);
        p.seed_noise = s.value("noise", p.seed_noise);
    }
    if (j.contains("nn_command") && !j.at("nn_command").is_null()) c.nn_command = j.at("nn_command").get<std::string>();
    if (j.contains("map_files"))
        for (const auto& f : j.at("map_files")) c.map_files.push_back(resolve(f.get<std::string>(), base_dir));
    if (j.contains("lookup_file")) c.lookup_file = resolve(j.at("lookup_file").get<std::string>(), base_dir);
    if (j.contains("glyphs_idx")) c.glyphs_idx = resolve(j.at("glyphs_idx").get<std::string>(), base_dir);
    c.synthetic_glyph_count = j.value("synthetic_glyphs", c.synthetic_glyph_count);
    auto inverse = j.value("inverse", std::string("backproject"));
    if (inverse == "backproject") c.inverse = InverseKind::Backproject;
    else if (inverse == "tikhonov") c.inverse = InverseKind::Tikhonov;
    else throw Error(ErrorCode::BadParam, "unknown inverse '" + inverse + "'");
    c.tikhonov_alpha = j.value("tikhonov_alpha", c.tikhonov_alpha);

    if (j.contains("scenes")) {
        std::size_t i = 0;
        for (const auto& s : j.at("scenes")) {
            SceneEntry e;
            e.id = s.value("id", "scene" + two_digits(i));
            if (s.contains("file")) e.file = resolve(s.at("file").get<std::string>(), base_dir);
            else e.spec = parse_scene_spec(s, split_seed(p.seed_scene, i));
            c.scenes.push_back(std::move(e));
            ++i;
        }
    }
    if (j.contains("scene_batch")) {
        const auto& b = j.at("scene_batch");
        auto count = b.value("count", std::size_t{1});
        std::vector<std::string> kinds = b.value("kinds", std::vector<std::string>{"lineart"});
        if (kinds.empty()) throw Error(ErrorCode::BadParam, "scene_batch.kinds is empty");
        for (std::size_t i = 0; i < count; ++i) {
            SceneEntry e;
            std::size_t index = c.scenes.size();
            e.id = "scene" + two_digits(index);
            json s = b;
            s["kind"] = kinds[i % kinds.size()];
            s.erase("seed");
            e.spec = parse_scene_spec(s, split_seed(p.seed_scene, index));
            c.scenes.push_back(std::move(e));
        }
    }
    if (c.scenes.empty()) {
        SceneEntry e;
        e.id = "scene00";
        e.spec.seed = split_seed(p.seed_scene, 0);
        c.scenes.push_back(e);
    }
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadParam, std::string("invalid config JSON: ") + e.what());
    }
    return from_json(j, path.parent_path());
}

ordered_json RunConfig::to_json() const {
    const auto& p = params;
    ordered_json j;
    j["width"] = p.width;
    j["height"] = p.height;
    auto maps = ordered_json::array();
    for (const auto& m : p.maps) maps.push_back({{"l", m.characteristic_size}, {"q", m.levels}});
    j["maps"] = maps;
    j["beta"] = p.beta;
    j["lookup_cond_max"] = p.lookup_cond_max;
    j["mode"] = std::string(spi::to_string(p.mode));
    j["snr_db"] = p.snr_db ? ordered_json(*p.snr_db) : ordered_json(nullptr);
    j["daq_bits"] = p.daq_bits ? ordered_json(*p.daq_bits) : ordered_json(nullptr);
    j["tau_rel"] = p.tau_rel;
    j["tau_abs"] = p.tau_abs;
    j["iters"] = p.iterations;
    j["stop_tol"] = p.stop_tol;
    j["clamp01"] = p.clamp_unit;
    j["clamp_nonneg"] = p.clamp_nonneg;
    j["seeds"] = {{"maps", p.seed_maps}, {"patterns", p.seed_patterns}, {"scene", p.seed_scene}, {"noise", p.seed_noise}};
    j["dmd_rate_hz"] = p.dmd_rate_hz;
    j["nn_command"] = nn_command ? ordered_json(*nn_command) : ordered_json(nullptr);
    j["inverse"] = inverse == InverseKind::Backproject ? "backproject" : "tikhonov";
    j["tikhonov_alpha"] = tikhonov_alpha;
    if (!map_files.empty()) {
        auto files = ordered_json::array();
        for (const auto& f : map_files) files.push_back(f.string());
        j["map_files"] = files;
    }
    if (lookup_file) j["lookup_file"] = lookup_file->string();
    auto sc = ordered_json::array();
    for (const auto& s : scenes) {
        ordered_json e;
        e["id"] = s.id;
        if (s.file) {
            e["file"] = s.file->string();
        } else {
            e["kind"] = kind_name(s.spec.kind);
            e["seed"] = s.spec.seed;
            e["sparsity_max"] = s.spec.sparsity_max;
        }
        sc.push_back(e);
    }
    j["scenes"] = sc;
    return j;
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["config"] = config;
    j["provenance"] = {{"snr_db", snr_db ? ordered_json(*snr_db) : ordered_json(nullptr)},
                       {"pattern_count_displayed", pattern_count_displayed},
                       {"compression_ratio", compression_ratio},
                       {"frame_rate_hz", frame_rate_hz}};
    auto t = ordered_json::array();
    for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}, {"pixels_per_second", s.pixels_per_second}});
    j["timings"] = t;
    j["total_seconds"] = total_seconds;
    auto rows_json = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json row = metric_json(r.psnr_db, r.ssim);
        row["scene"] = r.scene_id;
        row["method"] = r.method;
        rows_json.push_back(row);
    }
    j["metrics"] = rows_json;
    j["iterations_used"] = iterations_used;
    auto a = ordered_json::array();
    for (const auto& p : artifacts) a.push_back(p.string());
    j["artifacts"] = a;
    return j;
}

RunManifest run_pipeline(const RunConfig& config, const fs::path& out_dir, unsigned jobs) {
    const auto t_total = Clock::now();
    const auto& p = config.params;
    const double pixels = static_cast<double>(p.width * p.height);
    const std::size_t n_scenes = config.scenes.size();

    RunManifest manifest;
    manifest.config = config.to_json();
    manifest.snr_db = p.snr_db;
    auto timed = [&](const std::string& stage, auto&& fn) {
        auto t0 = Clock::now();
        in_stage(stage, fn);
        double s = std::max(seconds_since(t0), 1e-9);
        manifest.timings.push_back({stage, s, pixels * static_cast<double>(n_scenes) / s});
    };
    in_stage("setup", [&] { fs::create_directories(out_dir); });

    std::shared_ptr<const MapStack> stack;
    timed("genmaps", [&] {
        stack = make_stack(config);
        for (std::size_t m = 0; m < stack->maps.size(); ++m) {
            auto path = out_dir / ("map_" + two_digits(m) + ".spim");
            io::write_spim(path, stack->maps[m]);
            manifest.artifacts.push_back(path);
        }
    });

    std::shared_ptr<const patterns::PatternSet> set;
    timed("patterns", [&] {
        set = make_patterns(config, stack);
        io::write_spil(out_dir / "lookups.spil", set->lookups);
        write_text(out_dir / "balance.csv", patterns::balance_csv(*set));
        manifest.artifacts.push_back(out_dir / "lookups.spil");
        manifest.artifacts.push_back(out_dir / "balance.csv");
    });

    std::vector<SceneImage> truth(n_scenes);
    timed("scene", [&] {
        std::optional<scenes::GlyphSet> glyphs;
        if (needs_glyphs(config)) glyphs = make_glyphs(config);
        parallel_for(n_scenes, jobs, [&](std::size_t i) {
            const auto& entry = config.scenes[i];
            try {
                truth[i] = make_scene(entry, config, glyphs ? &*glyphs : nullptr);
            } catch (const std::exception& e) {
                throw StageError("scene", entry.id + ": " + e.what());
            }
            io::write_spif(out_dir / (entry.id + ".spif"), truth[i]);
            io::write_pgm(out_dir / (entry.id + ".pgm"), truth[i]);
        });
        for (const auto& e : config.scenes) manifest.artifacts.push_back(out_dir / (e.id + ".spif"));
    });

    std::vector<MeasurementSet> measurements(n_scenes);
    timed("simulate", [&] {
        parallel_for(n_scenes, jobs, [&](std::size_t i) {
            measurements[i] = simulate(truth[i], *set, p, split_seed(p.seed_noise, i));
            const auto& id = config.scenes[i].id;
            io::write_spiv(out_dir / (id + ".spiv"), measurements[i]);
            write_text(out_dir / (id + ".spiv.json"), sim::sidecar_json(measurements[i]));
        });
        for (const auto& e : config.scenes) manifest.artifacts.push_back(out_dir / (e.id + ".spiv"));
    });
    manifest.pattern_count_displayed = measurements.front().pattern_count_displayed();
    manifest.compression_ratio = compression_ratio(manifest.pattern_count_displayed, p.width, p.height);
    manifest.frame_rate_hz = frame_rate_hz(p.dmd_rate_hz, manifest.pattern_count_displayed);

    std::vector<SceneImage> initial(n_scenes);
    std::vector<RegionStats> stats(n_scenes);
    timed("recon", [&] {
        auto op = config.inverse == InverseKind::Tikhonov ? recon::InverseOperator::tikhonov(set, config.tikhonov_alpha)
                                                          : recon::InverseOperator::backproject(set);
        recon::RegionSolver solver(*set);
        parallel_for(n_scenes, jobs, [&](std::size_t i) {
            initial[i] = op.apply(measurements[i]);
            stats[i] = solver.solve(recon::pattern_projections(measurements[i], *set));
            io::write_spif(out_dir / (config.scenes[i].id + "_initial.spif"), initial[i]);
        });
        for (const auto& e : config.scenes) manifest.artifacts.push_back(out_dir / (e.id + "_initial.spif"));
    });

    std::vector<SceneImage> iterative(n_scenes);
    manifest.iterations_used.assign(n_scenes, 0);
    timed("enhance", [&] {
        auto params = enhance_params(p);
        parallel_for(n_scenes, jobs, [&](std::size_t i) {
            auto result = enhance::enhance(initial[i], stats[i], *stack, params);
            iterative[i] = std::move(result.image);
            manifest.iterations_used[i] = result.report.iterations;
            const auto& id = config.scenes[i].id;
            io::write_spif(out_dir / (id + "_iterative.spif"), iterative[i]);
            write_text(out_dir / (id + "_enhance.json"), result.report.to_json());
        });
        for (const auto& e : config.scenes) manifest.artifacts.push_back(out_dir / (e.id + "_iterative.spif"));
    });

    std::vector<std::optional<SceneImage>> nn(n_scenes);
    if (config.nn_command) {
        timed("nn", [&] {
            for (std::size_t i = 0; i < n_scenes; ++i) {
                const auto& id = config.scenes[i].id;
                auto in = out_dir / (id + "_initial.spif");
                auto out = out_dir / (id + "_nn.spif");
                auto cmd = substitute(substitute(*config.nn_command, "{in}", in.string()), "{out}", out.string());
                if (std::system(cmd.c_str()) != 0) throw Error(ErrorCode::Io, "enhancer command failed: " + cmd);
                nn[i] = io::read_spif(out);
                manifest.artifacts.push_back(out);
            }
        });
    }

    timed("metrics", [&] {
        std::vector<std::vector<MetricRow>> per_scene(n_scenes);
        parallel_for(n_scenes, jobs, [&](std::size_t i) {
            const auto& id = config.scenes[i].id;
            auto add = [&](const std::string& method, const SceneImage& img) {
                auto r = evaluate_any(truth[i], img);
                per_scene[i].push_back({id, method, r.psnr_db, r.ssim});
            };
            add("initial", initial[i]);
            add("iterative", iterative[i]);
            if (nn[i]) add("nn", *nn[i]);
        });
        for (auto& rows : per_scene) manifest.rows.insert(manifest.rows.end(), rows.begin(), rows.end());
        write_text(out_dir / "metrics.csv", metrics_csv(manifest.rows));
        manifest.artifacts.push_back(out_dir / "metrics.csv");
    });

    manifest.total_seconds = seconds_since(t_total);
    in_stage("manifest", [&] {
        auto timing = ordered_json::array();
        for (const auto& s : manifest.timings)
            timing.push_back({{"stage", s.stage}, {"seconds", s.seconds}, {"pixels_per_second", s.pixels_per_second}});
        write_text(out_dir / "timing.json", timing.dump(2));
        manifest.artifacts.push_back(out_dir / "timing.json");
        manifest.artifacts.push_back(out_dir / "manifest.json");
        write_text(out_dir / "manifest.json", manifest.to_json().dump(2));
    });
    return manifest;
}

ordered_json BenchReport::to_json() const {
    ordered_json j;
    auto stages = ordered_json::array();
    for (const auto& s : median)
        stages.push_back({{"stage", s.stage}, {"seconds", s.seconds}, {"pixels_per_second", s.pixels_per_second}});
    j["stages"] = stages;
    j["repeats"] = repeats;
    j["pattern_count_displayed"] = pattern_count_displayed;
    j["theoretical_frame_rate_hz"] = theoretical_frame_rate_hz;
    j["recon_seconds_per_frame"] = recon_seconds_per_frame;
    return j;
}

BenchReport run_bench(const RunConfig& config, int repeats) {
    if (repeats < 3) throw Error(ErrorCode::BadParam, "bench needs at least 3 repeats");
    const auto& p = config.params;
    const double pixels = static_cast<double>(p.width * p.height);
    const std::vector<std::string> names{"genmaps", "patterns", "scene", "simulate", "recon", "enhance_sweep", "enhance"};
    std::vector<std::vector<double>> samples(names.size());

    BenchReport report;
    report.repeats = repeats;
    std::optional<scenes::GlyphSet> glyphs;
    if (needs_glyphs(config)) glyphs = make_glyphs(config);

    for (int rep = 0; rep < repeats; ++rep) {
        std::size_t s = 0;
        auto time = [&](auto&& fn) {
            auto t0 = Clock::now();
            auto result = fn();
            samples[s++].push_back(seconds_since(t0));
            return result;
        };
        auto stack = time([&] { return in_stage("genmaps", [&] { return make_stack(config); }); });
        auto set = time([&] { return in_stage("patterns", [&] { return make_patterns(config, stack); }); });
        auto scene = time([&] {
            return in_stage("scene", [&] { return make_scene(config.scenes.front(), config, glyphs ? &*glyphs : nullptr); });
        });
        auto ms = time([&] { return in_stage("simulate", [&] { return simulate(scene, *set, p, p.seed_noise); }); });
        auto op = recon::InverseOperator::backproject(set);
        recon::RegionSolver solver(*set);
        struct Initial {
            SceneImage x0;
            RegionStats stats;
        };
        auto init = time([&] {
            return in_stage("recon", [&] {
                auto y = recon::pattern_projections(ms, *set);
                auto st = solver.solve(y);
                return Initial{recon::backproject_means(st, *stack), st};
            });
        });
        auto params = enhance_params(p);
        time([&] {
            return in_stage("enhance", [&] {
                auto one = params;
                one.max_iterations = 1;
                return enhance::enhance(init.x0, init.stats, *stack, one);
            });
        });
        time([&] { return in_stage("enhance", [&] { return enhance::enhance(init.x0, init.stats, *stack, params); }); });
        report.pattern_count_displayed = ms.pattern_count_displayed();
    }

    for (std::size_t s = 0; s < names.size(); ++s) {
        auto v = samples[s];
        std::sort(v.begin(), v.end());
        double med = v[v.size() / 2];
        report.median.push_back({names[s], med, pixels / std::max(med, 1e-12)});
    }
    report.theoretical_frame_rate_hz = frame_rate_hz(p.dmd_rate_hz, report.pattern_count_displayed);
    report.recon_seconds_per_frame = report.median[4].seconds + report.median[5].seconds;
    return report;
}

MontageResult make_montage(const SceneImage& ref, const std::vector<SceneImage>& images,
                           const std::vector<std::string>& labels) {
    if (images.empty()) throw Error(ErrorCode::BadParam, "montage needs at least one image");
    const std::size_t w = images.front().width(), h = images.front().height();
    for (const auto& img : images)
        if (img.width() != w || img.height() != h) throw Error(ErrorCode::DimensionMismatch, "montage images differ in size");
    if (ref.width() != w || ref.height() != h) throw Error(ErrorCode::DimensionMismatch, "reference differs in size");

    constexpr std::size_t kGap = 4;
    const std::size_t total_w = images.size() * w + (images.size() - 1) * kGap;
    MontageResult out{SceneImage(total_w, h, 1.0), {}};
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::size_t ox = i * (w + kGap);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) out.montage.at(ox + x, y) = images[i].at(x, y);
        auto r = evaluate_any(ref, images[i]);
        out.rows.push_back({i < labels.size() ? labels[i] : "image" + std::to_string(i), "", r.psnr_db, r.ssim});
    }
    return out;
}

std::string format_psnr(double psnr_db) {
    if (std::isinf(psnr_db)) return "inf";
    std::ostringstream s;
    s.precision(17);
    s << psnr_db;
    return s.str();
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "scene,method,psnr_db,ssim\n";
    for (const auto& r : rows) out << r.scene_id << ',' << r.method << ',' << format_psnr(r.psnr_db) << ',' << format_ssim(r.ssim) << '\n';
    return out.str();
}

ordered_json metric_json(double psnr_db, double ssim) {
    ordered_json j;
    if (std::isinf(psnr_db)) j["psnr_db"] = "inf";
    else j["psnr_db"] = psnr_db;
    if (std::isnan(ssim)) j["ssim"] = nullptr;
    else j["ssim"] = ssim;
    return j;
}

}  // namespace spi::pipeline
