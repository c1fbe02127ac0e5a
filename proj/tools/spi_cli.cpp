// spi: command line front end for the single-pixel imaging pipeline.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "spi/enhance.hpp"
#include "spi/error.hpp"
#include "spi/io.hpp"
#include "spi/kernels.hpp"
#include "spi/mapgen.hpp"
#include "spi/metrics.hpp"
#include "spi/patterns.hpp"
#include "spi/pipeline.hpp"
#include "spi/recon.hpp"
#include "spi/scenes.hpp"
#include "spi/sim.hpp"

namespace fs = std::filesystem;
using namespace spi;

namespace {

std::vector<FieldParams> parse_map_params(const std::string& text) {
    // "l:q,l:q,..."
    std::vector<FieldParams> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::BadParam, "map spec '" + item + "' is not l:q");
        out.push_back({std::stod(item.substr(0, colon)), static_cast<std::uint32_t>(std::stoul(item.substr(colon + 1)))});
    }
    return out;
}

std::shared_ptr<const MapStack> load_stack(const std::vector<std::string>& files) {
    MapStack stack;
    for (const auto& f : files) stack.maps.push_back(io::read_spim(f));
    stack.check_consistent();
    return std::make_shared<const MapStack>(std::move(stack));
}

std::shared_ptr<const patterns::PatternSet> load_patterns(const std::vector<std::string>& maps, const std::string& lookups,
                                                          double beta) {
    return std::make_shared<const patterns::PatternSet>(
        patterns::assemble_pattern_set(load_stack(maps), io::read_spil(lookups), beta));
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-pixel imaging simulation and reconstruction"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Print the selected SIMD level");

    // genmaps
    auto* genmaps = app.add_subcommand("genmaps", "Generate image maps from quantized correlated noise");
    std::size_t gm_width = 256, gm_height = 192;
    std::string gm_maps, gm_out = "maps";
    std::uint64_t gm_seed = 1;
    std::string gm_preset;
    genmaps->add_option("--width", gm_width);
    genmaps->add_option("--height", gm_height);
    genmaps->add_option("--maps", gm_maps, "Comma-separated l:q pairs");
    genmaps->add_option("--preset", gm_preset, "desk or full")->check(CLI::IsMember({"desk", "full"}));
    genmaps->add_option("--seed", gm_seed);
    genmaps->add_option("-o,--out", gm_out, "Output directory");

    // patterns
    auto* pat = app.add_subcommand("patterns", "Build look-up matrices for a map stack");
    std::vector<std::string> pat_maps;
    double pat_beta = 0.05;
    patterns::LookupOptions pat_opts;
    pat_opts.cond_max = PipelineConfig::desk_default().lookup_cond_max;
    std::uint64_t pat_seed = 2;
    std::string pat_out = "lookups.spil", pat_csv;
    pat->add_option("--maps", pat_maps, "SPIM files in stack order")->required();
    pat->add_option("--beta", pat_beta);
    pat->add_option("--seed", pat_seed);
    pat->add_option("--cond-max", pat_opts.cond_max, "Condition cap for look-up matrices");
    pat->add_option("-o,--out", pat_out);
    pat->add_option("--balance-csv", pat_csv);

    // scene
    auto* scene = app.add_subcommand("scene", "Synthesize a sparse test scene");
    std::string sc_kind = "lineart", sc_out = "scene.spif", sc_pgm, sc_glyphs;
    std::size_t sc_width = 256, sc_height = 192;
    scenes::SceneSpec sc_spec;
    scene->add_option("--kind", sc_kind)->check(CLI::IsMember({"lineart", "glyphs", "siemens"}));
    scene->add_option("--width", sc_width);
    scene->add_option("--height", sc_height);
    scene->add_option("--seed", sc_spec.seed);
    scene->add_option("--sparsity", sc_spec.sparsity_max);
    scene->add_option("--spokes", sc_spec.siemens.spokes);
    scene->add_option("--gamma", sc_spec.siemens.gamma);
    scene->add_option("--glyphs", sc_glyphs, "IDX glyph file (default: synthetic digits)");
    scene->add_option("-o,--out", sc_out);
    scene->add_option("--pgm", sc_pgm);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Simulate detector readings");
    std::string sim_scene, sim_lookups, sim_mode = "raw", sim_out = "meas.spiv";
    std::vector<std::string> sim_maps;
    std::optional<double> sim_snr;
    std::optional<int> sim_bits;
    std::uint64_t sim_seed = 4;
    simulate->add_option("--scene", sim_scene)->required();
    simulate->add_option("--maps", sim_maps)->required();
    simulate->add_option("--lookups", sim_lookups)->required();
    simulate->add_option("--mode", sim_mode)->check(CLI::IsMember({"raw", "complementary"}));
    simulate->add_option("--snr-db", sim_snr);
    simulate->add_option("--daq-bits", sim_bits);
    simulate->add_option("--noise-seed", sim_seed);
    simulate->add_option("-o,--out", sim_out);

    // recon
    auto* rec = app.add_subcommand("recon", "Initial reconstruction from readings");
    std::string rec_meas, rec_lookups, rec_out = "initial.spif", rec_inverse = "backproject", rec_timing;
    std::vector<std::string> rec_maps;
    double rec_alpha = 1e-4;
    rec->add_option("--meas", rec_meas)->required();
    rec->add_option("--maps", rec_maps)->required();
    rec->add_option("--lookups", rec_lookups)->required();
    rec->add_option("--inverse", rec_inverse)->check(CLI::IsMember({"backproject", "tikhonov"}));
    rec->add_option("--alpha", rec_alpha);
    rec->add_option("-o,--out", rec_out);
    rec->add_option("--timing", rec_timing, "Write timing JSON here");

    // enhance
    auto* enh = app.add_subcommand("enhance", "Iterative empty-region enhancement");
    std::string enh_x0, enh_meas, enh_lookups, enh_out = "iterative.spif", enh_report;
    std::vector<std::string> enh_maps;
    enhance::EnhanceParams enh_params;
    enh->add_option("--x0", enh_x0)->required();
    enh->add_option("--meas", enh_meas)->required();
    enh->add_option("--maps", enh_maps)->required();
    enh->add_option("--lookups", enh_lookups)->required();
    enh->add_option("--tau-rel", enh_params.tau_rel);
    enh->add_option("--tau-abs", enh_params.tau_abs);
    enh->add_option("--iters", enh_params.max_iterations);
    enh->add_option("--stop-tol", enh_params.stop_tol);
    enh->add_flag("--clamp01", enh_params.clamp_unit);
    enh->add_option("-o,--out", enh_out);
    enh->add_option("--report", enh_report);

    // metrics
    auto* met = app.add_subcommand("metrics", "PSNR and SSIM of a test image against a reference");
    std::string met_ref, met_test;
    met->add_option("--ref", met_ref)->required();
    met->add_option("--test", met_test)->required();

    // montage
    auto* mon = app.add_subcommand("montage", "Side-by-side comparison strip with metrics");
    std::string mon_ref, mon_out = "montage.pgm", mon_csv;
    std::vector<std::string> mon_images;
    mon->add_option("--ref", mon_ref)->required();
    mon->add_option("-o,--out", mon_out);
    mon->add_option("--csv", mon_csv, "Default: <out>.csv");
    mon->add_option("images", mon_images)->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Time each stage");
    std::string bench_config;
    int bench_repeats = 3;
    bench->add_option("--config", bench_config)->required();
    bench->add_option("--repeats", bench_repeats);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run the full simulate/reconstruct/evaluate pipeline");
    std::string pipe_config, pipe_out = "run";
    unsigned pipe_jobs = 0;
    pipe->add_option("--config", pipe_config)->required();
    pipe->add_option("-o,--out", pipe_out);
    pipe->add_option("--jobs", pipe_jobs, "Parallel scenes (0 = all cores)");

    CLI11_PARSE(app, argc, argv);
    if (verbose) std::cerr << "simd: " << simd::to_string(simd::kernels().level) << '\n';

    try {
        if (*genmaps) {
            std::vector<FieldParams> params;
            if (!gm_preset.empty()) {
                auto c = gm_preset == "full" ? PipelineConfig::full_default() : PipelineConfig::desk_default();
                params = c.maps;
                gm_width = c.width;
                gm_height = c.height;
            }
            if (!gm_maps.empty()) params = parse_map_params(gm_maps);
            if (params.empty()) params = PipelineConfig::desk_default().maps;
            auto stack = mapgen::build_map_stack(gm_width, gm_height, params, gm_seed);
            for (std::size_t m = 0; m < stack.maps.size(); ++m) {
                char name[32];
                std::snprintf(name, sizeof name, "map_%02zu.spim", m);
                io::write_spim(fs::path(gm_out) / name, stack.maps[m]);
            }
            std::cout << "maps: " << stack.maps.size() << " regions: " << stack.total_regions() << '\n';
        } else if (*pat) {
            auto set = patterns::build_pattern_set(load_stack(pat_maps), pat_beta, pat_seed, pat_opts);
            io::write_spil(pat_out, set.lookups);
            if (!pat_csv.empty()) write_text(pat_csv, patterns::balance_csv(set));
            std::cout << "patterns: " << set.pattern_count() << '\n';
        } else if (*scene) {
            sc_spec.kind = scenes::parse_scene_kind(sc_kind);
            std::optional<scenes::GlyphSet> glyphs;
            if (sc_spec.kind == scenes::SceneKind::Glyphs)
                glyphs = sc_glyphs.empty() ? scenes::synthetic_digit_glyphs(100, sc_spec.seed)
                                           : scenes::load_idx_glyphs(sc_glyphs);
            auto img = scenes::generate_scene(sc_width, sc_height, sc_spec, glyphs ? &*glyphs : nullptr);
            io::write_spif(sc_out, img);
            if (!sc_pgm.empty()) io::write_pgm(sc_pgm, img);
            std::cout << "support: " << img.support_fraction() << '\n';
        } else if (*simulate) {
            auto set = load_patterns(sim_maps, sim_lookups, 0.05);
            auto ms = sim::forward_measure(io::read_spif(sim_scene), *set, parse_measurement_mode(sim_mode));
            ms = sim::add_noise(ms, {sim_snr, sim_seed});
            if (sim_bits) ms = sim::daq_quantize(ms, *sim_bits);
            io::write_spiv(sim_out, ms);
            write_text(sim_out + ".json", sim::sidecar_json(ms));
            std::cout << "readings: " << ms.pattern_count_displayed() << '\n';
        } else if (*rec) {
            auto set = load_patterns(rec_maps, rec_lookups, 0.05);
            auto ms = io::read_spiv(rec_meas);
            auto t0 = std::chrono::steady_clock::now();
            auto op = rec_inverse == "tikhonov" ? recon::InverseOperator::tikhonov(set, rec_alpha)
                                                : recon::InverseOperator::backproject(set);
            auto img = op.apply(ms);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            io::write_spif(rec_out, img);
            nlohmann::ordered_json timing{{"stage", "recon"},
                                          {"seconds", secs},
                                          {"pixels_per_second", static_cast<double>(img.size()) / std::max(secs, 1e-12)}};
            if (!rec_timing.empty()) write_text(rec_timing, timing.dump(2));
            std::cout << timing.dump() << '\n';
        } else if (*enh) {
            auto set = load_patterns(enh_maps, enh_lookups, 0.05);
            auto stats = recon::recover_region_stats(io::read_spiv(enh_meas), *set);
            auto result = enhance::enhance(io::read_spif(enh_x0), stats, *set->stack, enh_params);
            io::write_spif(enh_out, result.image);
            if (!enh_report.empty()) write_text(enh_report, result.report.to_json());
            std::cout << "iterations: " << result.report.iterations << '\n';
        } else if (*met) {
            auto r = metrics::evaluate(io::read_spif(met_ref), io::read_spif(met_test));
            std::cout << pipeline::metric_json(r.psnr_db, r.ssim).dump() << '\n';
        } else if (*mon) {
            std::vector<SceneImage> images;
            for (const auto& f : mon_images) images.push_back(io::read_spif(f));
            auto result = pipeline::make_montage(io::read_spif(mon_ref), images, mon_images);
            io::write_pgm(mon_out, result.montage);
            write_text(mon_csv.empty() ? mon_out + ".csv" : mon_csv, pipeline::metrics_csv(result.rows));
            std::cout << "montage: " << result.montage.width() << "x" << result.montage.height() << '\n';
        } else if (*bench) {
            auto report = pipeline::run_bench(pipeline::RunConfig::load(bench_config), bench_repeats);
            std::cout << report.to_json().dump(2) << '\n';
        } else if (*pipe) {
            auto manifest = pipeline::run_pipeline(pipeline::RunConfig::load(pipe_config), pipe_out, pipe_jobs);
            std::cout << pipeline::metrics_csv(manifest.rows);
        }
    } catch (const pipeline::StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
