#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "spi/error.hpp"
#include "spi/scenes.hpp"

using namespace spi;
using namespace spi::scenes;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected spi::Error");
    return ErrorCode::Io;
}

SceneSpec glyph_spec(std::uint64_t seed) {
    SceneSpec s;
    s.kind = SceneKind::Glyphs;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("IDX header parsing") {
    std::vector<std::uint8_t> bytes{0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 0};
    auto g = parse_idx_glyphs(bytes);
    CHECK(g.count == 1);
    CHECK(g.rows == 2);
    CHECK(g.cols == 2);
    auto img = g.image(0);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(1, 0) == 1.0);
    CHECK(img.at(0, 1) == doctest::Approx(0.50196).epsilon(1e-4));
    CHECK(img.at(1, 1) == 0.0);

    auto labels = bytes;
    labels[3] = 1;
    CHECK(code_of([&] { parse_idx_glyphs(labels); }) == ErrorCode::UnsupportedType);
    auto bad = bytes;
    bad[0] = 1;
    CHECK(code_of([&] { parse_idx_glyphs(bad); }) == ErrorCode::BadMagic);
    auto cut = bytes;
    cut.pop_back();
    CHECK(code_of([&] { parse_idx_glyphs(cut); }) == ErrorCode::Truncated);
    CHECK(code_of([&] { parse_idx_glyphs(std::span(bytes).first(10)); }) == ErrorCode::Truncated);
}

TEST_CASE("IDX round trip") {
    auto g = synthetic_digit_glyphs(12, 4);
    auto back = parse_idx_glyphs(encode_idx_glyphs(g));
    CHECK(back.count == g.count);
    CHECK(back.rows == 28);
    CHECK(back.pixels == g.pixels);
}

TEST_CASE("official digit test file when available") {
    const char* path = std::getenv("MNIST_IDX");
    if (!path) {
        MESSAGE("MNIST_IDX not set; skipping the official-file check");
        return;
    }
    auto g = load_idx_glyphs(path);
    CHECK(g.count == 10000);
    CHECK(g.rows == 28);
    CHECK(g.cols == 28);
}

TEST_CASE("synthetic digits are deterministic and non-empty") {
    auto a = synthetic_digit_glyphs(20, 1), b = synthetic_digit_glyphs(20, 1);
    CHECK(a.pixels == b.pixels);
    for (std::size_t i = 0; i < a.count; ++i) {
        auto img = a.image(i);
        CHECK(img.support_fraction() > 0.02);
        CHECK(img.support_fraction() < 0.6);
    }
}

TEST_CASE("line art meets the sparsity bound") {
    SceneSpec spec;
    spec.seed = 3;
    auto img = gen_lineart(256, 192, spec);
    CHECK(img.support_fraction() > 0.0);
    CHECK(img.support_fraction() <= 0.05);
    for (double v : img.data()) CHECK((v == 0.0 || v == 1.0));
    CHECK(gen_lineart(256, 192, spec) == img);

    SceneSpec impossible;
    impossible.sparsity_max = 1e-6;
    CHECK(code_of([&] { gen_lineart(16, 16, impossible); }) == ErrorCode::SparsityUnreachable);
    impossible.sparsity_max = 0.6;
    CHECK(code_of([&] { gen_lineart(16, 16, impossible); }) == ErrorCode::BadParam);
}

TEST_CASE("single glyph placement reproduces the glyph") {
    auto glyphs = synthetic_digit_glyphs(1, 2);
    auto spec = glyph_spec(5);
    spec.glyphs.min_count = spec.glyphs.max_count = 1;
    spec.glyphs.min_scale = spec.glyphs.max_scale = 1.0;
    spec.glyphs.position = std::pair<std::size_t, std::size_t>{0, 0};
    auto img = compose_glyph_scene(64, 48, glyphs, spec);
    auto ref = glyphs.image(0);
    for (std::size_t y = 0; y < 48; ++y)
        for (std::size_t x = 0; x < 64; ++x) {
            double expect = (x < 28 && y < 28) ? ref.at(x, y) : 0.0;
            CHECK(std::abs(img.at(x, y) - expect) <= 1e-12);
        }
}

TEST_CASE("glyphs composite by maximum") {
    GlyphSet two{2, 4, 4, std::vector<std::uint8_t>(32, 0)};
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
            two.pixels[y * 4 + x] = x < 2 ? 200 : 40;
            two.pixels[16 + y * 4 + x] = x < 2 ? 10 : 250;
        }
    auto spec = glyph_spec(1);
    spec.glyphs.min_count = spec.glyphs.max_count = 10;
    spec.glyphs.min_scale = spec.glyphs.max_scale = 1.0;
    spec.glyphs.position = std::pair<std::size_t, std::size_t>{0, 0};
    auto img = compose_glyph_scene(16, 16, two, spec);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
            double a = two.image(0).at(x, y), b = two.image(1).at(x, y);
            CHECK(img.at(x, y) >= a - 1e-12);
            CHECK(img.at(x, y) >= b - 1e-12);
        }
}

TEST_CASE("glyph scenes are sparse and deterministic") {
    auto glyphs = synthetic_digit_glyphs(10, 9);
    auto spec = glyph_spec(9);
    spec.sparsity_max = 0.5;
    auto img = compose_glyph_scene(256, 192, glyphs, spec);
    CHECK(img.support_fraction() > 0.0);
    CHECK(img.support_fraction() < 0.25);
    CHECK(compose_glyph_scene(256, 192, glyphs, spec) == img);
    for (double v : img.data()) CHECK((v >= 0.0 && v <= 1.0));

    spec.sparsity_max = 0.05;
    CHECK(generate_scene(256, 192, spec, &glyphs).support_fraction() <= 0.05);
}

TEST_CASE("Siemens star closed forms") {
    auto star = siemens_star(64, 64, 4, 2.0);
    // (cx + R/2, cy) lies at theta = 0, sector 0
    CHECK(star.at(32 + 16, 32) == doctest::Approx(std::exp(-2.0 / 4.0)).epsilon(1e-12));
    CHECK(star.at(32, 32) == 1.0);

    auto binary = siemens_star(64, 48, 8, 0.0);
    for (double v : binary.data()) CHECK((v == 0.0 || v == 1.0));

    CHECK_THROWS_AS(siemens_star(64, 64, 3, 1.0), Error);
    CHECK_THROWS_AS(siemens_star(64, 64, 0, 1.0), Error);
}

TEST_CASE("Siemens star mean value") {
    // reference mean 0.1435584829 computed independently with numpy
    auto star = siemens_star(256, 192, 32, 2.0);
    double mean = star.sum() / static_cast<double>(star.size());
    CHECK(mean >= 0.1435584829 * 0.95);
    CHECK(mean <= 0.1435584829 * 1.05);
    for (double v : star.data()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("scene kinds parse") {
    CHECK(parse_scene_kind("lineart") == SceneKind::LineArt);
    CHECK(parse_scene_kind("glyphs") == SceneKind::Glyphs);
    CHECK(parse_scene_kind("siemens") == SceneKind::Siemens);
    CHECK_THROWS_AS(parse_scene_kind("mnist"), Error);
}
