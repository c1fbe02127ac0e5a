#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "spi/error.hpp"
#include "spi/model.hpp"

using namespace spi;

TEST_CASE("SceneImage validates shape and values") {
    CHECK_THROWS_AS(SceneImage(0, 3), Error);
    CHECK_THROWS_AS(SceneImage(2, 2, std::vector<double>(3)), Error);
    CHECK_THROWS_AS(SceneImage(1, 1, std::vector<double>{std::nan("")}), Error);
    SceneImage img(3, 2, 0.25);
    CHECK(img.size() == 6);
    CHECK(img.sum() == doctest::Approx(1.5));
    img.at(2, 1) = 0.0;
    CHECK(img.support_fraction() == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("region_sizes on fixture and degenerate raster") {
    CHECK(region_sizes(fixtures::toy_map_a()) == std::vector<std::size_t>{8, 8});
    CHECK(region_sizes(fixtures::toy_map_b()) == std::vector<std::size_t>{8, 8});
    CHECK(region_sizes(ImageMap(1, 1, {0}, 1)) == std::vector<std::size_t>{1});
}

TEST_CASE("region means of the fixture scene") {
    auto x = fixtures::toy_scene();
    auto a = region_means_of_image(x, fixtures::toy_map_a());
    auto b = region_means_of_image(x, fixtures::toy_map_b());
    CHECK(a[0] == 0.1875);
    CHECK(a[1] == 0.0);
    CHECK(b[0] == 0.1875);
    CHECK(b[1] == 0.0);
    CHECK_THROWS_AS(region_means_of_image(SceneImage(3, 4), fixtures::toy_map_a()), Error);
}

TEST_CASE("constant image has constant region means") {
    std::vector<std::uint32_t> labels(30);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = (i * 7) % 4;
    ImageMap map(6, 5, labels, 4);
    for (double m : region_means_of_image(SceneImage(6, 5, 0.42), map)) CHECK(m == doctest::Approx(0.42).epsilon(1e-15));
}

TEST_CASE("validate_map reports violations") {
    std::vector<std::uint32_t> zeros(4, 0);
    CHECK(validate_map(2, 2, zeros, 1).empty());

    std::vector<std::uint32_t> gap{0, 2, 0, 2};
    auto v = validate_map(2, 2, gap, 3);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == MapViolation::Kind::UnusedId);
    CHECK(v[0].index == 1);

    std::vector<std::uint32_t> out{0, 1, 5, 1};
    auto w = validate_map(2, 2, out, 2);
    REQUIRE(!w.empty());
    CHECK(w[0].kind == MapViolation::Kind::LabelOutOfRange);
    CHECK(w[0].index == 2);

    CHECK(validate_map(2, 2, std::vector<std::uint32_t>(3), 1).front().kind == MapViolation::Kind::SizeMismatch);
    CHECK(validate_map(fixtures::toy_map_a()).empty());
    CHECK_THROWS_AS(ImageMap(2, 2, gap, 3), Error);
}

TEST_CASE("region sums conserve total intensity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> lab(0, 36);
    const std::size_t w = 256, h = 192;
    std::vector<double> px(w * h);
    for (auto& v : px) v = u(rng);
    std::vector<std::uint32_t> labels(w * h);
    for (auto& l : labels) l = lab(rng);
    ImageMap map(w, h, labels, 37);
    SceneImage img(w, h, px);

    auto means = region_means_of_image(img, map);
    auto sizes = region_sizes(map);
    double total = 0.0;
    for (std::size_t r = 0; r < means.size(); ++r) total += means[r] * static_cast<double>(sizes[r]);
    CHECK(std::abs(total - img.sum()) <= 1e-9 * img.sum());
    CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == w * h);
}

TEST_CASE("region_sizes is permutation invariant") {
    std::vector<std::uint32_t> labels{0, 1, 1, 2, 2, 2, 3, 0, 3, 3, 3, 3};
    ImageMap map(4, 3, labels, 4);
    const std::vector<std::uint32_t> perm{2, 0, 3, 1};
    std::vector<std::uint32_t> relabelled(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) relabelled[i] = perm[labels[i]];
    auto a = region_sizes(map);
    auto b = region_sizes(ImageMap(4, 3, relabelled, 4));
    for (std::uint32_t r = 0; r < 4; ++r) CHECK(a[r] == b[perm[r]]);
}

TEST_CASE("MapStack consistency and region totals") {
    auto s = fixtures::toy_stack();
    CHECK(s->total_regions() == 4);
    CHECK_NOTHROW(s->check_consistent());
    MapStack bad;
    bad.maps = {fixtures::toy_map_a(), ImageMap(2, 2, {0, 0, 0, 0}, 1)};
    CHECK_THROWS_AS(bad.check_consistent(), Error);
}

TEST_CASE("LookupMatrix rejects non-binary entries") {
    CHECK_THROWS_AS(LookupMatrix(2, {1, 0, 2, 1}), Error);
    CHECK_THROWS_AS(LookupMatrix(2, {1, 0, 1}), Error);
    auto l = fixtures::toy_lookup();
    CHECK(l.row_sum(0) == 1);
    CHECK(l.row_sum(1) == 2);
    CHECK(l(1, 0) == 1);
}

TEST_CASE("configuration arithmetic") {
    auto desk = PipelineConfig::desk_default();
    CHECK(desk.maps.size() == 10);
    CHECK(desk.nominal_pattern_count() == 200);
    CHECK(desk.compression_ratio() <= 0.0041);

    auto full = PipelineConfig::full_default();
    CHECK(full.width == 1024);
    CHECK(full.height == 768);
    CHECK(full.nominal_pattern_count() == 3224);
    CHECK(full.frame_rate_hz() == 22000.0 / 3224.0);

    full.mode = MeasurementMode::Complementary;
    CHECK(full.nominal_pattern_count() == 6448);

    CHECK(compression_ratio(4, 4, 4) == 0.25);
    CHECK(frame_rate_hz(22000.0, 3224) == 22000.0 / 3224.0);
    CHECK_THROWS_AS(frame_rate_hz(22000.0, 0), Error);
}

TEST_CASE("split_seed gives distinct streams") {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 64; ++i) seeds.push_back(split_seed(5, i));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
    CHECK(split_seed(5, 3) == split_seed(5, 3));
}

TEST_CASE("measurement mode names round trip") {
    CHECK(parse_measurement_mode("raw") == MeasurementMode::Raw);
    CHECK(parse_measurement_mode(to_string(MeasurementMode::Complementary)) == MeasurementMode::Complementary);
    CHECK_THROWS_AS(parse_measurement_mode("diff"), Error);
}
