#include <doctest.h>

#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "spi/error.hpp"
#include "spi/io.hpp"

using namespace spi;

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

}  // namespace

TEST_CASE("SPIF layout is little-endian with a fixed header") {
    SceneImage img(2, 1, std::vector<double>{1.0, 0.5});
    auto bytes = io::encode_spif(img);
    REQUIRE(bytes.size() == 4 + 12 + 16);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SPIF");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 2);
    CHECK(bytes[12] == 1);
    // 1.0 = 0x3FF0000000000000
    CHECK(bytes[16 + 7] == 0x3F);
    CHECK(bytes[16 + 6] == 0xF0);
    CHECK(io::decode_spif(bytes) == img);
}

TEST_CASE("SPIF round trip on random rasters") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 20; ++t) {
        std::size_t w = 1 + rng() % 17, h = 1 + rng() % 13;
        std::vector<double> d(w * h);
        for (auto& v : d) v = u(rng);
        SceneImage img(w, h, d);
        CHECK(io::decode_spif(io::encode_spif(img)) == img);
    }
}

TEST_CASE("SPIM, SPIV and SPIL round trip") {
    auto map = fixtures::toy_map_b();
    CHECK(io::decode_spim(io::encode_spim(map)) == map);

    MeasurementSet ms;
    ms.mode = MeasurementMode::Complementary;
    ms.values = {1.5, 0.0, 1.5, 0.0, 0.25, 1.25, 1.5, 0.0};
    ms.map_offsets = {0, 4};
    auto back = io::decode_spiv(io::encode_spiv(ms));
    CHECK(back.values == ms.values);
    CHECK(back.mode == ms.mode);
    CHECK(back.map_offsets == ms.map_offsets);

    std::vector<LookupMatrix> lookups{fixtures::toy_lookup(), LookupMatrix(1, {1}), LookupMatrix(3, {1, 1, 0, 0, 1, 1, 1, 0, 1})};
    CHECK(io::decode_spil(io::encode_spil(lookups)) == lookups);
}

TEST_CASE("decoders reject malformed input") {
    auto spif = io::encode_spif(SceneImage(3, 3, 0.5));
    auto bad_magic = spif;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { io::decode_spif(bad_magic); }) == ErrorCode::BadMagic);

    auto truncated = spif;
    truncated.resize(truncated.size() - 1);
    CHECK(code_of([&] { io::decode_spif(truncated); }) == ErrorCode::Truncated);

    auto version = spif;
    version[4] = 2;
    CHECK(code_of([&] { io::decode_spif(version); }) == ErrorCode::UnsupportedType);

    auto spim = io::encode_spim(fixtures::toy_map_a());
    spim[20] = 7;  // first label out of range
    CHECK(code_of([&] { io::decode_spim(spim); }) == ErrorCode::BadParam);

    MeasurementSet ms;
    ms.values = {1, 2, 3};
    ms.map_offsets = {0, 2};
    auto spiv = io::encode_spiv(ms);
    spiv[spiv.size() - 4] = 9;  // offset past the end
    CHECK(code_of([&] { io::decode_spiv(spiv); }) == ErrorCode::BlockMismatch);

    auto spil = io::encode_spil(std::vector<LookupMatrix>{fixtures::toy_lookup()});
    spil.back() = 3;
    CHECK(code_of([&] { io::decode_spil(spil); }) == ErrorCode::BadParam);
}

TEST_CASE("PGM export rounds half up and clamps") {
    SceneImage img(4, 1, std::vector<double>{0.0, 0.5, 1.2, -0.1});
    auto bytes = io::encode_pgm(img);
    std::string header = "P5\n4 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
    CHECK(bytes[header.size() + 1] == 128);  // 127.5 -> 128
    CHECK(bytes[header.size() + 2] == 255);
    CHECK(bytes[header.size() + 3] == 0);
    auto back = io::decode_pgm(bytes);
    CHECK(back.at(1, 0) == 128.0 / 255.0);
}

TEST_CASE("PGM import accepts header comments") {
    std::string text = "P5\n# comment\n2 1\n255\n";
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    bytes.push_back(0);
    bytes.push_back(255);
    auto img = io::decode_pgm(bytes);
    CHECK(img.width() == 2);
    CHECK(img.at(1, 0) == 1.0);
}

TEST_CASE("file helpers create directories and report missing files") {
    auto dir = std::filesystem::temp_directory_path() / "spi_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    io::write_spif(dir / "a.spif", fixtures::toy_scene());
    CHECK(io::read_spif(dir / "a.spif") == fixtures::toy_scene());
    CHECK(code_of([&] { io::read_spif(dir / "missing.spif"); }) == ErrorCode::Io);
    std::filesystem::remove_all(dir.parent_path());
}
