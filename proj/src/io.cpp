#include "spi/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "spi/error.hpp"

namespace spi::io {

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::string_view magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }

    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string_view magic) : bytes_(bytes) {
        if (bytes_.size() < magic.size() || std::memcmp(bytes_.data(), magic.data(), magic.size()) != 0)
            throw Error(ErrorCode::BadMagic, "expected " + std::string(magic) + " header");
        pos_ = magic.size();
        auto version = u32();
        if (version != kVersion)
            throw Error(ErrorCode::UnsupportedType, std::string(magic) + " version " + std::to_string(version));
    }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return std::bit_cast<double>(v);
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorCode::Truncated, "unexpected end of data");
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFu) throw Error(ErrorCode::TooLarge, std::string(what) + " exceeds u32");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_spif(const SceneImage& img) {
    Writer w("SPIF");
    w.u32(kVersion);
    w.u32(checked_u32(img.width(), "width"));
    w.u32(checked_u32(img.height(), "height"));
    for (double v : img.data()) w.f64(v);
    return w.take();
}

SceneImage decode_spif(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "SPIF");
    std::size_t width = r.u32(), height = r.u32();
    r.need(width * height * 8);
    std::vector<double> data(width * height);
    for (auto& v : data) v = r.f64();
    return SceneImage(width, height, std::move(data));
}

std::vector<std::uint8_t> encode_spim(const ImageMap& map) {
    Writer w("SPIM");
    w.u32(kVersion);
    w.u32(checked_u32(map.width(), "width"));
    w.u32(checked_u32(map.height(), "height"));
    w.u32(map.region_count());
    for (auto l : map.labels()) w.u32(l);
    return w.take();
}

ImageMap decode_spim(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "SPIM");
    std::size_t width = r.u32(), height = r.u32();
    std::uint32_t regions = r.u32();
    r.need(width * height * 4);
    std::vector<std::uint32_t> labels(width * height);
    for (auto& l : labels) l = r.u32();
    return ImageMap(width, height, std::move(labels), regions);
}

std::vector<std::uint8_t> encode_spiv(const MeasurementSet& ms) {
    Writer w("SPIV");
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(ms.mode));
    w.u32(checked_u32(ms.values.size(), "count"));
    for (double v : ms.values) w.f64(v);
    w.u32(checked_u32(ms.map_offsets.size(), "map_count"));
    for (auto o : ms.map_offsets) w.u32(o);
    return w.take();
}

MeasurementSet decode_spiv(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "SPIV");
    MeasurementSet ms;
    auto mode = r.u8();
    if (mode > 1) throw Error(ErrorCode::UnsupportedType, "SPIV mode " + std::to_string(mode));
    ms.mode = static_cast<MeasurementMode>(mode);
    std::size_t count = r.u32();
    r.need(count * 8);
    ms.values.resize(count);
    for (auto& v : ms.values) v = r.f64();
    std::size_t maps = r.u32();
    r.need(maps * 4);
    ms.map_offsets.resize(maps);
    for (auto& o : ms.map_offsets) {
        o = r.u32();
        if (o > count) throw Error(ErrorCode::BlockMismatch, "SPIV block offset past end of readings");
    }
    if (!std::is_sorted(ms.map_offsets.begin(), ms.map_offsets.end()))
        throw Error(ErrorCode::BlockMismatch, "SPIV block offsets not ascending");
    return ms;
}

std::vector<std::uint8_t> encode_spil(std::span<const LookupMatrix> lookups) {
    Writer w("SPIL");
    w.u32(kVersion);
    w.u32(checked_u32(lookups.size(), "map_count"));
    for (const auto& l : lookups) {
        w.u32(l.size());
        for (auto e : l.entries()) w.u8(e);
    }
    return w.take();
}

std::vector<LookupMatrix> decode_spil(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "SPIL");
    std::size_t maps = r.u32();
    std::vector<LookupMatrix> out;
    for (std::size_t m = 0; m < maps; ++m) {
        std::uint32_t size = r.u32();
        std::size_t n = static_cast<std::size_t>(size) * size;
        r.need(n);
        std::vector<std::uint8_t> entries(n);
        for (auto& e : entries) e = r.u8();
        out.emplace_back(size, std::move(entries));
    }
    return out;
}

std::vector<std::uint8_t> encode_pgm(const SceneImage& img) {
    std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.size());
    for (double v : img.data()) {
        double q = std::floor(v * 255.0 + 0.5);
        out.push_back(static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0)));
    }
    return out;
}

SceneImage decode_pgm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        if (t.empty()) throw Error(ErrorCode::Truncated, "PGM header ended early");
        return t;
    };
    if (token() != "P5") throw Error(ErrorCode::BadMagic, "expected binary PGM (P5)");
    std::size_t width = std::stoul(token()), height = std::stoul(token());
    if (std::stoul(token()) != 255) throw Error(ErrorCode::UnsupportedType, "only 8-bit PGM is supported");
    ++pos;  // single whitespace before raster
    if (bytes.size() < pos + width * height) throw Error(ErrorCode::Truncated, "PGM raster truncated");
    std::vector<double> data(width * height);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = bytes[pos + i] / 255.0;
    return SceneImage(width, height, std::move(data));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace spi::io
