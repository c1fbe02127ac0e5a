#include "spi/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spi/error.hpp"
#include "spi/io.hpp"

namespace spi::scenes {

namespace {

constexpr int kMaxRetries = 100;

struct Point {
    double x, y;
};

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

// Sets every pixel whose centre lies within radius of p, plus the pixel nearest p.
void stamp_disc(SceneImage& img, Point p, double radius) {
    const auto w = static_cast<long>(img.width()), h = static_cast<long>(img.height());
    const long x0 = static_cast<long>(std::floor(p.x - radius)), x1 = static_cast<long>(std::ceil(p.x + radius));
    const long y0 = static_cast<long>(std::floor(p.y - radius)), y1 = static_cast<long>(std::ceil(p.y + radius));
    for (long y = std::max(0L, y0); y <= std::min(h - 1, y1); ++y)
        for (long x = std::max(0L, x0); x <= std::min(w - 1, x1); ++x) {
            double dx = static_cast<double>(x) - p.x, dy = static_cast<double>(y) - p.y;
            if (dx * dx + dy * dy <= radius * radius) img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = 1.0;
        }
    long nx = std::lround(p.x), ny = std::lround(p.y);
    if (nx >= 0 && nx < w && ny >= 0 && ny < h) img.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) = 1.0;
}

void draw_bezier(SceneImage& img, Point a, Point b, Point c, double radius) {
    double len = std::hypot(b.x - a.x, b.y - a.y) + std::hypot(c.x - b.x, c.y - b.y);
    int steps = std::max(2, static_cast<int>(std::ceil(len * 3.0)));
    for (int i = 0; i <= steps; ++i) {
        double t = static_cast<double>(i) / steps, u = 1.0 - t;
        stamp_disc(img, {u * u * a.x + 2 * u * t * b.x + t * t * c.x, u * u * a.y + 2 * u * t * b.y + t * t * c.y},
                   radius);
    }
}

void draw_ellipse(SceneImage& img, Point centre, double rx, double ry, double angle, double radius) {
    int steps = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * std::max(rx, ry) * 3.0)));
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int i = 0; i < steps; ++i) {
        double t = 2.0 * std::numbers::pi * i / steps;
        double ex = rx * std::cos(t), ey = ry * std::sin(t);
        stamp_disc(img, {centre.x + ca * ex - sa * ey, centre.y + sa * ex + ca * ey}, radius);
    }
}

SceneImage draw_lineart_once(std::size_t width, std::size_t height, const LineArtKnobs& k, std::mt19937_64& rng) {
    SceneImage img(width, height, 0.0);
    const double span = k.extent * static_cast<double>(std::min(width, height));
    std::uniform_real_distribution<double> ux(0.0, static_cast<double>(width - 1));
    std::uniform_real_distribution<double> uy(0.0, static_cast<double>(height - 1));
    std::uniform_real_distribution<double> jitter(-span / 2.0, span / 2.0);
    std::uniform_int_distribution<int> strokes(k.min_strokes, k.max_strokes);
    std::uniform_int_distribution<int> widths(k.min_width, k.max_width);

    const int n = strokes(rng);
    for (int s = 0; s < n; ++s) {
        Point c{ux(rng), uy(rng)};
        Point a{c.x + jitter(rng), c.y + jitter(rng)};
        Point b{c.x + jitter(rng), c.y + jitter(rng)};
        Point e{c.x + jitter(rng), c.y + jitter(rng)};
        draw_bezier(img, a, b, e, widths(rng) / 2.0);
    }
    const double mn = static_cast<double>(std::min(width, height));
    std::uniform_int_distribution<int> ellipses(0, k.max_ellipses);
    std::uniform_real_distribution<double> radius(0.04 * mn, 0.15 * mn);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    const int ne = ellipses(rng);
    for (int e = 0; e < ne; ++e) {
        Point c{ux(rng), uy(rng)};
        double rx = radius(rng), ry = radius(rng);
        draw_ellipse(img, c, rx, ry, angle(rng), 0.5);
    }
    return img;
}

double bilinear(const GlyphSet& g, std::size_t index, double x, double y) {
    auto px = g.glyph(index);
    const double maxx = static_cast<double>(g.cols - 1), maxy = static_cast<double>(g.rows - 1);
    x = std::clamp(x, 0.0, maxx);
    y = std::clamp(y, 0.0, maxy);
    auto x0 = static_cast<std::size_t>(std::floor(x)), y0 = static_cast<std::size_t>(std::floor(y));
    std::size_t x1 = std::min(x0 + 1, g.cols - 1), y1 = std::min(y0 + 1, g.rows - 1);
    double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
    auto v = [&](std::size_t xx, std::size_t yy) { return px[yy * g.cols + xx] / 255.0; };
    return (1 - fy) * ((1 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1 - fx) * v(x0, y1) + fx * v(x1, y1));
}

SceneImage compose_once(std::size_t width, std::size_t height, const GlyphSet& glyphs, const GlyphKnobs& k,
                        std::mt19937_64& rng) {
    SceneImage img(width, height, 0.0);
    std::uniform_int_distribution<int> count(k.min_count, k.max_count);
    std::uniform_int_distribution<std::size_t> pick(0, glyphs.count - 1);
    std::uniform_real_distribution<double> scale(k.min_scale, k.max_scale);

    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const std::size_t index = pick(rng);
        const double s = k.min_scale == k.max_scale ? k.min_scale : scale(rng);
        const auto sw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(glyphs.cols * s)));
        const auto sh = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(glyphs.rows * s)));
        std::size_t ox, oy;
        if (k.position) {
            std::tie(ox, oy) = *k.position;
        } else {
            ox = std::uniform_int_distribution<std::size_t>(0, width > sw ? width - sw : 0)(rng);
            oy = std::uniform_int_distribution<std::size_t>(0, height > sh ? height - sh : 0)(rng);
        }
        const double fx = static_cast<double>(glyphs.cols) / static_cast<double>(sw);
        const double fy = static_cast<double>(glyphs.rows) / static_cast<double>(sh);
        for (std::size_t y = 0; y < sh && oy + y < height; ++y)
            for (std::size_t x = 0; x < sw && ox + x < width; ++x) {
                double v = bilinear(glyphs, index, (x + 0.5) * fx - 0.5, (y + 0.5) * fy - 0.5);
                double& dst = img.at(ox + x, oy + y);
                dst = std::max(dst, v);
            }
    }
    return img;
}

void check_sparsity(double sparsity_max) {
    if (!(sparsity_max > 0.0 && sparsity_max <= 0.5))
        throw Error(ErrorCode::BadParam, "sparsity_max must lie in (0, 0.5]");
}

// Digit skeletons in unit coordinates (y down); each digit is a list of polylines.
using Stroke = std::vector<Point>;
const std::vector<std::vector<Stroke>>& digit_skeletons() {
    static const std::vector<std::vector<Stroke>> digits = [] {
        auto loop = [](double cx, double cy, double rx, double ry) {
            Stroke s;
            for (int i = 0; i <= 16; ++i) {
                double t = 2.0 * std::numbers::pi * i / 16;
                s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
            }
            return s;
        };
        std::vector<std::vector<Stroke>> d(10);
        d[0] = {loop(0.5, 0.5, 0.24, 0.38)};
        d[1] = {{{0.36, 0.24}, {0.52, 0.1}, {0.52, 0.9}}};
        d[2] = {{{0.26, 0.3}, {0.36, 0.14}, {0.58, 0.1}, {0.72, 0.24}, {0.68, 0.44}, {0.26, 0.88}, {0.78, 0.88}}};
        d[3] = {{{0.26, 0.16}, {0.7, 0.14}, {0.46, 0.44}, {0.72, 0.6}, {0.66, 0.84}, {0.26, 0.86}}};
        d[4] = {{{0.64, 0.9}, {0.64, 0.1}, {0.22, 0.64}, {0.8, 0.64}}};
        d[5] = {{{0.74, 0.12}, {0.32, 0.12}, {0.29, 0.46}, {0.62, 0.44}, {0.75, 0.64}, {0.64, 0.86}, {0.26, 0.84}}};
        d[6] = {{{0.7, 0.12}, {0.38, 0.36}, {0.28, 0.68}, {0.44, 0.88}, {0.68, 0.8}, {0.68, 0.6}, {0.3, 0.62}}};
        d[7] = {{{0.22, 0.12}, {0.78, 0.12}, {0.42, 0.9}}};
        d[8] = {loop(0.5, 0.3, 0.18, 0.18), loop(0.5, 0.68, 0.22, 0.2)};
        d[9] = {{{0.7, 0.44}, {0.36, 0.46}, {0.3, 0.26}, {0.5, 0.1}, {0.7, 0.24}, {0.7, 0.44}, {0.6, 0.9}}};
        return d;
    }();
    return digits;
}

double segment_distance(Point p, Point a, Point b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0) : 0.0;
    return std::hypot(p.x - a.x - t * vx, p.y - a.y - t * vy);
}

}  // namespace

SceneImage GlyphSet::image(std::size_t i) const {
    auto g = glyph(i);
    std::vector<double> data(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) data[p] = g[p] / 255.0;
    return SceneImage(cols, rows, std::move(data));
}

GlyphSet parse_idx_glyphs(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw Error(ErrorCode::Truncated, "IDX header shorter than magic");
    if (bytes[0] != 0 || bytes[1] != 0) throw Error(ErrorCode::BadMagic, "IDX magic must start with two zero bytes");
    if (read_be32(bytes, 0) != 0x00000803u)
        throw Error(ErrorCode::UnsupportedType, "only unsigned-byte 3-D IDX (0x00000803) is supported");
    if (bytes.size() < 16) throw Error(ErrorCode::Truncated, "IDX dimensions truncated");
    GlyphSet g;
    g.count = read_be32(bytes, 4);
    g.rows = read_be32(bytes, 8);
    g.cols = read_be32(bytes, 12);
    const std::size_t n = g.count * g.rows * g.cols;
    if (bytes.size() - 16 < n) throw Error(ErrorCode::Truncated, "IDX payload truncated");
    if (g.count == 0 || g.rows == 0 || g.cols == 0) throw Error(ErrorCode::BadParam, "IDX glyph set is empty");
    g.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
    return g;
}

GlyphSet load_idx_glyphs(const std::filesystem::path& path) { return parse_idx_glyphs(io::read_file(path)); }

std::vector<std::uint8_t> encode_idx_glyphs(const GlyphSet& glyphs) {
    std::vector<std::uint8_t> out;
    write_be32(out, 0x00000803u);
    write_be32(out, static_cast<std::uint32_t>(glyphs.count));
    write_be32(out, static_cast<std::uint32_t>(glyphs.rows));
    write_be32(out, static_cast<std::uint32_t>(glyphs.cols));
    out.insert(out.end(), glyphs.pixels.begin(), glyphs.pixels.end());
    return out;
}

GlyphSet synthetic_digit_glyphs(std::size_t count, std::uint64_t seed, std::size_t size) {
    if (count == 0 || size < 8) throw Error(ErrorCode::BadParam, "need count >= 1 and size >= 8");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> slant(-0.25, 0.25), scale(0.7, 0.95), thick(0.9, 1.6), shift(-0.06, 0.06);
    GlyphSet g{count, size, size, std::vector<std::uint8_t>(count * size * size, 0)};
    const auto& skeletons = digit_skeletons();
    for (std::size_t i = 0; i < count; ++i) {
        const auto& digit = skeletons[i % 10];
        const double sl = slant(rng), sc = scale(rng) * static_cast<double>(size), r = thick(rng);
        const double dx = shift(rng), dy = shift(rng);
        std::vector<Stroke> strokes;
        for (const auto& s : digit) {
            Stroke t;
            for (auto p : s) {
                double ux = p.x - 0.5 + dx, uy = p.y - 0.5 + dy;
                t.push_back({(ux + sl * uy) * sc + size / 2.0, uy * sc + size / 2.0});
            }
            strokes.push_back(std::move(t));
        }
        auto* px = g.pixels.data() + i * size * size;
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x) {
                double d = 1e9;
                Point p{x + 0.5, y + 0.5};
                for (const auto& s : strokes)
                    for (std::size_t k = 0; k + 1 < s.size(); ++k) d = std::min(d, segment_distance(p, s[k], s[k + 1]));
                double v = std::clamp(1.0 - (d - r), 0.0, 1.0);
                px[y * size + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
    }
    return g;
}

SceneKind parse_scene_kind(std::string_view text) {
    if (text == "lineart") return SceneKind::LineArt;
    if (text == "glyphs") return SceneKind::Glyphs;
    if (text == "siemens") return SceneKind::Siemens;
    throw Error(ErrorCode::BadParam, "unknown scene kind '" + std::string(text) + "'");
}

SceneImage gen_lineart(std::size_t width, std::size_t height, const SceneSpec& spec) {
    check_sparsity(spec.sparsity_max);
    const auto& k = spec.lineart;
    if (k.min_strokes < 1 || k.max_strokes < k.min_strokes || k.min_width < 1 || k.max_width < k.min_width)
        throw Error(ErrorCode::BadParam, "invalid line-art knobs");
    std::mt19937_64 rng(spec.seed);
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        auto img = draw_lineart_once(width, height, k, rng);
        if (img.support_fraction() <= spec.sparsity_max) return img;
    }
    throw Error(ErrorCode::SparsityUnreachable,
                "line art exceeded sparsity " + std::to_string(spec.sparsity_max) + " after 100 retries");
}

SceneImage compose_glyph_scene(std::size_t width, std::size_t height, const GlyphSet& glyphs, const SceneSpec& spec) {
    if (glyphs.count == 0) throw Error(ErrorCode::BadParam, "glyph set is empty");
    std::mt19937_64 rng(spec.seed);
    return compose_once(width, height, glyphs, spec.glyphs, rng);
}

SceneImage siemens_star(std::size_t width, std::size_t height, int spokes, double gamma) {
    if (spokes < 2 || spokes % 2 != 0) throw Error(ErrorCode::BadParam, "spokes must be even and >= 2");
    SceneImage img(width, height, 0.0);
    const double cx = static_cast<double>(width / 2), cy = static_cast<double>(height / 2);
    const double radius = static_cast<double>(std::min(width, height)) / 2.0;
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
            double theta = std::atan2(dy, dx);
            if (theta < 0.0) theta += two_pi;
            auto sector = static_cast<long>(std::floor(theta * spokes / two_pi));
            if (sector % 2 != 0) continue;
            double rho = std::hypot(dx, dy) / radius;
            img.at(x, y) = std::exp(-rho * rho * gamma);
        }
    return img;
}

SceneImage generate_scene(std::size_t width, std::size_t height, const SceneSpec& spec, const GlyphSet* glyphs) {
    switch (spec.kind) {
        case SceneKind::LineArt: return gen_lineart(width, height, spec);
        case SceneKind::Siemens: return siemens_star(width, height, spec.siemens.spokes, spec.siemens.gamma);
        case SceneKind::Glyphs: {
            check_sparsity(spec.sparsity_max);
            if (!glyphs || glyphs->count == 0) throw Error(ErrorCode::BadParam, "glyph scene needs a glyph set");
            std::mt19937_64 rng(spec.seed);
            for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
                auto img = compose_once(width, height, *glyphs, spec.glyphs, rng);
                if (img.support_fraction() <= spec.sparsity_max) return img;
            }
            throw Error(ErrorCode::SparsityUnreachable, "glyph scene exceeded sparsity after 100 retries");
        }
    }
    throw Error(ErrorCode::BadParam, "unknown scene kind");
}

}  // namespace spi::scenes
