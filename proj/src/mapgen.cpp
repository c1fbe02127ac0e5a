#include "spi/mapgen.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "spi/error.hpp"

namespace spi::mapgen {

namespace {

// fftw planner calls are not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Dft2d {
public:
    Dft2d(std::size_t width, std::size_t height, std::complex<double>* data) {
        std::lock_guard lock(planner_mutex());
        auto* buf = reinterpret_cast<fftw_complex*>(data);
        const int h = static_cast<int>(height), w = static_cast<int>(width);
        forward_ = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_2d(h, w, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Dft2d() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    Dft2d(const Dft2d&) = delete;
    Dft2d& operator=(const Dft2d&) = delete;

    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

// DFT bin index -> signed frequency in cycles/pixel, range [-0.5, 0.5).
double signed_frequency(std::size_t k, std::size_t n) {
    auto ks = static_cast<long long>(k);
    if (k >= (n + 1) / 2) ks -= static_cast<long long>(n);
    return static_cast<double>(ks) / static_cast<double>(n);
}

}  // namespace

ComplexField white_noise(std::size_t width, std::size_t height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ComplexField f{width, height, std::vector<std::complex<double>>(width * height)};
    for (auto& v : f.values) {
        double re = normal(rng);
        double im = normal(rng);
        v = {re, im};
    }
    return f;
}

ComplexField gaussian_lowpass(const ComplexField& field, double characteristic_size) {
    ComplexField out = field;
    const std::size_t w = field.width, h = field.height;
    Dft2d dft(w, h, out.values.data());
    dft.forward();

    const double k = 2.0 * std::numbers::pi * std::numbers::pi * characteristic_size * characteristic_size;
    const double norm = 1.0 / static_cast<double>(w * h);
    std::vector<double> hx(w);
    for (std::size_t x = 0; x < w; ++x) {
        double u = signed_frequency(x, w);
        hx[x] = std::exp(-k * u * u);
    }
    for (std::size_t y = 0; y < h; ++y) {
        double v = signed_frequency(y, h);
        double hy = std::exp(-k * v * v) * norm;
        auto* row = out.values.data() + y * w;
        for (std::size_t x = 0; x < w; ++x) row[x] *= hx[x] * hy;
    }
    dft.backward();
    return out;
}

ComplexField gen_correlated_field(std::size_t width, std::size_t height, double characteristic_size,
                                  std::uint64_t seed) {
    if (width == 0 || height == 0) throw Error(ErrorCode::BadParam, "field raster must be at least 1x1");
    if (!(characteristic_size > 0.0))
        throw Error(ErrorCode::BadParam, "characteristic size must be positive");
    if (characteristic_size > static_cast<double>(std::min(width, height)) / 2.0)
        throw Error(ErrorCode::BadParam, "characteristic size exceeds min(width, height)/2");
    return gaussian_lowpass(white_noise(width, height, seed), characteristic_size);
}

ImageMap quantize_phase_to_map(const ComplexField& field, std::uint32_t levels) {
    if (levels < 2) throw Error(ErrorCode::BadParam, "need at least 2 quantization levels");
    const double q = static_cast<double>(levels);
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<std::uint32_t> labels(field.values.size());
    std::vector<bool> used(levels, false);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        double phase = std::arg(field.values[p]);
        if (!std::isfinite(phase)) throw Error(ErrorCode::BadParam, "field contains non-finite values");
        double bin = std::floor((phase + std::numbers::pi) * q / two_pi);
        auto label = static_cast<std::uint32_t>(std::clamp(bin, 0.0, q - 1.0));
        labels[p] = label;
        used[label] = true;
    }
    std::vector<std::uint32_t> remap(levels, 0);
    std::uint32_t next = 0;
    for (std::uint32_t b = 0; b < levels; ++b)
        if (used[b]) remap[b] = next++;
    for (auto& l : labels) l = remap[l];
    return ImageMap(field.width, field.height, std::move(labels), next);
}

MapStack build_map_stack(std::size_t width, std::size_t height, std::span<const FieldParams> params,
                         std::uint64_t master_seed) {
    if (params.empty()) throw Error(ErrorCode::BadParam, "map parameter list is empty");
    MapStack stack;
    stack.seed = master_seed;
    stack.params.assign(params.begin(), params.end());
    stack.maps.reserve(params.size());
    for (std::size_t m = 0; m < params.size(); ++m) {
        auto field = gen_correlated_field(width, height, params[m].characteristic_size, split_seed(master_seed, m));
        stack.maps.push_back(quantize_phase_to_map(field, params[m].levels));
    }
    return stack;
}

}  // namespace spi::mapgen
