#pragma once

// toy-4: 4x4 raster, map A splits columns {0,1}|{2,3}, map B splits rows
// {0,1}|{2,3}, both use the look-up [[1,0],[1,1]]; the scene has
// x(0,0) = 1.0, x(1,0) = 0.5 and zeros elsewhere.

#include <memory>

#include "spi/model.hpp"
#include "spi/patterns.hpp"

namespace fixtures {

inline spi::ImageMap toy_map_a() {
    std::vector<std::uint32_t> labels(16);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) labels[y * 4 + x] = x < 2 ? 0 : 1;
    return {4, 4, labels, 2};
}

inline spi::ImageMap toy_map_b() {
    std::vector<std::uint32_t> labels(16);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) labels[y * 4 + x] = y < 2 ? 0 : 1;
    return {4, 4, labels, 2};
}

inline std::shared_ptr<const spi::MapStack> toy_stack() {
    spi::MapStack s;
    s.maps = {toy_map_a(), toy_map_b()};
    s.params = {{1.0, 2}, {1.0, 2}};
    return std::make_shared<const spi::MapStack>(std::move(s));
}

inline spi::LookupMatrix toy_lookup() { return {2, {1, 0, 1, 1}}; }
inline spi::LookupMatrix identity_lookup() { return {2, {1, 0, 0, 1}}; }

inline std::shared_ptr<const spi::patterns::PatternSet> toy_set(const spi::LookupMatrix& lookup = toy_lookup()) {
    return std::make_shared<const spi::patterns::PatternSet>(
        spi::patterns::assemble_pattern_set(toy_stack(), {lookup, lookup}, 0.05));
}

inline spi::SceneImage toy_scene() {
    spi::SceneImage s(4, 4);
    s.at(0, 0) = 1.0;
    s.at(1, 0) = 0.5;
    return s;
}

inline spi::SceneImage toy_block(double v) {
    spi::SceneImage s(4, 4);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x) s.at(x, y) = v;
    return s;
}

}  // namespace fixtures
