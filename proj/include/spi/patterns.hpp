#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spi/model.hpp"

namespace spi::patterns {

struct LookupOptions {
    int max_tries = 1000;
    double pivot_rel = 1e-8;   // reject if any |pivot| < pivot_rel * max|entry|
    double cond_max = 1e8;     // reject if the condition estimate exceeds this
    int row_redraws = 64;      // fresh rows drawn per row slot before an attempt is abandoned
};

struct BalanceEntry {
    std::size_t map;
    std::size_t row;
    double on_fraction;
};

/// One look-up matrix per map of a shared stack, plus the per-pattern
/// on-pixel fraction.
struct PatternSet {
    std::shared_ptr<const MapStack> stack;
    std::vector<LookupMatrix> lookups;
    std::vector<BalanceEntry> balance;
    double beta = 0.05;

    std::size_t pattern_count() const;
    std::size_t width() const { return stack->width(); }
    std::size_t height() const { return stack->height(); }
};

double on_fraction(std::span<const std::uint8_t> row, std::span<const std::size_t> region_sizes);

/// Greedy single-region toggles, each choosing the toggle that brings the
/// on-pixel fraction closest to 0.5 (lowest region id on ties), until the
/// fraction lies within [0.5 - beta, 0.5 + beta] or no toggle improves it.
std::vector<std::uint8_t> repair_row_balance(std::span<const std::uint8_t> row,
                                             std::span<const std::size_t> region_sizes, double beta);

/// True when LU with partial pivoting accepts the matrix under the option thresholds.
bool is_well_conditioned(const LookupMatrix& lookup, const LookupOptions& options = {});

/// Allowed row-sum band [floor(R/2) - ceil(R/4), ceil(R/2) + ceil(R/4)].
std::pair<std::size_t, std::size_t> row_sum_band(std::uint32_t regions);

/// Random balanced invertible binary matrix for `map`. R = 1 yields [[1]]
/// with the balance band waived. Throws BalanceUnachievable after
/// options.max_tries failed attempts.
LookupMatrix build_lookup_matrix(const ImageMap& map, double beta, std::uint64_t seed,
                                 const LookupOptions& options = {});

std::vector<std::uint8_t> materialize_pattern(const ImageMap& map, std::span<const std::uint8_t> lookup_row);
void materialize_pattern(const ImageMap& map, std::span<const std::uint8_t> lookup_row,
                         std::span<std::uint8_t> mask);

/// Lookup for map m uses split_seed(seed, m).
PatternSet build_pattern_set(std::shared_ptr<const MapStack> stack, double beta, std::uint64_t seed,
                             const LookupOptions& options = {});

/// Wraps existing look-up matrices (e.g. read from SPIL); checks shapes and invertibility.
PatternSet assemble_pattern_set(std::shared_ptr<const MapStack> stack, std::vector<LookupMatrix> lookups,
                                double beta, const LookupOptions& options = {});

/// CSV with header "map,row,on_fraction".
std::string balance_csv(const PatternSet& set);

}  // namespace spi::patterns
