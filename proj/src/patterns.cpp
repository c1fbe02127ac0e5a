#include "spi/patterns.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "spi/error.hpp"

namespace spi::patterns {

std::size_t PatternSet::pattern_count() const {
    std::size_t n = 0;
    for (const auto& l : lookups) n += l.size();
    return n;
}

double on_fraction(std::span<const std::uint8_t> row, std::span<const std::size_t> region_sizes) {
    std::size_t on = 0, total = 0;
    for (std::size_t r = 0; r < region_sizes.size(); ++r) {
        total += region_sizes[r];
        if (row[r]) on += region_sizes[r];
    }
    return total == 0 ? 0.0 : static_cast<double>(on) / static_cast<double>(total);
}

std::vector<std::uint8_t> repair_row_balance(std::span<const std::uint8_t> row,
                                             std::span<const std::size_t> region_sizes, double beta) {
    if (row.size() != region_sizes.size())
        throw Error(ErrorCode::DimensionMismatch, "row length differs from region count");
    std::vector<std::uint8_t> out(row.begin(), row.end());
    double total = 0.0, on = 0.0;
    for (std::size_t r = 0; r < out.size(); ++r) {
        total += static_cast<double>(region_sizes[r]);
        if (out[r]) on += static_cast<double>(region_sizes[r]);
    }
    if (total == 0.0) return out;

    for (;;) {
        double dev = std::abs(on / total - 0.5);
        if (dev <= beta) break;
        std::size_t best = out.size();
        double best_dev = dev;
        for (std::size_t r = 0; r < out.size(); ++r) {
            double s = static_cast<double>(region_sizes[r]);
            double cand = std::abs((out[r] ? on - s : on + s) / total - 0.5);
            if (cand < best_dev) {
                best_dev = cand;
                best = r;
            }
        }
        if (best == out.size()) break;
        double s = static_cast<double>(region_sizes[best]);
        on = out[best] ? on - s : on + s;
        out[best] ^= 1;
    }
    return out;
}

bool is_well_conditioned(const LookupMatrix& lookup, const LookupOptions& options) {
    const auto n = static_cast<Eigen::Index>(lookup.size());
    if (n == 0) return false;
    Eigen::MatrixXd a(n, n);
    double max_entry = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = lookup(i, j);
            max_entry = std::max(max_entry, std::abs(a(i, j)));
        }
    if (max_entry == 0.0) return false;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const auto& packed = lu.matrixLU();
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(packed(i, i)) < options.pivot_rel * max_entry) return false;
    double rcond = lu.rcond();
    return rcond > 0.0 && 1.0 / rcond <= options.cond_max;
}

std::pair<std::size_t, std::size_t> row_sum_band(std::uint32_t regions) {
    std::size_t half_lo = regions / 2, half_hi = (regions + 1) / 2, quarter = (regions + 3) / 4;
    return {half_lo >= quarter ? half_lo - quarter : 0, half_hi + quarter};
}

LookupMatrix build_lookup_matrix(const ImageMap& map, double beta, std::uint64_t seed,
                                 const LookupOptions& options) {
    const std::uint32_t regions = map.region_count();
    if (regions < 1) throw Error(ErrorCode::BadParam, "map has no regions");
    if (!(beta > 0.0 && beta < 0.5)) throw Error(ErrorCode::BadParam, "beta must lie in (0, 0.5)");
    if (regions == 1) return LookupMatrix(1, {1});

    const auto sizes = region_sizes(map);
    const auto [sum_lo, sum_hi] = row_sum_band(regions);
    std::mt19937_64 rng(seed);

    auto acceptable = [&](const std::vector<std::uint8_t>& row) {
        auto count = static_cast<std::size_t>(std::count(row.begin(), row.end(), std::uint8_t{1}));
        if (count < sum_lo || count > sum_hi) return false;
        return std::abs(on_fraction(row, sizes) - 0.5) <= beta;
    };

    std::vector<std::uint8_t> draw(regions);
    for (int attempt = 0; attempt < options.max_tries; ++attempt) {
        std::vector<std::uint8_t> entries;
        entries.reserve(static_cast<std::size_t>(regions) * regions);
        std::set<std::vector<std::uint8_t>> seen;
        bool ok = true;
        for (std::uint32_t k = 0; k < regions && ok; ++k) {
            ok = false;
            for (int redraw = 0; redraw < options.row_redraws; ++redraw) {
                for (auto& b : draw) b = static_cast<std::uint8_t>(rng() >> 63);
                auto row = repair_row_balance(draw, sizes, beta);
                if (!acceptable(row) || !seen.insert(row).second) continue;
                entries.insert(entries.end(), row.begin(), row.end());
                ok = true;
                break;
            }
        }
        if (!ok) continue;
        LookupMatrix candidate(regions, std::move(entries));
        if (is_well_conditioned(candidate, options)) return candidate;
    }
    throw Error(ErrorCode::BalanceUnachievable,
                "no balanced invertible look-up matrix for R=" + std::to_string(regions) + " after " +
                    std::to_string(options.max_tries) + " attempts");
}

void materialize_pattern(const ImageMap& map, std::span<const std::uint8_t> lookup_row,
                         std::span<std::uint8_t> mask) {
    if (lookup_row.size() != map.region_count())
        throw Error(ErrorCode::DimensionMismatch, "lookup row length differs from region count");
    if (mask.size() != map.size()) throw Error(ErrorCode::DimensionMismatch, "mask size differs from map");
    auto labels = map.labels();
    for (std::size_t p = 0; p < labels.size(); ++p) mask[p] = lookup_row[labels[p]];
}

std::vector<std::uint8_t> materialize_pattern(const ImageMap& map, std::span<const std::uint8_t> lookup_row) {
    std::vector<std::uint8_t> mask(map.size());
    materialize_pattern(map, lookup_row, mask);
    return mask;
}

static std::vector<BalanceEntry> balance_report(const MapStack& stack, std::span<const LookupMatrix> lookups) {
    std::vector<BalanceEntry> report;
    for (std::size_t m = 0; m < lookups.size(); ++m) {
        auto sizes = region_sizes(stack.maps[m]);
        for (std::size_t k = 0; k < lookups[m].size(); ++k)
            report.push_back({m, k, on_fraction(lookups[m].row(k), sizes)});
    }
    return report;
}

PatternSet build_pattern_set(std::shared_ptr<const MapStack> stack, double beta, std::uint64_t seed,
                             const LookupOptions& options) {
    if (!stack || stack->maps.empty()) throw Error(ErrorCode::BadParam, "map stack is empty");
    stack->check_consistent();
    PatternSet set;
    set.beta = beta;
    for (std::size_t m = 0; m < stack->maps.size(); ++m) {
        try {
            set.lookups.push_back(build_lookup_matrix(stack->maps[m], beta, split_seed(seed, m), options));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BalanceUnachievable) throw;
            throw Error(ErrorCode::BalanceUnachievable, "map " + std::to_string(m) + ": " + e.what());
        }
    }
    set.balance = balance_report(*stack, set.lookups);
    set.stack = std::move(stack);
    return set;
}

PatternSet assemble_pattern_set(std::shared_ptr<const MapStack> stack, std::vector<LookupMatrix> lookups,
                                double beta, const LookupOptions& options) {
    if (!stack || stack->maps.empty()) throw Error(ErrorCode::BadParam, "map stack is empty");
    stack->check_consistent();
    if (lookups.size() != stack->maps.size())
        throw Error(ErrorCode::BlockMismatch, "lookup count differs from map count");
    for (std::size_t m = 0; m < lookups.size(); ++m) {
        if (lookups[m].size() != stack->maps[m].region_count())
            throw Error(ErrorCode::BlockMismatch, "lookup " + std::to_string(m) + " size differs from region count");
        if (!is_well_conditioned(lookups[m], options))
            throw Error(ErrorCode::SingularMatrix, "lookup " + std::to_string(m) + " is singular or ill-conditioned");
    }
    PatternSet set;
    set.beta = beta;
    set.balance = balance_report(*stack, lookups);
    set.lookups = std::move(lookups);
    set.stack = std::move(stack);
    return set;
}

std::string balance_csv(const PatternSet& set) {
    std::ostringstream out;
    out.precision(17);
    out << "map,row,on_fraction\n";
    for (const auto& e : set.balance) out << e.map << ',' << e.row << ',' << e.on_fraction << '\n';
    return out.str();
}

}  // namespace spi::patterns
