#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "spi/model.hpp"
#include "spi/patterns.hpp"

namespace spi::recon {

struct RecoverOptions {
    // Complementary mode: estimate the total intensity per pattern pair
    // instead of averaging d+ + d- over all pairs.
    bool per_pattern_total = false;
};

/// Raw-equivalent pattern projections y_k = sum_p mask_k(p) x(p). Raw
/// readings are passed through; complementary pairs become
/// (d+ - d- + T)/2. Throws BlockMismatch when blocks do not line up.
std::vector<double> pattern_projections(const MeasurementSet& ms, const patterns::PatternSet& set,
                                        const RecoverOptions& options = {});

/// Per-map LU factorizations of the look-up matrices.
class RegionSolver {
public:
    explicit RegionSolver(const patterns::PatternSet& set);

    /// Solves lookup_m s_m = y_m for every map block of the projections.
    RegionStats solve(std::span<const double> projections) const;

private:
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
    std::vector<std::vector<std::size_t>> sizes_;
};

RegionStats recover_region_stats(const MeasurementSet& ms, const patterns::PatternSet& set,
                                 const RecoverOptions& options = {});

/// x0(p) = mean over maps of the recovered mean of the region containing p.
SceneImage backproject_means(const RegionStats& stats, const MapStack& stack);

class InverseOperator {
public:
    enum class Kind { Backproject, Tikhonov };

    static InverseOperator backproject(std::shared_ptr<const patterns::PatternSet> set,
                                       const RecoverOptions& options = {});

    /// x0 = P^T (P P^T + lambda I)^-1 y with lambda = alpha * mean(diag(P P^T)).
    /// Dense; limited to width*height <= kMaxTikhonovPixels.
    static InverseOperator tikhonov(std::shared_ptr<const patterns::PatternSet> set, double alpha,
                                    const RecoverOptions& options = {});

    static constexpr std::size_t kMaxTikhonovPixels = 65536;

    Kind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }
    double lambda() const noexcept { return lambda_; }
    const patterns::PatternSet& pattern_set() const { return *set_; }

    SceneImage apply(const MeasurementSet& ms) const;

private:
    InverseOperator() = default;

    Kind kind_ = Kind::Backproject;
    std::shared_ptr<const patterns::PatternSet> set_;
    RecoverOptions options_;
    std::shared_ptr<const RegionSolver> solver_;
    // Tikhonov: (P P^T + lambda I)^-1 P, row-major M x N
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weights_;
    double alpha_ = 0.0;
    double lambda_ = 0.0;
};

inline SceneImage apply_inverse(const InverseOperator& op, const MeasurementSet& ms) { return op.apply(ms); }

/// Stacked binary pattern masks P (M x N, row-major), map blocks in order.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pattern_matrix(
    const patterns::PatternSet& set);

}  // namespace spi::recon
