#include "spi/recon.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "spi/error.hpp"
#include "spi/kernels.hpp"

namespace spi::recon {

std::vector<double> pattern_projections(const MeasurementSet& ms, const patterns::PatternSet& set,
                                        const RecoverOptions& options) {
    const std::size_t maps = set.lookups.size();
    const std::size_t per = ms.mode == MeasurementMode::Complementary ? 2 : 1;
    if (ms.map_offsets.size() != maps)
        throw Error(ErrorCode::BlockMismatch, "measurement has " + std::to_string(ms.map_offsets.size()) +
                                                  " blocks, pattern set has " + std::to_string(maps) + " maps");
    std::size_t expected_offset = 0;
    for (std::size_t m = 0; m < maps; ++m) {
        if (ms.map_offsets[m] != expected_offset)
            throw Error(ErrorCode::BlockMismatch, "block " + std::to_string(m) + " starts at the wrong offset");
        expected_offset += per * set.lookups[m].size();
    }
    if (ms.values.size() != expected_offset)
        throw Error(ErrorCode::BlockMismatch, "reading count does not match the pattern set");

    if (ms.mode == MeasurementMode::Raw) return ms.values;

    const std::size_t pairs = ms.values.size() / 2;
    double mean_total = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) mean_total += ms.values[2 * k] + ms.values[2 * k + 1];
    mean_total /= static_cast<double>(pairs);

    std::vector<double> y(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
        double plus = ms.values[2 * k], minus = ms.values[2 * k + 1];
        double total = options.per_pattern_total ? plus + minus : mean_total;
        y[k] = 0.5 * (plus - minus + total);
    }
    return y;
}

RegionSolver::RegionSolver(const patterns::PatternSet& set) {
    for (std::size_t m = 0; m < set.lookups.size(); ++m) {
        const auto& lookup = set.lookups[m];
        if (!patterns::is_well_conditioned(lookup))
            throw Error(ErrorCode::SingularMatrix, "look-up matrix " + std::to_string(m) + " is singular");
        const auto r = static_cast<Eigen::Index>(lookup.size());
        Eigen::MatrixXd a(r, r);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < r; ++j) a(i, j) = lookup(i, j);
        lu_.emplace_back(a);
        sizes_.push_back(region_sizes(set.stack->maps[m]));
    }
}

RegionStats RegionSolver::solve(std::span<const double> projections) const {
    RegionStats stats;
    std::size_t offset = 0;
    for (std::size_t m = 0; m < lu_.size(); ++m) {
        const auto r = lu_[m].rows();
        Eigen::Map<const Eigen::VectorXd> y(projections.data() + offset, r);
        Eigen::VectorXd s = lu_[m].solve(y);
        offset += static_cast<std::size_t>(r);

        RegionStats::PerMap pm;
        pm.sums.assign(s.data(), s.data() + r);
        pm.sizes = sizes_[m];
        pm.means.resize(pm.sums.size());
        for (std::size_t i = 0; i < pm.sums.size(); ++i) pm.means[i] = pm.sums[i] / static_cast<double>(pm.sizes[i]);
        stats.maps.push_back(std::move(pm));
    }
    return stats;
}

RegionStats recover_region_stats(const MeasurementSet& ms, const patterns::PatternSet& set,
                                 const RecoverOptions& options) {
    auto y = pattern_projections(ms, set, options);
    return RegionSolver(set).solve(y);
}

SceneImage backproject_means(const RegionStats& stats, const MapStack& stack) {
    if (stats.maps.size() != stack.maps.size() || stack.maps.empty())
        throw Error(ErrorCode::BlockMismatch, "region stats do not match the map stack");
    const auto& k = simd::kernels();
    SceneImage out(stack.width(), stack.height(), 0.0);
    for (std::size_t m = 0; m < stack.maps.size(); ++m) {
        const auto& map = stack.maps[m];
        if (stats.maps[m].means.size() != map.region_count())
            throw Error(ErrorCode::BlockMismatch, "region count mismatch in map " + std::to_string(m));
        k.gather_add(out.data().data(), stats.maps[m].means.data(), map.labels().data(), out.size());
    }
    const double inv = 1.0 / static_cast<double>(stack.maps.size());
    for (auto& v : out.data()) v *= inv;
    return out;
}

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pattern_matrix(
    const patterns::PatternSet& set) {
    const std::size_t n = set.width() * set.height();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p(
        static_cast<Eigen::Index>(set.pattern_count()), static_cast<Eigen::Index>(n));
    Eigen::Index row = 0;
    for (std::size_t m = 0; m < set.lookups.size(); ++m) {
        auto labels = set.stack->maps[m].labels();
        for (std::size_t k = 0; k < set.lookups[m].size(); ++k, ++row) {
            auto lut = set.lookups[m].row(k);
            for (std::size_t i = 0; i < n; ++i) p(row, static_cast<Eigen::Index>(i)) = lut[labels[i]];
        }
    }
    return p;
}

InverseOperator InverseOperator::backproject(std::shared_ptr<const patterns::PatternSet> set,
                                             const RecoverOptions& options) {
    if (!set) throw Error(ErrorCode::BadParam, "pattern set is null");
    InverseOperator op;
    op.kind_ = Kind::Backproject;
    op.options_ = options;
    op.solver_ = std::make_shared<const RegionSolver>(*set);
    op.set_ = std::move(set);
    return op;
}

InverseOperator InverseOperator::tikhonov(std::shared_ptr<const patterns::PatternSet> set, double alpha,
                                          const RecoverOptions& options) {
    if (!set) throw Error(ErrorCode::BadParam, "pattern set is null");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::BadParam, "alpha must be positive");
    const std::size_t n = set->width() * set->height();
    if (n > kMaxTikhonovPixels)
        throw Error(ErrorCode::TooLarge, "dense Tikhonov operator limited to " +
                                             std::to_string(kMaxTikhonovPixels) + " pixels, got " + std::to_string(n));

    auto p = pattern_matrix(*set);
    Eigen::MatrixXd gram = p * p.transpose();
    const double lambda = alpha * gram.diagonal().mean();
    gram.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMatrix, "regularized Gram matrix not SPD");

    InverseOperator op;
    op.kind_ = Kind::Tikhonov;
    op.options_ = options;
    op.alpha_ = alpha;
    op.lambda_ = lambda;
    op.weights_ = llt.solve(Eigen::MatrixXd(p));
    op.set_ = std::move(set);
    return op;
}

SceneImage InverseOperator::apply(const MeasurementSet& ms) const {
    auto y = pattern_projections(ms, *set_, options_);
    if (kind_ == Kind::Backproject) return backproject_means(solver_->solve(y), *set_->stack);

    const auto& k = simd::kernels();
    SceneImage out(set_->width(), set_->height(), 0.0);
    for (Eigen::Index row = 0; row < weights_.rows(); ++row)
        k.axpy(out.data().data(), weights_.row(row).data(), y[static_cast<std::size_t>(row)], out.size());
    return out;
}

}  // namespace spi::recon
