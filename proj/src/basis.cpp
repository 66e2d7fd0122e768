#include "addsel/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "addsel/errors.hpp"

namespace addsel {

namespace {

double int_power(double value, int exponent) {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) {
        result *= value;
    }
    return result;
}

}  // namespace

void BasisConfig::validate() const {
    if (order < 2) {
        throw InvalidArgument("basis order must be >= 2, got " + std::to_string(order));
    }
    if (knot_count < 1) {
        throw InvalidArgument("knot count must be >= 1, got " + std::to_string(knot_count));
    }
}

KnotVector place_knots(std::span<const double> x, const BasisConfig& cfg, int component_id) {
    cfg.validate();
    const auto n = static_cast<long>(x.size());
    const long k = cfg.knot_count;
    if (n < 2) {
        throw InvalidArgument("place_knots: need at least 2 observations, got " + std::to_string(n));
    }
    std::vector<double> sorted(x.begin(), x.end());
    if (!std::all_of(sorted.begin(), sorted.end(), [](double v) { return std::isfinite(v); })) {
        throw InvalidArgument("place_knots: non-finite covariate value");
    }
    std::sort(sorted.begin(), sorted.end());

    const double lo = sorted.front();
    const double hi = sorted.back();
    KnotVector out{component_id, {}};
    out.knots.reserve(static_cast<std::size_t>(k));
    for (long j = 1; j <= k; ++j) {
        double knot = 0.0;
        if (cfg.knot_rule == KnotRule::interior_quantile) {
            const double h = static_cast<double>(n - 1) * static_cast<double>(j) / static_cast<double>(k + 1);
            const auto base = static_cast<long>(std::floor(h));
            const double frac = h - static_cast<double>(base);
            knot = base + 1 < n ? sorted[base] + frac * (sorted[base + 1] - sorted[base]) : sorted[base];
        } else {
            const long index = std::max<long>(1, (n * j) / (k + 1));
            knot = sorted[index - 1];
        }
        if (knot > lo && knot < hi && (out.knots.empty() || knot > out.knots.back())) {
            out.knots.push_back(knot);
        }
    }
    if (static_cast<long>(out.knots.size()) < k) {
        throw TooFewDistinctValues("component " + std::to_string(component_id) + ": only " +
                                   std::to_string(out.knots.size()) + " of " + std::to_string(k) +
                                   " knots are distinct interior values");
    }
    return out;
}

void evaluate_basis_row(double x, std::span<const double> knots, int order, std::span<double> out) {
    const int degree = order - 1;
    double power = 1.0;
    for (int j = 0; j < degree; ++j) {
        power *= x;
        out[static_cast<std::size_t>(j)] = power;
    }
    for (std::size_t j = 0; j < knots.size(); ++j) {
        const double d = x - knots[j];
        out[static_cast<std::size_t>(degree) + j] = d > 0.0 ? int_power(d, degree) : 0.0;
    }
}

ComponentBasis build_design(std::span<const double> x, const KnotVector& knots, int order) {
    if (order < 2) {
        throw InvalidArgument("build_design: order must be >= 2");
    }
    if (!std::is_sorted(knots.knots.begin(), knots.knots.end()) ||
        std::adjacent_find(knots.knots.begin(), knots.knots.end()) != knots.knots.end()) {
        throw InvalidArgument("build_design: knots must be strictly increasing");
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index poly = order - 1;
    const auto trunc = static_cast<Eigen::Index>(knots.knots.size());

    ComponentBasis basis;
    basis.component_id = knots.component_id;
    basis.order = order;
    basis.knots = knots;
    basis.columns.resize(n, poly + trunc);
    basis.column_kind.assign(static_cast<std::size_t>(poly), ColumnKind::polynomial);
    basis.column_kind.resize(static_cast<std::size_t>(poly + trunc), ColumnKind::truncated);
    basis.column_weights = Eigen::VectorXd::Ones(poly + trunc);

    std::vector<double> row(static_cast<std::size_t>(poly + trunc));
    for (Eigen::Index i = 0; i < n; ++i) {
        evaluate_basis_row(x[static_cast<std::size_t>(i)], knots.knots, order, row);
        for (Eigen::Index j = 0; j < poly + trunc; ++j) {
            basis.columns(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    if (!basis.columns.allFinite()) {
        throw InvalidArgument("build_design: non-finite design entry");
    }
    return basis;
}

ComponentBasis weight_columns(ComponentBasis basis, WeightRule rule) {
    if (basis.weighted) {
        throw InvalidArgument("weight_columns: basis is already weighted");
    }
    if (basis.projected) {
        throw InvalidArgument("weight_columns: weighting must precede projection");
    }
    const auto n = static_cast<double>(basis.columns.rows());
    for (Eigen::Index j = 0; j < basis.columns.cols(); ++j) {
        const double second_moment = basis.columns.col(j).squaredNorm() / n;
        if (!(second_moment > 0.0)) {
            throw ZeroColumn("weight_columns: column " + std::to_string(j) + " of component " +
                             std::to_string(basis.component_id) + " is identically zero");
        }
    }
    Eigen::VectorXd weights = (basis.columns.colwise().squaredNorm().transpose() / n).cwiseSqrt().cwiseInverse();
    if (rule == WeightRule::inverse_gram_diagonal) {
        const Eigen::MatrixXd gram = basis.columns.transpose() * basis.columns / n;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
        qr.setThreshold(1e-12);
        if (qr.rank() < gram.cols()) {
            throw NumericalFailure("weight_columns: Gram block of component " + std::to_string(basis.component_id) +
                                   " is singular; inverse_gram_diagonal weights are undefined");
        }
        weights = qr.inverse().diagonal().cwiseSqrt();
    }
    for (Eigen::Index j = 0; j < basis.columns.cols(); ++j) {
        basis.columns.col(j) *= weights(j);
        basis.column_weights(j) = weights(j);
    }
    basis.weighted = true;
    return basis;
}

ComponentBasis project_truncated(ComponentBasis basis) {
    const Eigen::Index n = basis.columns.rows();
    const Eigen::Index poly = basis.polynomial_count();
    const Eigen::Index trunc = basis.truncated_count();

    Eigen::MatrixXd span(n, poly + 1);
    span.col(0).setOnes();
    span.rightCols(poly) = basis.columns.leftCols(poly);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(span);
    const Eigen::MatrixXd loadings = cod.solve(basis.columns.rightCols(trunc));
    basis.rank_deficient_polynomial = basis.rank_deficient_polynomial || cod.rank() < poly + 1;
    basis.columns.rightCols(trunc) -= span * loadings;

    if (basis.projected) {
        basis.projection_loadings += loadings;
    } else {
        basis.projection_loadings = loadings;
    }
    basis.projected = true;
    return basis;
}

}  // namespace addsel
