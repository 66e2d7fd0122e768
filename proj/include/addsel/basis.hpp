#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace addsel {

enum class KnotRule {
    interior_quantile,  // linear-interpolated sample quantiles j/(k+1), j = 1..k
    order_statistic,    // order statistics x_([n j/(k+1)]), no interpolation
};

// Column weights for WLSM and PWLSM.
enum class WeightRule {
    second_moment,          // w_j = (x_j'x_j / n)^(-1/2)
    inverse_gram_diagonal,  // w_j^2 = [(B'B / n)^(-1)]_jj on the component's own block
};

struct BasisConfig {
    int order = 3;  // spline order p; polynomial degree is p - 1
    int knot_count = 15;
    KnotRule knot_rule = KnotRule::interior_quantile;
    WeightRule weight_rule = WeightRule::second_moment;

    void validate() const;
};

struct KnotVector {
    int component_id = 0;
    std::vector<double> knots;
};

enum class ColumnKind { polynomial, truncated };

/**
 * Truncated power design block for one covariate.
 *
 * Columns are x, x^2, ..., x^(p-1) followed by (x - t_j)_+^(p-1) for every
 * knot. There is no constant column; the global intercept carries it.
 *
 * After weight_columns() each column is scaled by column_weights[j]. After
 * project_truncated() each truncated column additionally has its least-squares
 * projection onto {1, polynomial columns} removed; the projection loadings are
 * kept so coefficients can be mapped back to the raw basis.
 */
struct ComponentBasis {
    int component_id = 0;
    int order = 3;
    KnotVector knots;
    Eigen::MatrixXd columns;
    std::vector<ColumnKind> column_kind;
    Eigen::VectorXd column_weights;
    bool weighted = false;
    bool projected = false;
    // (1 + polynomial_count) x truncated_count. Row 0 is the loading on the
    // intercept, rows 1.. on the weighted polynomial columns.
    Eigen::MatrixXd projection_loadings;
    bool rank_deficient_polynomial = false;

    [[nodiscard]] Eigen::Index polynomial_count() const { return order - 1; }
    [[nodiscard]] Eigen::Index truncated_count() const {
        return static_cast<Eigen::Index>(knots.knots.size());
    }
    [[nodiscard]] Eigen::Index column_count() const { return columns.cols(); }
};

KnotVector place_knots(std::span<const double> x, const BasisConfig& cfg, int component_id = 0);

ComponentBasis build_design(std::span<const double> x, const KnotVector& knots, int order);

// Scales every column by its weight under `rule` (unit empirical second moment
// by default). Throws ZeroColumn when a column is identically zero and, for
// inverse_gram_diagonal, NumericalFailure when the block Gram is singular.
ComponentBasis weight_columns(ComponentBasis basis, WeightRule rule = WeightRule::second_moment);

// Replaces truncated columns by their residuals after projection onto
// {intercept, polynomial columns}. Rank deficiency of that block is handled by a
// pseudo-solve and reported through rank_deficient_polynomial.
ComponentBasis project_truncated(ComponentBasis basis);

// Raw (unweighted, unprojected) basis functions evaluated at a single point.
void evaluate_basis_row(double x, std::span<const double> knots, int order, std::span<double> out);

}  // namespace addsel
