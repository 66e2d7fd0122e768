#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"

#include "addsel/basis.hpp"
#include "addsel/errors.hpp"
#include "support/oracles.hpp"

using namespace addsel;

namespace {

std::vector<double> uniform_sample(std::uint64_t seed, int n, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = unif(rng);
    return x;
}

ComponentBasis handmade(const Eigen::MatrixXd& columns, int polynomial) {
    ComponentBasis b;
    b.order = polynomial + 1;
    b.columns = columns;
    b.knots.knots.assign(static_cast<std::size_t>(columns.cols() - polynomial), 0.0);
    b.column_weights = Eigen::VectorXd::Ones(columns.cols());
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        b.column_kind.push_back(j < polynomial ? ColumnKind::polynomial : ColumnKind::truncated);
    }
    return b;
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("knots of 1..16 are the interior j/16 quantiles") {
    std::vector<double> x(16);
    std::iota(x.begin(), x.end(), 1.0);
    BasisConfig cfg;
    cfg.knot_count = 15;
    const KnotVector kv = place_knots(x, cfg);
    REQUIRE(kv.knots.size() == 15);
    for (int j = 1; j <= 15; ++j) {
        CHECK(kv.knots[static_cast<std::size_t>(j - 1)] == doctest::Approx(1.0 + 15.0 * j / 16.0).epsilon(1e-14));
    }
    for (std::size_t j = 0; j < kv.knots.size(); ++j) {
        CHECK(kv.knots[j] > 1.0);
        CHECK(kv.knots[j] < 16.0);
        if (j > 0) CHECK(kv.knots[j] > kv.knots[j - 1]);
    }
}

TEST_CASE("a constant covariate cannot carry knots") {
    std::vector<double> x(40, 0.0);
    CHECK_THROWS_AS(place_knots(x, BasisConfig{}), TooFewDistinctValues);
}

TEST_CASE("knot placement needs only enough distinct interior values") {
    CHECK(place_knots(uniform_sample(1, 18, 0.0, 1.0), BasisConfig{}).knots.size() == 15);
    CHECK_THROWS_AS(place_knots(std::vector<double>{1.0}, BasisConfig{}), InvalidArgument);
    std::vector<double> few{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    BasisConfig cfg;
    cfg.knot_rule = KnotRule::order_statistic;
    CHECK_THROWS_AS(place_knots(few, cfg), TooFewDistinctValues);
}

TEST_CASE("knots match an independent sort-and-index oracle on uniform data") {
    const auto x = uniform_sample(11, 400, -2.5, 2.5);
    BasisConfig cfg;
    const KnotVector kv = place_knots(x, cfg, 4);
    CHECK(kv.component_id == 4);
    REQUIRE(kv.knots.size() == 15);
    for (int j = 1; j <= 15; ++j) {
        CHECK(kv.knots[static_cast<std::size_t>(j - 1)] == doctest::Approx(oracle::sorted_quantile(x, j / 16.0)).epsilon(1e-14));
    }

    cfg.knot_rule = KnotRule::order_statistic;
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const KnotVector os = place_knots(x, cfg);
    for (int j = 1; j <= 15; ++j) {
        CHECK(os.knots[static_cast<std::size_t>(j - 1)] == sorted[static_cast<std::size_t>(400 * j / 16 - 1)]);
    }
}

TEST_CASE("knots are invariant to the order of the sample") {
    auto x = uniform_sample(5, 120, 0.0, 3.0);
    const KnotVector a = place_knots(x, BasisConfig{});
    std::reverse(x.begin(), x.end());
    const KnotVector b = place_knots(x, BasisConfig{});
    CHECK(a.knots == b.knots);
}

TEST_CASE("heavily tied samples whose quantiles collide are rejected") {
    std::vector<double> x;
    for (int i = 0; i < 200; ++i) x.push_back(i < 150 ? 0.0 : static_cast<double>(i));
    CHECK_THROWS_AS(place_knots(x, BasisConfig{}), TooFewDistinctValues);
}

TEST_CASE("design entries follow the truncated power formula") {
    const std::vector<double> x{0.5, 2.0, 3.0};
    const ComponentBasis b = build_design(x, KnotVector{0, {1.0}}, 3);
    REQUIRE(b.column_count() == 3);
    CHECK(b.columns(0, 2) == 0.0);
    CHECK(b.columns(1, 2) == 1.0);
    CHECK(b.columns(1, 0) == 2.0);
    CHECK(b.columns(1, 1) == 4.0);
    CHECK(b.column_kind[0] == ColumnKind::polynomial);
    CHECK(b.column_kind[2] == ColumnKind::truncated);

    std::vector<double> row(3);
    evaluate_basis_row(2.0, std::vector<double>{1.0}, 3, row);
    CHECK(row == std::vector<double>{2.0, 4.0, 1.0});
}

TEST_CASE("truncated columns vanish below the smallest knot") {
    const auto x = uniform_sample(2, 200, -1.0, 1.0);
    const KnotVector kv = place_knots(x, BasisConfig{});
    const ComponentBasis b = build_design(x, kv, 3);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= kv.knots.front()) {
            for (Eigen::Index j = b.polynomial_count(); j < b.column_count(); ++j) {
                CHECK(b.columns(static_cast<Eigen::Index>(i), j) == 0.0);
            }
        }
    }
}

TEST_CASE("quadratic basis functions are continuous with continuous first derivative at the knots") {
    const std::vector<double> knots{-0.7, 0.1, 0.9};
    const double h = 1e-6;
    std::vector<double> left(5), right(5), left2(5), right2(5);
    for (double t : knots) {
        evaluate_basis_row(t - h, knots, 3, left);
        evaluate_basis_row(t + h, knots, 3, right);
        evaluate_basis_row(t - 2 * h, knots, 3, left2);
        evaluate_basis_row(t + 2 * h, knots, 3, right2);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(std::abs(right[j] - left[j]) <= 10 * h);
            const double d_left = (left[j] - left2[j]) / h;
            const double d_right = (right2[j] - right[j]) / h;
            CHECK(std::abs(d_right - d_left) <= 1e-4);
        }
    }
}

TEST_CASE("build_design is bit-identical across calls and has (p-1+k)K columns in total") {
    Eigen::Index total = 0;
    for (int k = 0; k < 3; ++k) {
        const auto x = uniform_sample(100 + k, 150, 0.0, 1.0);
        const KnotVector kv = place_knots(x, BasisConfig{}, k);
        const ComponentBasis a = build_design(x, kv, 3);
        const ComponentBasis b = build_design(x, kv, 3);
        CHECK(a.columns == b.columns);
        total += a.column_count();
    }
    CHECK(total == (3 - 1 + 15) * 3);
    CHECK(total + 1 == (2 + 15) * 3 + 1);
}

TEST_CASE("a constant column c is weighted by 1/|c|") {
    Eigen::MatrixXd cols = Eigen::MatrixXd::Constant(20, 1, -2.5);
    const ComponentBasis b = weight_columns(handmade(cols, 1));
    CHECK(b.column_weights(0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(b.columns.col(0).squaredNorm() / 20.0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.weighted);
}

TEST_CASE("a zero column has no weight") {
    Eigen::MatrixXd cols = Eigen::MatrixXd::Ones(10, 2);
    cols.col(1).setZero();
    CHECK_THROWS_AS(weight_columns(handmade(cols, 1)), ZeroColumn);
}

TEST_CASE("weighted columns have unit second moment") {
    const auto x = uniform_sample(9, 50, 0.0, 2.0);
    BasisConfig cfg;
    cfg.knot_count = 5;
    const ComponentBasis b = weight_columns(build_design(x, place_knots(x, cfg), 3));
    for (Eigen::Index j = 0; j < b.column_count(); ++j) {
        CHECK(std::abs(b.columns.col(j).squaredNorm() / 50.0 - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(weight_columns(b), InvalidArgument);
}

TEST_CASE("inverse Gram weights equal the diagonal of the inverse block Gram") {
    const auto x = uniform_sample(19, 80, 0.0, 1.0);
    BasisConfig cfg;
    cfg.knot_count = 4;
    const ComponentBasis raw = build_design(x, place_knots(x, cfg), 3);
    const ComponentBasis b = weight_columns(raw, WeightRule::inverse_gram_diagonal);
    const Eigen::MatrixXd gram = raw.columns.transpose() * raw.columns / 80.0;
    const Eigen::VectorXd expected = gram.inverse().diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < b.column_count(); ++j) {
        CHECK(b.column_weights(j) == doctest::Approx(expected(j)).epsilon(1e-8));
    }

    // Orthogonal columns: both rules agree.
    Eigen::MatrixXd orth(4, 2);
    orth << 1, 1, 1, -1, -1, 1, -1, -1;
    orth.col(1) *= 3.0;
    const ComponentBasis a = weight_columns(handmade(orth, 1), WeightRule::second_moment);
    const ComponentBasis c = weight_columns(handmade(orth, 1), WeightRule::inverse_gram_diagonal);
    CHECK((a.column_weights - c.column_weights).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("projected truncated columns are orthogonal to the intercept and polynomial columns") {
    const auto x = uniform_sample(21, 300, -2.5, 2.5);
    const ComponentBasis w = weight_columns(build_design(x, place_knots(x, BasisConfig{}), 3));
    const ComponentBasis p = project_truncated(w);
    CHECK(p.projected);
    CHECK_FALSE(p.rank_deficient_polynomial);
    const Eigen::Index poly = p.polynomial_count();
    for (Eigen::Index t = poly; t < p.column_count(); ++t) {
        CHECK(std::abs(p.columns.col(t).sum()) <= 1e-8 * 300);
        for (Eigen::Index q = 0; q < poly; ++q) {
            CHECK(std::abs(p.columns.col(t).dot(p.columns.col(q))) <= 1e-8 * 300);
        }
    }
    // The loadings reconstruct the weighted truncated columns.
    Eigen::MatrixXd span(300, poly + 1);
    span.col(0).setOnes();
    span.rightCols(poly) = w.columns.leftCols(poly);
    const Eigen::MatrixXd rebuilt = p.columns.rightCols(p.truncated_count()) + span * p.projection_loadings;
    CHECK((rebuilt - w.columns.rightCols(w.truncated_count())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("projection is idempotent") {
    const auto x = uniform_sample(23, 200, 0.0, 1.0);
    const ComponentBasis once = project_truncated(weight_columns(build_design(x, place_knots(x, BasisConfig{}), 3)));
    const ComponentBasis twice = project_truncated(once);
    CHECK((once.columns - twice.columns).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("a truncated column already orthogonal to the polynomial block is unchanged") {
    Eigen::MatrixXd cols(4, 2);
    cols << -1.5, 1, -0.5, -1, 0.5, -1, 1.5, 1;  // second column has zero sum and zero dot with the first
    const ComponentBasis p = project_truncated(handmade(cols, 1));
    CHECK((p.columns - cols).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("a rank-deficient polynomial block is flagged, not fatal") {
    Eigen::MatrixXd cols(5, 3);
    cols.col(0).setConstant(2.0);  // polynomial column collinear with the intercept
    cols.col(1).setConstant(4.0);
    cols.col(2) << 0, 0, 1, 2, 3;
    const ComponentBasis p = project_truncated(handmade(cols, 2));
    CHECK(p.rank_deficient_polynomial);
    CHECK(std::abs(p.columns.col(2).sum()) <= 1e-10);
}

}
