#include <cmath>
#include <random>

#include "doctest.h"

#include "addsel/errors.hpp"
#include "addsel/model.hpp"
#include "addsel/tuning.hpp"
#include "support/oracles.hpp"

using namespace addsel;

namespace {

Problem grouped(std::mt19937_64& rng, int n, int groups, int width, double signal) {
    std::normal_distribution<double> g(0.0, 1.0);
    const int m = 1 + groups * width;
    Eigen::MatrixXd x(n, m);
    x.col(0).setOnes();
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j < m; ++j) x(i, j) = g(rng);
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = signal * (x(i, 1) - 0.5 * x(i, 2)) + g(rng);
    PenaltySpec pen;
    for (int k = 0; k < groups; ++k) {
        PenaltyGroup grp;
        grp.group_id = k;
        for (int j = 0; j < width; ++j) grp.columns.push_back(1 + k * width + j);
        pen.groups.push_back(grp);
    }
    return {std::move(x), std::move(y), pen};
}

std::vector<Eigen::Index> active_columns(const Solution& s) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < s.active.size(); ++j) {
        if (s.active[j]) idx.push_back(static_cast<Eigen::Index>(j));
    }
    return idx;
}

}  // namespace

TEST_SUITE("tuning") {

TEST_CASE("log grid") {
    TuningConfig cfg;
    const auto grid = cfg.grid(400);
    REQUIRE(grid.size() == 100);
    CHECK(grid.front() == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(grid.back() == doctest::Approx(1e2).epsilon(1e-12));
    for (int j = 0; j < 100; ++j) {
        CHECK(grid[static_cast<std::size_t>(j)] == doctest::Approx(std::pow(10.0, -5.0 + 7.0 * j / 99.0)).epsilon(1e-12));
    }
}

TEST_CASE("pilot grid is centered on the pilot value") {
    TuningConfig cfg;
    cfg.grid_size = 11;
    cfg.pilot_lambda = 2.0;
    const auto grid = cfg.grid(400);
    const double h = std::sqrt(std::log(400.0) / 400.0);
    CHECK(grid.front() == doctest::Approx(2.0 * (1 - h)));
    CHECK(grid.back() == doctest::Approx(2.0 * (1 + h)));
    CHECK(grid[5] == doctest::Approx(2.0));
}

TEST_CASE("config validation") {
    TuningConfig cfg;
    cfg.gamma = 0.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = TuningConfig{};
    cfg.grid_size = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = TuningConfig{};
    cfg.log10_min = 3;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("MGCV score") {
    CHECK(mgcv_score(10.0, 5.0, 100, 1.5) == doctest::Approx(0.1 / (0.925 * 0.925)).epsilon(1e-14));
    CHECK(mgcv_score(10.0, 5.0, 100, 1.5) == doctest::Approx(0.116874).epsilon(1e-5));
    CHECK(mgcv_score(100.0, 0.0, 100, 2.7) == 1.0);
    const double gcv = (10.0 / 100.0) / std::pow(1.0 - 5.0 / 100.0, 2);
    CHECK(mgcv_score(10.0, 5.0, 100, 1.0) == gcv);
    CHECK_THROWS_AS(mgcv_score(1.0, 50.0, 100, 2.0), SaturatedModel);
    CHECK_THROWS_AS(mgcv_score(1.0, 80.0, 100, 1.5), SaturatedModel);
    double previous = 0.0;
    for (int df = 0; df < 60; ++df) {
        const double v = mgcv_score(10.0, df, 100, 1.5);
        CHECK(v > previous);
        previous = v;
    }
}

TEST_CASE("effective degrees of freedom") {
    std::mt19937_64 rng(13);
    SUBCASE("lambda zero counts the active columns") {
        Problem p = grouped(rng, 40, 2, 3, 1.0);
        const Solution s = fit_fixed_lambda(p, SolverConfig{});
        CHECK(effective_df(s, p) == doctest::Approx(7.0).epsilon(1e-10));
    }
    SUBCASE("intercept only is one") {
        Problem p = grouped(rng, 40, 2, 3, 1.0);
        p.penalty.lambda = 1e6;
        const Solution s = fit_fixed_lambda(p, SolverConfig{});
        REQUIRE(active_columns(s).size() == 1);
        CHECK(effective_df(s, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("matches the explicit hat-matrix trace") {
        for (double lambda : {0.3, 3.0, 30.0}) {
            for (int inst = 0; inst < 5; ++inst) {
                Problem p = oracle::random_spline_problem(rng, 40, 5, 3, lambda);
                const Solution s = fit_fixed_lambda(p, SolverConfig{});
                const auto idx = active_columns(s);
                const Eigen::VectorXd ridge = ridge_diagonal(p, s.coefficients, s.active)(idx);
                const double dense = oracle::dense_projector_trace(p.data->design()(Eigen::all, idx), ridge);
                CHECK(effective_df(s, p) == doctest::Approx(dense).epsilon(1e-8));
                CHECK(effective_df(s, p) <= static_cast<double>(idx.size()) + 1e-10);
            }
        }
    }
}

TEST_CASE("warm start keeps dropped groups at zero") {
    PenaltySpec pen;
    pen.groups.push_back({0, {1, 2}, GroupKind::sqrt_group, 0, Subgroup::whole});
    pen.groups.push_back({1, {3, 4}, GroupKind::sqrt_group, 1, Subgroup::whole});
    pen.groups.push_back({2, {5}, GroupKind::l1_singleton, 2, Subgroup::whole});
    Eigen::VectorXd previous(7), seed(7);
    previous << 0, 0, 0, 0.5, 0, 0, 0;
    seed << 1, 2, 3, 4, 5, 6, 7;
    const Eigen::VectorXd start = warm_start_point(previous, seed, pen);
    Eigen::VectorXd expected(7);
    expected << 1, 0, 0, 0.5, 5, 6, 7;
    CHECK(start == expected);
    CHECK_THROWS_AS(warm_start_point(previous, Eigen::VectorXd::Zero(3), pen), InvalidArgument);

    Eigen::VectorXd null_model = Eigen::VectorXd::Zero(7);
    null_model(0) = 2.0;
    null_model(5) = 0.25;  // the L1 singleton survives
    Eigen::VectorXd kept(7);
    kept << 2, 0, 0, 0, 0, 0.25, 7;
    CHECK(warm_start_point(null_model, seed, pen) == kept);
}

TEST_CASE("path covers the grid in decreasing order") {
    std::mt19937_64 rng(17);
    const Problem base = grouped(rng, 60, 3, 2, 3.0);
    TuningConfig cfg;
    cfg.grid_size = 20;
    for (bool warm : {true, false}) {
        cfg.warm_start = warm;
        const auto result = select_lambda([&](double l) { return base.with_lambda(l); }, cfg, SolverConfig{});
        REQUIRE(result.path.size() == 20);
        const auto grid = cfg.grid(60);
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(result.path[i].lambda == grid[19 - i]);
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : result.path) {
            if (r.status == RecordStatus::ok) best = std::min(best, r.mgcv);
        }
        CHECK(result.best.mgcv == best);
        CHECK(result.best.active_groups >= 1);
    }
}

TEST_CASE("ties go to the larger lambda") {
    // No penalized columns: every grid point gives the same fit and score.
    std::mt19937_64 rng(19);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd x(30, 2);
    x.col(0).setOnes();
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        x(i, 1) = g(rng);
        y(i) = x(i, 1) + g(rng);
    }
    const Problem base(x, y, PenaltySpec{});
    TuningConfig cfg;
    cfg.grid_size = 10;
    const auto result = select_lambda([&](double l) { return base.with_lambda(l); }, cfg, SolverConfig{});
    CHECK(result.path.front().mgcv == result.path.back().mgcv);
    CHECK(result.best.lambda == 100.0);
}

TEST_CASE("every point saturated") {
    std::mt19937_64 rng(23);
    const Problem base = grouped(rng, 12, 2, 4, 1.0);
    TuningConfig cfg;
    cfg.grid_size = 5;
    cfg.log10_min = -8;
    cfg.log10_max = -6;
    cfg.gamma = 3.0;
    CHECK_THROWS_AS(select_lambda([&](double l) { return base.with_lambda(l); }, cfg, SolverConfig{}), AllSaturated);
}

TEST_CASE("pure noise selects nothing") {
    ModelSpec spec;
    spec.tuning.grid_size = 60;
    int empty = 0;
    const int seeds = 50;
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(seed));
        std::uniform_real_distribution<double> u(-2.5, 2.5);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::MatrixXd x(200, 5);
        Eigen::VectorXd y(200);
        for (int i = 0; i < 200; ++i) {
            for (int k = 0; k < 5; ++k) x(i, k) = u(rng);
            y(i) = g(rng);
        }
        const FitResult f = fit(y, x, spec);
        bool any = false;
        for (const auto& c : f.components) any = any || c.selected;
        empty += any ? 0 : 1;
    }
    CHECK(empty >= 45);
}

}
