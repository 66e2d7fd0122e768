#include <cmath>
#include <random>

#include "doctest.h"

#include "addsel/errors.hpp"
#include "addsel/penalty.hpp"

using namespace addsel;

namespace {

PenaltySpec one_group(std::vector<Eigen::Index> cols, double lambda) {
    PenaltySpec s;
    s.groups.push_back({0, std::move(cols), GroupKind::sqrt_group, 0, Subgroup::whole});
    s.lambda = lambda;
    return s;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Two sqrt groups {1,2,3}, {4,5} and a singleton {6}, intercept at 0.
PenaltySpec mixed(double lambda) {
    PenaltySpec s;
    s.groups.push_back({0, {1, 2, 3}, GroupKind::sqrt_group, 0, Subgroup::whole});
    s.groups.push_back({1, {4, 5}, GroupKind::sqrt_group, 1, Subgroup::whole});
    s.groups.push_back({2, {6}, GroupKind::l1_singleton, 2, Subgroup::whole});
    s.lambda = lambda;
    return s;
}

}  // namespace

TEST_SUITE("penalty") {

TEST_CASE("penalty values on hand-computed inputs") {
    CHECK(penalty_value(vec({0, 1, 0, 0}), one_group({1, 2, 3}, 2.0)) == doctest::Approx(2.0));
    CHECK(penalty_value(Eigen::VectorXd::Zero(7), mixed(3.0)) == 0.0);

    PenaltySpec two;
    two.groups.push_back({0, {1, 2}, GroupKind::sqrt_group, 0, Subgroup::whole});
    two.groups.push_back({1, {3}, GroupKind::sqrt_group, 1, Subgroup::whole});
    two.lambda = 1.0;
    CHECK(penalty_value(vec({9, 0.25, 0.25, 1.0}), two) == doctest::Approx(std::sqrt(0.5) + 1.0).epsilon(1e-14));
    CHECK(penalty_value(vec({9, 0.25, 0.25, 1.0}), two) == doctest::Approx(1.70711).epsilon(1e-5));
}

TEST_CASE("LQA weights on hand-computed inputs") {
    PenaltySpec s = one_group({1}, 1.0);
    s.epsilon_guard = 1e-14;
    const Eigen::VectorXd d = lqa_diagonal(vec({5, 1}), s);
    CHECK(d(0) == 0.0);
    CHECK(d(1) == doctest::Approx(0.5).epsilon(1e-10));

    PenaltySpec g = one_group({1, 2}, 3.0);
    g.epsilon_guard = 1e-14;
    const Eigen::VectorXd d2 = lqa_diagonal(vec({0, 4, 0}), g, {true, true, false});
    CHECK(d2(1) == doctest::Approx(0.1875).epsilon(1e-10));
    CHECK(d2(2) == 0.0);

    PenaltySpec single;
    single.groups.push_back({0, {1}, GroupKind::l1_singleton, 0, Subgroup::whole});
    single.lambda = 4.0;
    single.epsilon_guard = 1e-14;
    CHECK(lqa_diagonal(vec({0, -2}), single)(1) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("exact subgradients on hand-computed inputs") {
    CHECK(exact_subgradient(vec({0, 1, 0}), one_group({1, 2}, 1.0), 1) == doctest::Approx(0.5));
    CHECK(exact_subgradient(vec({0, 0.09, 0.16}), one_group({1, 2}, 1.0), 1) == doctest::Approx(1.0));

    PenaltySpec single;
    single.groups.push_back({0, {1}, GroupKind::l1_singleton, 0, Subgroup::whole});
    single.lambda = 3.0;
    CHECK(exact_subgradient(vec({0, -2}), single, 1) == doctest::Approx(-3.0));
    CHECK(exact_subgradient(vec({7, -2}), single, 0) == 0.0);

    CHECK_THROWS_AS(exact_subgradient(vec({0, 1, 0}), one_group({1, 2}, 1.0), 2), UndefinedAtZero);
    const Eigen::VectorXd all = exact_subgradient(vec({0, 1, 0}), one_group({1, 2}, 1.0));
    CHECK(all(0) == 0.0);
    CHECK(std::isnan(all(2)));
}

TEST_CASE("subgradients agree with centered finite differences of the penalty") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> mag(0.01, 2.0);
    std::bernoulli_distribution sign(0.5);
    const PenaltySpec s = mixed(1.7);
    const double h = 1e-7;
    for (int draw = 0; draw < 200; ++draw) {
        Eigen::VectorXd b(7);
        for (Eigen::Index j = 0; j < 7; ++j) b(j) = (sign(rng) ? 1 : -1) * mag(rng);
        for (Eigen::Index j = 1; j < 7; ++j) {
            Eigen::VectorXd up = b, down = b;
            up(j) += h;
            down(j) -= h;
            const double fd = (penalty_value(up, s) - penalty_value(down, s)) / (2 * h);
            CHECK(std::abs(fd - exact_subgradient(b, s, j)) <= 1e-5);
        }
    }
}

TEST_CASE("the group root is homogeneous of degree one half") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    const PenaltySpec s = one_group({1, 2, 3, 4}, 1.0);
    for (int draw = 0; draw < 100; ++draw) {
        Eigen::VectorXd b(5);
        for (Eigen::Index j = 0; j < 5; ++j) b(j) = g(rng);
        const double alpha = 5.0 * g(rng);
        Eigen::VectorXd scaled = alpha * b;
        scaled(0) = b(0);
        CHECK(penalty_value(scaled, s) == doctest::Approx(std::sqrt(std::abs(alpha)) * penalty_value(b, s)).epsilon(1e-12));
        // Subadditivity of the root.
        Eigen::VectorXd c(5);
        for (Eigen::Index j = 0; j < 5; ++j) c(j) = g(rng);
        CHECK(penalty_value(b + c, s) <= penalty_value(b, s) + penalty_value(c, s) + 1e-12);
    }
}

TEST_CASE("LQA weight times |b_j| recovers the subgradient magnitude") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mag(0.01, 3.0);
    const PenaltySpec s = mixed(2.3);
    for (int draw = 0; draw < 100; ++draw) {
        Eigen::VectorXd b(7);
        for (Eigen::Index j = 0; j < 7; ++j) b(j) = mag(rng) * (j % 2 ? -1.0 : 1.0);
        const Eigen::VectorXd d = lqa_diagonal(b, s);
        for (Eigen::Index j = 1; j < 7; ++j) {
            const double sub = std::abs(exact_subgradient(b, s, j));
            CHECK(std::abs(d(j) * std::abs(b(j)) - sub) <= 1e-3 * sub);
        }
    }
}

TEST_CASE("inactive entries and the sum over the active set") {
    const PenaltySpec s = one_group({1, 2}, 1.0);
    const Eigen::VectorXd all = lqa_diagonal(vec({0, 1, 3}), s);
    const Eigen::VectorXd partial = lqa_diagonal(vec({0, 1, 3}), s, {true, true, false});
    CHECK(partial(2) == 0.0);
    CHECK(partial(1) > all(1));  // S_g shrinks to the active entries only
}

TEST_CASE("spec validation") {
    PenaltySpec s = mixed(1.0);
    CHECK_NOTHROW(s.validate(7));
    CHECK_THROWS_AS(s.validate(6), InvalidArgument);

    PenaltySpec overlap = mixed(1.0);
    overlap.groups[1].columns.push_back(2);
    CHECK_THROWS_AS(overlap.validate(7), InvalidArgument);

    PenaltySpec intercept = one_group({0, 1}, 1.0);
    CHECK_THROWS_AS(intercept.validate(3), InvalidArgument);

    PenaltySpec negative = mixed(-1.0);
    CHECK_THROWS_AS(negative.validate(7), InvalidArgument);

    PenaltySpec fat_singleton;
    fat_singleton.groups.push_back({0, {1, 2}, GroupKind::l1_singleton, 0, Subgroup::whole});
    CHECK_THROWS_AS(fat_singleton.validate(3), InvalidArgument);

    const auto lookup = mixed(1.0).group_lookup(8);
    CHECK(lookup == std::vector<int>{-1, 0, 0, 0, 1, 1, 2, -1});
}

}
