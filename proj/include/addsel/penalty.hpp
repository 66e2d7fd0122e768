#pragma once

#include <vector>

#include <Eigen/Dense>

namespace addsel {

enum class GroupKind { sqrt_group, l1_singleton };
enum class Subgroup { whole, polynomial, truncated };

// A set of coefficient indices penalized jointly. The intercept (index 0) is
// never part of a group.
struct PenaltyGroup {
    int group_id = 0;
    std::vector<Eigen::Index> columns;
    GroupKind kind = GroupKind::sqrt_group;
    int component_id = 0;
    Subgroup subgroup = Subgroup::whole;
};

struct PenaltySpec {
    std::vector<PenaltyGroup> groups;
    double lambda = 0.0;
    double epsilon_guard = 1e-8;
    double zero_threshold = 1e-6;

    // Checks the numeric invariants and that groups are disjoint, exclude the
    // intercept and fit inside a coefficient vector of length m.
    void validate(Eigen::Index m) const;

    // Group position for each of the m coefficients, -1 for unpenalized ones.
    [[nodiscard]] std::vector<int> group_lookup(Eigen::Index m) const;
};

// lambda * (sum over sqrt groups of sqrt(sum |b_j|) + sum over singletons of |b_j|)
double penalty_value(const Eigen::VectorXd& beta, const PenaltySpec& spec);

// Local quadratic approximation weights pen'_j(b) / |b_j| with the epsilon guard:
//   sqrt group:  lambda / (2 (|b_j| + eps) sqrt(S_g + eps)),  S_g = sum_{l in g} |b_l|
//   singleton:   lambda / (|b_j| + eps)
// Entries outside any group, and entries with active[j] == false, are 0.
// An empty `active` means every index is active.
Eigen::VectorXd lqa_diagonal(const Eigen::VectorXd& beta, const PenaltySpec& spec,
                             const std::vector<bool>& active = {});

// d/db_j of penalty_value. Throws UndefinedAtZero when |b_j| < zero_threshold
// for a penalized index; returns 0 for unpenalized indices.
double exact_subgradient(const Eigen::VectorXd& beta, const PenaltySpec& spec, Eigen::Index j);

// Vector form of exact_subgradient; entries where it is undefined are NaN.
Eigen::VectorXd exact_subgradient(const Eigen::VectorXd& beta, const PenaltySpec& spec);

}  // namespace addsel
