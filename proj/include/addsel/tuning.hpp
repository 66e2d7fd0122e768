#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "addsel/solver.hpp"

namespace addsel {

struct TuningConfig {
    int grid_size = 100;
    double log10_min = -5.0;
    double log10_max = 2.0;
    double gamma = 1.5;  // MGCV inflation; values in (1.2, 3) are typical
    bool warm_start = true;
    // When set, replaces the log grid by grid_size evenly spaced values in
    // pilot * [1 - h, 1 + h], h = pilot_width * sqrt(log n / n).
    std::optional<double> pilot_lambda;
    double pilot_width = 1.0;

    void validate() const;
    // Grid values in increasing order.
    [[nodiscard]] std::vector<double> grid(Eigen::Index n) const;
};

enum class RecordStatus { ok, saturated, numerical_failure };

struct TuningRecord {
    double lambda = 0.0;
    double mgcv = 0.0;
    double gcv = 0.0;
    double df = 0.0;
    double rss = 0.0;
    int active_groups = 0;
    RecordStatus status = RecordStatus::ok;
    Solution solution;
};

struct TuningResult {
    TuningRecord best;
    std::vector<TuningRecord> path;  // traversal order: decreasing lambda
};

// trace[(X_A'X_A + D/2)^{-1} X_A'X_A] on the solution's active columns.
double effective_df(const Solution& solution, const Problem& problem, double spd_jitter = 1e-10);

// (rss / n) / (1 - gamma df / n)^2. Throws SaturatedModel when gamma df >= n.
double mgcv_score(double rss, double df, Eigen::Index n, double gamma);

int count_active_groups(const Solution& solution, const PenaltySpec& penalty);

using ProblemBuilder = std::function<Problem(double lambda)>;

// Start point for the next path solve. A sqrt group at zero sits behind an
// infinite penalty slope, so groups zeroed in `previous` stay at zero. Zeroed
// entries of surviving sqrt groups, of L1 singletons and of unpenalized
// columns are re-seeded from `seed` (the ridge estimate). An empty model
// therefore stays empty for the rest of the path.
Eigen::VectorXd warm_start_point(const Eigen::VectorXd& previous, const Eigen::VectorXd& seed,
                                 const PenaltySpec& penalty);

// Solves along the grid from the largest lambda down and returns the MGCV
// minimizer. Ties go to the larger lambda. With warm_start each solve starts
// from warm_start_point of the previous solution.
TuningResult select_lambda(const ProblemBuilder& builder, const TuningConfig& cfg, const SolverConfig& solver_cfg);

}  // namespace addsel
