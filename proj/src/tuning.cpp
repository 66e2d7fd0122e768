#include "addsel/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "addsel/errors.hpp"
#include "addsel/linalg.hpp"
#include "addsel/parallel.hpp"

namespace addsel {

void TuningConfig::validate() const {
    if (grid_size < 2) {
        throw InvalidArgument("tuning: grid size must be >= 2, got " + std::to_string(grid_size));
    }
    if (!(log10_min < log10_max)) {
        throw InvalidArgument("tuning: log10 grid bounds must satisfy min < max");
    }
    if (!(gamma >= 1.0)) {
        throw InvalidArgument("tuning: gamma must be >= 1, got " + std::to_string(gamma));
    }
    if (pilot_lambda && !(*pilot_lambda > 0.0)) {
        throw InvalidArgument("tuning: pilot lambda must be > 0");
    }
    if (!(pilot_width > 0.0)) {
        throw InvalidArgument("tuning: pilot width must be > 0");
    }
}

std::vector<double> TuningConfig::grid(Eigen::Index n) const {
    validate();
    std::vector<double> values(static_cast<std::size_t>(grid_size));
    const double steps = static_cast<double>(grid_size - 1);
    if (pilot_lambda) {
        const double nn = static_cast<double>(n);
        const double half = std::min(0.999, pilot_width * std::sqrt(std::log(nn) / nn));
        const double lo = *pilot_lambda * (1.0 - half);
        const double hi = *pilot_lambda * (1.0 + half);
        for (int j = 0; j < grid_size; ++j) {
            values[static_cast<std::size_t>(j)] = lo + (hi - lo) * static_cast<double>(j) / steps;
        }
        return values;
    }
    for (int j = 0; j < grid_size; ++j) {
        const double exponent = log10_min + (log10_max - log10_min) * static_cast<double>(j) / steps;
        values[static_cast<std::size_t>(j)] = std::pow(10.0, exponent);
    }
    return values;
}

double effective_df(const Solution& solution, const Problem& problem, double spd_jitter) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < solution.active.size(); ++j) {
        if (solution.active[j]) {
            idx.push_back(static_cast<Eigen::Index>(j));
        }
    }
    const Eigen::MatrixXd gram = problem.data->gram()(idx, idx);
    const Eigen::VectorXd weights = ridge_diagonal(problem, solution.coefficients, solution.active);
    Eigen::MatrixXd system = gram;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        system(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += weights(idx[a]);
    }
    return spd_solve(system, gram, spd_jitter).solution.trace();
}

double mgcv_score(double rss, double df, Eigen::Index n, double gamma) {
    const double nn = static_cast<double>(n);
    const double shrink = 1.0 - gamma * df / nn;
    if (!(shrink > 0.0)) {
        throw SaturatedModel("mgcv: gamma * df = " + std::to_string(gamma * df) + " reaches n = " + std::to_string(n));
    }
    return (rss / nn) / (shrink * shrink);
}

int count_active_groups(const Solution& solution, const PenaltySpec& penalty) {
    int count = 0;
    for (const auto& g : penalty.groups) {
        for (Eigen::Index j : g.columns) {
            if (solution.coefficients(j) != 0.0) {
                ++count;
                break;
            }
        }
    }
    return count;
}

namespace {

TuningRecord score(const Problem& problem, Solution solution, double spd_jitter, double gamma) {
    TuningRecord rec;
    rec.lambda = problem.penalty.lambda;
    rec.solution = std::move(solution);
    rec.rss = rec.solution.rss;
    try {
        rec.df = effective_df(rec.solution, problem, spd_jitter);
    } catch (const NumericalFailure&) {
        rec.status = RecordStatus::numerical_failure;
        rec.mgcv = rec.gcv = std::numeric_limits<double>::infinity();
        return rec;
    }
    rec.active_groups = count_active_groups(rec.solution, problem.penalty);
    const Eigen::Index n = problem.rows();
    try {
        rec.gcv = mgcv_score(rec.rss, rec.df, n, 1.0);
    } catch (const SaturatedModel&) {
        rec.gcv = std::numeric_limits<double>::infinity();
    }
    try {
        rec.mgcv = mgcv_score(rec.rss, rec.df, n, gamma);
    } catch (const SaturatedModel&) {
        rec.status = RecordStatus::saturated;
        rec.mgcv = std::numeric_limits<double>::infinity();
    }
    return rec;
}

TuningRecord failed(const Problem& problem) {
    TuningRecord rec;
    rec.lambda = problem.penalty.lambda;
    rec.status = RecordStatus::numerical_failure;
    rec.mgcv = rec.gcv = std::numeric_limits<double>::infinity();
    return rec;
}

}  // namespace

Eigen::VectorXd warm_start_point(const Eigen::VectorXd& previous, const Eigen::VectorXd& seed,
                                 const PenaltySpec& penalty) {
    if (previous.size() != seed.size()) {
        throw InvalidArgument("warm_start_point: previous and seed differ in length");
    }
    Eigen::VectorXd start = previous;
    std::vector<bool> dropped(static_cast<std::size_t>(previous.size()), false);
    for (const auto& group : penalty.groups) {
        if (group.kind != GroupKind::sqrt_group) {
            continue;
        }
        const bool all_zero = std::all_of(group.columns.begin(), group.columns.end(),
                                          [&](Eigen::Index j) { return previous(j) == 0.0; });
        if (all_zero) {
            for (Eigen::Index j : group.columns) {
                dropped[static_cast<std::size_t>(j)] = true;
            }
        }
    }
    for (Eigen::Index j = 0; j < start.size(); ++j) {
        if (start(j) == 0.0 && !dropped[static_cast<std::size_t>(j)]) {
            start(j) = seed(j);
        }
    }
    return start;
}

TuningResult select_lambda(const ProblemBuilder& builder, const TuningConfig& cfg, const SolverConfig& solver_cfg) {
    cfg.validate();
    solver_cfg.validate();
    const Problem probe = builder(1.0);
    probe.validate();
    const Eigen::VectorXd ridge = initial_estimate(probe, solver_cfg);

    std::vector<double> lambdas = cfg.grid(probe.rows());
    std::reverse(lambdas.begin(), lambdas.end());

    auto start_for = [&](const Problem& problem) -> Eigen::VectorXd {
        return problem.data == probe.data ? ridge : initial_estimate(problem, solver_cfg);
    };

    TuningResult result;
    result.path.resize(lambdas.size());
    if (cfg.warm_start) {
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            const Problem problem = builder(lambdas[i]);
            const Eigen::VectorXd seed = start_for(problem);
            const bool follow = i > 0 && result.path[i - 1].status != RecordStatus::numerical_failure;
            try {
                const Eigen::VectorXd start =
                    follow ? warm_start_point(result.path[i - 1].solution.coefficients, seed, problem.penalty) : seed;
                result.path[i] = score(problem, fit_fixed_lambda(problem, solver_cfg, start), solver_cfg.spd_jitter, cfg.gamma);
            } catch (const NumericalFailure&) {
                result.path[i] = failed(problem);
            }
        }
    } else {
        parallel_for(lambdas.size(), [&](std::size_t i) {
            const Problem problem = builder(lambdas[i]);
            try {
                result.path[i] = score(problem, fit_fixed_lambda(problem, solver_cfg, start_for(problem)),
                                       solver_cfg.spd_jitter, cfg.gamma);
            } catch (const NumericalFailure&) {
                result.path[i] = failed(problem);
            }
        });
    }

    const TuningRecord* best = nullptr;
    for (const auto& rec : result.path) {
        if (rec.status == RecordStatus::ok && (best == nullptr || rec.mgcv < best->mgcv)) {
            best = &rec;
        }
    }
    if (best == nullptr) {
        throw AllSaturated("select_lambda: every grid point is saturated or failed");
    }
    result.best = *best;
    return result;
}

}  // namespace addsel
