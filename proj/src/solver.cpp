#include "addsel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "addsel/errors.hpp"
#include "addsel/linalg.hpp"

namespace addsel {

namespace {

std::vector<Eigen::Index> active_indices(const std::vector<bool>& active) {
    std::vector<Eigen::Index> idx;
    idx.reserve(active.size());
    for (std::size_t j = 0; j < active.size(); ++j) {
        if (active[j]) {
            idx.push_back(static_cast<Eigen::Index>(j));
        }
    }
    return idx;
}

// Zeroes penalized coefficients below the threshold. Returns true if any changed.
bool deactivate_small(Eigen::VectorXd& beta, std::vector<bool>& active, const std::vector<int>& lookup,
                      double threshold) {
    bool changed = false;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (active[u] && lookup[u] >= 0 && std::abs(beta(j)) < threshold) {
            active[u] = false;
            beta(j) = 0.0;
            changed = true;
        }
    }
    return changed;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// The eps guard shifts the LQA fixed point of a coefficient whose exact optimum
// is zero to roughly eps * k / (1 - k), where k < 1 is the ratio of its RSS
// slope to its penalty slope. When k is close to 1 that lands above the zero
// threshold and the exact stationarity condition fails. At a fixed point each
// active penalized coefficient is therefore checked against the exact change
// in objective from setting it to zero, and dropped whenever that change is
// negative. Returns true if anything was dropped.
bool prune_by_descent(const Problem& problem, Eigen::VectorXd& beta, std::vector<bool>& active,
                      const std::vector<int>& lookup) {
    const auto& gram = problem.data->gram();
    const auto& groups = problem.penalty.groups;
    const double lambda = problem.penalty.lambda;
    Eigen::VectorXd group_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(groups.size()));
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (lookup[static_cast<std::size_t>(j)] >= 0) group_sum(lookup[static_cast<std::size_t>(j)]) += std::abs(beta(j));
    }
    Eigen::VectorXd xr = problem.data->cross() - gram * beta;  // X'(y - X b)
    bool dropped = false;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (!active[u] || lookup[u] < 0 || beta(j) == 0.0) {
            continue;
        }
        const auto& group = groups[static_cast<std::size_t>(lookup[u])];
        const double b = beta(j);
        const double s = group_sum(lookup[u]);
        const double rss_change = b * b * gram(j, j) + 2.0 * b * xr(j);
        const double penalty_change = group.kind == GroupKind::sqrt_group
                                          ? lambda * (std::sqrt(std::max(s - std::abs(b), 0.0)) - std::sqrt(s))
                                          : -lambda * std::abs(b);
        if (rss_change + penalty_change < 0.0) {
            xr += gram.col(j) * b;
            group_sum(lookup[u]) = std::max(s - std::abs(b), 0.0);
            beta(j) = 0.0;
            active[u] = false;
            dropped = true;
        }
    }
    return dropped;
}

}  // namespace

LeastSquaresData::LeastSquaresData(Eigen::MatrixXd design, Eigen::VectorXd response)
    : design_(std::move(design)), response_(std::move(response)) {
    if (design_.rows() != response_.size()) {
        throw InvalidArgument("design has " + std::to_string(design_.rows()) + " rows but response has " +
                              std::to_string(response_.size()) + " entries");
    }
    gram_.resize(design_.cols(), design_.cols());
    gram_.setZero();
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(design_.transpose());
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
    cross_ = design_.transpose() * response_;
    response_square_ = response_.squaredNorm();
}

Problem::Problem(std::shared_ptr<const LeastSquaresData> d, PenaltySpec p) : data(std::move(d)), penalty(std::move(p)) {}

Problem::Problem(Eigen::MatrixXd design, Eigen::VectorXd response, PenaltySpec p)
    : data(std::make_shared<const LeastSquaresData>(std::move(design), std::move(response))), penalty(std::move(p)) {}

void Problem::validate() const {
    if (!data) {
        throw InvalidArgument("problem has no data");
    }
    const auto& x = data->design();
    if (x.rows() < 2 || x.cols() < 1) {
        throw InvalidArgument("problem needs n >= 2 rows and at least the intercept column");
    }
    if (!x.allFinite() || !data->response().allFinite()) {
        throw InvalidArgument("problem contains non-finite entries");
    }
    if (!(x.col(0).array() == 1.0).all()) {
        throw InvalidArgument("first design column must be the all-ones intercept");
    }
    penalty.validate(x.cols());
}

Problem Problem::with_lambda(double lambda) const {
    Problem out = *this;
    out.penalty.lambda = lambda;
    return out;
}

void SolverConfig::validate() const {
    if (max_iterations < 1 || !(rel_tol > 0.0) || !(ridge_init_delta > 0.0) || !(spd_jitter > 0.0)) {
        throw InvalidArgument("solver config: all fields must be positive");
    }
}

double residual_sum_squares(const Problem& problem, const Eigen::VectorXd& beta) {
    return (problem.data->response() - problem.data->design() * beta).squaredNorm();
}

double objective_value(const Problem& problem, const Eigen::VectorXd& beta) {
    return residual_sum_squares(problem, beta) + penalty_value(beta, problem.penalty);
}

Eigen::VectorXd initial_estimate(const Problem& problem, const SolverConfig& cfg) {
    problem.validate();
    const auto& gram = problem.data->gram();
    const Eigen::Index m = gram.cols();
    Eigen::MatrixXd a = gram;
    const double shift = cfg.ridge_init_delta * static_cast<double>(problem.rows());
    for (Eigen::Index j = 1; j < m; ++j) {
        a(j, j) += shift;
    }
    return spd_solve(a, problem.data->cross(), cfg.spd_jitter).solution.col(0);
}

Eigen::VectorXd ridge_diagonal(const Problem& problem, const Eigen::VectorXd& beta, const std::vector<bool>& active) {
    return 0.5 * lqa_diagonal(beta, problem.penalty, active);
}

Solution fit_fixed_lambda(const Problem& problem, const SolverConfig& cfg) {
    return fit_fixed_lambda(problem, cfg, initial_estimate(problem, cfg));
}

Solution fit_fixed_lambda(const Problem& problem, const SolverConfig& cfg, const Eigen::VectorXd& start) {
    problem.validate();
    cfg.validate();
    const Eigen::Index m = problem.cols();
    if (start.size() != m) {
        throw InvalidArgument("fit_fixed_lambda: start vector has wrong length");
    }
    const auto lookup = problem.penalty.group_lookup(m);
    const auto& gram = problem.data->gram();
    const auto& cross = problem.data->cross();
    const double objective_floor = 1e-14 * (1.0 + problem.data->response_square());

    Solution sol;
    sol.coefficients = start;
    sol.active.assign(static_cast<std::size_t>(m), true);
    deactivate_small(sol.coefficients, sol.active, lookup, problem.penalty.zero_threshold);
    sol.objective = objective_value(problem, sol.coefficients);
    if (!std::isfinite(sol.objective)) {
        throw NonFiniteObjective("fit_fixed_lambda: non-finite objective at start");
    }

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        if (deactivate_small(sol.coefficients, sol.active, lookup, problem.penalty.zero_threshold)) {
            sol.objective = objective_value(problem, sol.coefficients);
        }
        const auto idx = active_indices(sol.active);
        const Eigen::VectorXd weights = ridge_diagonal(problem, sol.coefficients, sol.active);

        Eigen::MatrixXd system = gram(idx, idx);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            system(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += weights(idx[a]);
        }
        const Eigen::VectorXd rhs = cross(idx);
        const Eigen::VectorXd z = spd_solve(system, rhs, cfg.spd_jitter).solution.col(0);

        Eigen::VectorXd candidate = Eigen::VectorXd::Zero(m);
        candidate(idx) = z;
        const double step = max_abs(candidate - sol.coefficients);
        const double scale = 1.0 + max_abs(sol.coefficients);
        double cand_objective = objective_value(problem, candidate);
        if (!std::isfinite(cand_objective)) {
            throw NonFiniteObjective("fit_fixed_lambda: non-finite objective at iteration " + std::to_string(it));
        }

        bool accepted = cand_objective <= sol.objective + 1e-12 * std::abs(sol.objective);
        for (int h = 0; h < 20 && !accepted; ++h) {
            candidate = 0.5 * (candidate + sol.coefficients);
            cand_objective = objective_value(problem, candidate);
            accepted = cand_objective <= sol.objective;
        }
        sol.iterations = it;
        if (!accepted) {
            // No descent direction left along this update; it is a fixed point
            // only if the raw step was already negligible.
            sol.converged = step <= cfg.rel_tol * scale;
            if (sol.converged && prune_by_descent(problem, sol.coefficients, sol.active, lookup)) {
                sol.converged = false;
                sol.objective = objective_value(problem, sol.coefficients);
                continue;
            }
            break;
        }

        const double objective_change = std::abs(sol.objective - cand_objective);
        const double previous_objective = sol.objective;
        sol.coefficients = std::move(candidate);
        sol.objective = cand_objective;

        if (step <= cfg.rel_tol * scale && objective_change <= cfg.rel_tol * std::abs(previous_objective) + objective_floor) {
            bool pending = false;
            for (Eigen::Index j = 0; j < m; ++j) {
                const auto u = static_cast<std::size_t>(j);
                if (sol.active[u] && lookup[u] >= 0 && std::abs(sol.coefficients(j)) < problem.penalty.zero_threshold) {
                    pending = true;
                    break;
                }
            }
            if (!pending && prune_by_descent(problem, sol.coefficients, sol.active, lookup)) {
                sol.objective = objective_value(problem, sol.coefficients);
                continue;
            }
            if (!pending) {
                sol.converged = true;
                break;
            }
        }
    }
    if (deactivate_small(sol.coefficients, sol.active, lookup, problem.penalty.zero_threshold)) {
        sol.objective = objective_value(problem, sol.coefficients);
    }
    sol.rss = residual_sum_squares(problem, sol.coefficients);
    return sol;
}

double kkt_residual(const Solution& solution, const Problem& problem) {
    const auto& x = problem.data->design();
    const Eigen::VectorXd residual = problem.data->response() - x * solution.coefficients;
    const Eigen::VectorXd grad = exact_subgradient(solution.coefficients, problem.penalty);
    double worst = 0.0;
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
        if (!solution.active[static_cast<std::size_t>(j)]) {
            continue;
        }
        const double g = std::isnan(grad(j)) ? 0.0 : grad(j);
        worst = std::max(worst, std::abs(-2.0 * x.col(j).dot(residual) + g));
    }
    return worst / static_cast<double>(x.rows());
}

}  // namespace addsel
