#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "addsel/penalty.hpp"

namespace addsel {

// Design matrix and response with the cross products every solve needs.
// Immutable once built; shared between the problems of one lambda path.
class LeastSquaresData {
public:
    LeastSquaresData(Eigen::MatrixXd design, Eigen::VectorXd response);

    [[nodiscard]] const Eigen::MatrixXd& design() const { return design_; }
    [[nodiscard]] const Eigen::VectorXd& response() const { return response_; }
    [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
    [[nodiscard]] const Eigen::VectorXd& cross() const { return cross_; }
    [[nodiscard]] double response_square() const { return response_square_; }
    [[nodiscard]] Eigen::Index rows() const { return design_.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return design_.cols(); }

private:
    Eigen::MatrixXd design_;
    Eigen::VectorXd response_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd cross_;
    double response_square_ = 0.0;
};

// Penalized least squares ||y - X b||^2 + penalty(b). Column 0 of the design
// is the all-ones intercept.
struct Problem {
    std::shared_ptr<const LeastSquaresData> data;
    PenaltySpec penalty;

    Problem() = default;
    Problem(std::shared_ptr<const LeastSquaresData> data, PenaltySpec penalty);
    Problem(Eigen::MatrixXd design, Eigen::VectorXd response, PenaltySpec penalty);

    void validate() const;
    [[nodiscard]] Problem with_lambda(double lambda) const;
    [[nodiscard]] Eigen::Index rows() const { return data->rows(); }
    [[nodiscard]] Eigen::Index cols() const { return data->cols(); }
};

struct SolverConfig {
    int max_iterations = 100;
    double rel_tol = 1e-6;
    double ridge_init_delta = 1e-4;
    double spd_jitter = 1e-10;

    void validate() const;
};

struct Solution {
    Eigen::VectorXd coefficients;  // exact zeros at deactivated indices
    std::vector<bool> active;
    double objective = 0.0;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

double residual_sum_squares(const Problem& problem, const Eigen::VectorXd& beta);
double objective_value(const Problem& problem, const Eigen::VectorXd& beta);

// Ridge start (X'X + delta n I0)^{-1} X'y, where I0 is the identity with the
// intercept entry removed.
Eigen::VectorXd initial_estimate(const Problem& problem, const SolverConfig& cfg);

/**
 * Minimizes the penalized sum of squares at the problem's lambda.
 *
 * Each iteration drops penalized coefficients below the zero threshold from the
 * active set (permanently for this call), rebuilds the LQA weights D on the
 * active set and solves the majorizing ridge system
 *     (X_A'X_A + D/2) b_A = X_A'y,
 * whose stationary points are stationary points of the objective. A step that
 * raises the objective is halved toward the previous iterate up to 20 times.
 * At a fixed point, any active penalized coefficient whose removal lowers the
 * exact objective is zeroed and the iteration resumes.
 */
Solution fit_fixed_lambda(const Problem& problem, const SolverConfig& cfg);
Solution fit_fixed_lambda(const Problem& problem, const SolverConfig& cfg, const Eigen::VectorXd& start);

// Ridge-equivalent diagonal D/2 of the system solved at `beta`; the hat operator
// of a solution is X_A (X_A'X_A + D/2)^{-1} X_A'.
Eigen::VectorXd ridge_diagonal(const Problem& problem, const Eigen::VectorXd& beta, const std::vector<bool>& active);

// max over active penalized-or-free non-intercept j of
// |-2 x_j'(y - X b) + d/db_j penalty(b)| / n.
double kkt_residual(const Solution& solution, const Problem& problem);

}  // namespace addsel
