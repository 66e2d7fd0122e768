#pragma once

#include <Eigen/Dense>

namespace addsel {

// Result of a jittered Cholesky solve. `jitter` is the diagonal shift that
// produced the first acceptable factorization.
struct SpdSolve {
    Eigen::MatrixXd solution;
    double jitter = 0.0;
};

// Solves A z = b for symmetric positive (semi)definite A. Tries the jitter
// ladder {0, 1, 1e2, 1e4} * base_jitter * trace(A)/m (with the default base:
// {0, 1e-10, 1e-8, 1e-6} * trace(A)/m) and accepts the first Cholesky
// factorization whose relative residual ||(A + jI) z - b|| / ||b|| is at most
// 1e-8. Throws NumericalFailure when every rung fails.
SpdSolve spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double base_jitter = 1e-10);

}  // namespace addsel
