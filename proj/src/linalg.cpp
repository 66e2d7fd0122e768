#include "addsel/linalg.hpp"

#include <array>
#include <cmath>

#include "addsel/errors.hpp"

namespace addsel {

SpdSolve spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double base_jitter) {
    const Eigen::Index m = a.rows();
    if (m == 0 || a.cols() != m || b.rows() != m) {
        throw InvalidArgument("spd_solve: dimension mismatch");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw NumericalFailure("spd_solve: non-finite system");
    }
    const double scale = a.trace() / static_cast<double>(m);
    const double b_norm = b.norm();
    const std::array<double, 4> ladder{0.0, base_jitter, 1e2 * base_jitter, 1e4 * base_jitter};

    Eigen::MatrixXd shifted = a;
    for (double rung : ladder) {
        const double jitter = rung * scale;
        if (rung > 0.0 && !(jitter > 0.0)) {
            continue;
        }
        shifted.diagonal() = a.diagonal().array() + jitter;
        Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(shifted);
        if (llt.info() != Eigen::Success) {
            continue;
        }
        Eigen::MatrixXd z = llt.solve(b);
        if (!z.allFinite()) {
            continue;
        }
        if (b_norm == 0.0) {
            return {std::move(z), jitter};
        }
        const double residual = (shifted * z - b).norm();
        if (residual <= 1e-8 * b_norm) {
            return {std::move(z), jitter};
        }
    }
    throw NumericalFailure("spd_solve: Cholesky failed at every jitter level");
}

}  // namespace addsel
