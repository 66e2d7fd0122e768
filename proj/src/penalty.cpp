#include "addsel/penalty.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "addsel/errors.hpp"

namespace addsel {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double group_abs_sum(const Eigen::VectorXd& beta, const PenaltyGroup& g) {
    double s = 0.0;
    for (Eigen::Index j : g.columns) {
        s += std::abs(beta(j));
    }
    return s;
}

}  // namespace

void PenaltySpec::validate(Eigen::Index m) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("penalty: lambda must be finite and >= 0");
    }
    if (!(epsilon_guard > 0.0)) {
        throw InvalidArgument("penalty: epsilon_guard must be > 0");
    }
    if (!(zero_threshold > 0.0)) {
        throw InvalidArgument("penalty: zero_threshold must be > 0");
    }
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (const auto& g : groups) {
        if (g.columns.empty()) {
            throw InvalidArgument("penalty: group " + std::to_string(g.group_id) + " is empty");
        }
        if (g.kind == GroupKind::l1_singleton && g.columns.size() != 1) {
            throw InvalidArgument("penalty: l1 singleton group " + std::to_string(g.group_id) +
                                  " must have exactly one index");
        }
        for (Eigen::Index j : g.columns) {
            if (j <= 0 || j >= m) {
                throw InvalidArgument("penalty: index " + std::to_string(j) + " out of range (intercept excluded)");
            }
            if (seen[static_cast<std::size_t>(j)]) {
                throw InvalidArgument("penalty: index " + std::to_string(j) + " appears in two groups");
            }
            seen[static_cast<std::size_t>(j)] = true;
        }
    }
}

std::vector<int> PenaltySpec::group_lookup(Eigen::Index m) const {
    std::vector<int> lookup(static_cast<std::size_t>(m), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (Eigen::Index j : groups[g].columns) {
            lookup[static_cast<std::size_t>(j)] = static_cast<int>(g);
        }
    }
    return lookup;
}

double penalty_value(const Eigen::VectorXd& beta, const PenaltySpec& spec) {
    double total = 0.0;
    for (const auto& g : spec.groups) {
        const double s = group_abs_sum(beta, g);
        total += g.kind == GroupKind::sqrt_group ? std::sqrt(s) : s;
    }
    return spec.lambda * total;
}

Eigen::VectorXd lqa_diagonal(const Eigen::VectorXd& beta, const PenaltySpec& spec, const std::vector<bool>& active) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(beta.size());
    const double eps = spec.epsilon_guard;
    auto is_active = [&](Eigen::Index j) { return active.empty() || active[static_cast<std::size_t>(j)]; };
    for (const auto& g : spec.groups) {
        if (g.kind == GroupKind::sqrt_group) {
            double s = 0.0;
            for (Eigen::Index j : g.columns) {
                if (is_active(j)) {
                    s += std::abs(beta(j));
                }
            }
            const double root = std::sqrt(s + eps);
            for (Eigen::Index j : g.columns) {
                if (is_active(j)) {
                    diag(j) = spec.lambda / (2.0 * (std::abs(beta(j)) + eps) * root);
                }
            }
        } else {
            const Eigen::Index j = g.columns.front();
            if (is_active(j)) {
                diag(j) = spec.lambda / (std::abs(beta(j)) + eps);
            }
        }
    }
    return diag;
}

double exact_subgradient(const Eigen::VectorXd& beta, const PenaltySpec& spec, Eigen::Index j) {
    for (const auto& g : spec.groups) {
        for (Eigen::Index c : g.columns) {
            if (c != j) {
                continue;
            }
            if (std::abs(beta(j)) < spec.zero_threshold) {
                throw UndefinedAtZero("exact_subgradient: coefficient " + std::to_string(j) + " is zero");
            }
            if (g.kind == GroupKind::l1_singleton) {
                return spec.lambda * sign(beta(j));
            }
            return spec.lambda * sign(beta(j)) / (2.0 * std::sqrt(group_abs_sum(beta, g)));
        }
    }
    return 0.0;
}

Eigen::VectorXd exact_subgradient(const Eigen::VectorXd& beta, const PenaltySpec& spec) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(beta.size());
    for (const auto& g : spec.groups) {
        const double root = std::sqrt(group_abs_sum(beta, g));
        for (Eigen::Index j : g.columns) {
            if (std::abs(beta(j)) < spec.zero_threshold) {
                grad(j) = std::numeric_limits<double>::quiet_NaN();
            } else if (g.kind == GroupKind::l1_singleton) {
                grad(j) = spec.lambda * sign(beta(j));
            } else {
                grad(j) = spec.lambda * sign(beta(j)) / (2.0 * root);
            }
        }
    }
    return grad;
}

}  // namespace addsel
