#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "addsel/basis.hpp"
#include "addsel/solver.hpp"
#include "addsel/tuning.hpp"

namespace addsel {

// OLSM: raw truncated power basis, one sqrt group per component.
// WLSM: columns scaled to unit second moment.
// PWLSM: weighted, truncated columns projected off the polynomial block, and
//        polynomial / truncated parts penalized as separate groups.
enum class Method { OLSM, WLSM, PWLSM };
enum class Stage { one_stage, two_stage };

std::string to_string(Method method);
Method parse_method(const std::string& name);
std::string to_string(Stage stage);

// Per-step switches; unset fields take the method's default. Turning all of
// them off for WLSM or PWLSM reproduces OLSM exactly.
struct MethodOverrides {
    std::optional<bool> weight;
    std::optional<bool> project;
    std::optional<bool> split_groups;
};

struct ModelSpec {
    Method method = Method::PWLSM;
    BasisConfig basis;
    TuningConfig tuning;
    SolverConfig solver;
    std::vector<int> linear_terms;  // covariate columns fitted as single L1-penalized terms
    bool two_stage = false;
    MethodOverrides overrides;

    void validate(Eigen::Index covariates) const;
    [[nodiscard]] bool uses_weights() const;
    [[nodiscard]] bool uses_projection() const;
    [[nodiscard]] bool splits_groups() const;
};

// Fitted additive component on the raw basis x, ..., x^(p-1), (x - t_j)_+^(p-1):
//   f(x) = sum_j coefficients[j] B_j(x) - empirical_mean_offset,
// centered to mean zero over the training sample.
struct ComponentEstimate {
    int component_id = 0;
    bool selected = false;
    int order = 3;
    KnotVector knots;
    Eigen::VectorXd coefficients;
    double empirical_mean_offset = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    double lambda = 0.0;  // lambda of the fit that produced this estimate
    double df = 0.0;      // effective df of that fit
};

struct LinearCoefficient {
    int covariate_id = 0;
    double coefficient = 0.0;
};

struct PathPoint {
    double lambda = 0.0;
    double mgcv = 0.0;
    double gcv = 0.0;
    double df = 0.0;
    double rss = 0.0;
    int active_groups = 0;
    RecordStatus status = RecordStatus::ok;
};

struct FitResult {
    double intercept = 0.0;
    std::vector<ComponentEstimate> components;  // one per spline covariate, in column order
    std::vector<LinearCoefficient> linear;
    double lambda = 0.0;  // first-stage lambda
    double mgcv = 0.0;
    double df = 0.0;
    double sigma2_hat = 0.0;
    Method method = Method::PWLSM;
    Stage stage = Stage::one_stage;
    std::vector<PathPoint> tuning_path;
    Eigen::VectorXd fitted;  // in-sample fitted values of the internal representation

    [[nodiscard]] const ComponentEstimate* component(int id) const;
};

// Tuned one-stage fit, or two-stage when spec.two_stage. spec.tuning.warm_start
// only matters with two or more components; a fit with a single spline or
// linear component tunes every grid point from the ridge start.
FitResult fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const ModelSpec& spec);

// Second stage: every selected component s is refit alone on the partial
// residuals y - linear part - sum_{k selected, k != s} f_k with the first-stage
// knots and method and a fresh lambda search. The result's df counts the
// intercept, active linear terms and each refit's non-intercept df.
FitResult two_stage_refit(const FitResult& first, const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                          const ModelSpec& spec);

using ComponentFunction = std::function<double(double)>;

// Fits `target` alone after subtracting every other true component.
ComponentEstimate oracle_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                             const std::vector<ComponentFunction>& truth, int target, const ModelSpec& spec);

Eigen::VectorXd evaluate_component(const ComponentEstimate& estimate, const Eigen::VectorXd& grid);

Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& x_new);

}  // namespace addsel
