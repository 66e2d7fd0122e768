#include "addsel/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <span>

#include "addsel/errors.hpp"

namespace addsel {

std::string to_string(Method method) {
    switch (method) {
        case Method::OLSM: return "olsm";
        case Method::WLSM: return "wlsm";
        case Method::PWLSM: return "pwlsm";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "olsm") return Method::OLSM;
    if (lower == "wlsm") return Method::WLSM;
    if (lower == "pwlsm") return Method::PWLSM;
    throw InvalidArgument("unknown method '" + name + "' (expected olsm, wlsm or pwlsm)");
}

std::string to_string(Stage stage) { return stage == Stage::one_stage ? "one_stage" : "two_stage"; }

void ModelSpec::validate(Eigen::Index covariates) const {
    basis.validate();
    tuning.validate();
    solver.validate();
    std::vector<bool> seen(static_cast<std::size_t>(covariates), false);
    for (int id : linear_terms) {
        if (id < 0 || id >= covariates) {
            throw InvalidArgument("linear term " + std::to_string(id) + " is not a covariate column");
        }
        if (seen[static_cast<std::size_t>(id)]) {
            throw InvalidArgument("linear term " + std::to_string(id) + " listed twice");
        }
        seen[static_cast<std::size_t>(id)] = true;
    }
}

bool ModelSpec::uses_weights() const { return overrides.weight.value_or(method != Method::OLSM); }
bool ModelSpec::uses_projection() const { return overrides.project.value_or(method == Method::PWLSM); }
bool ModelSpec::splits_groups() const { return overrides.split_groups.value_or(method == Method::PWLSM); }

const ComponentEstimate* FitResult::component(int id) const {
    for (const auto& c : components) {
        if (c.component_id == id) {
            return &c;
        }
    }
    return nullptr;
}

Eigen::VectorXd evaluate_component(const ComponentEstimate& estimate, const Eigen::VectorXd& grid) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
    if (!estimate.selected) {
        return out;
    }
    std::vector<double> row(static_cast<std::size_t>(estimate.coefficients.size()));
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        evaluate_basis_row(grid(i), estimate.knots.knots, estimate.order, row);
        double value = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            value += row[j] * estimate.coefficients(static_cast<Eigen::Index>(j));
        }
        out(i) = value - estimate.empirical_mean_offset;
    }
    return out;
}

Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& x_new) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x_new.rows(), fit.intercept);
    for (const auto& lin : fit.linear) {
        if (lin.covariate_id >= x_new.cols()) {
            throw InvalidArgument("predict: covariate " + std::to_string(lin.covariate_id) + " missing");
        }
        out += lin.coefficient * x_new.col(lin.covariate_id);
    }
    for (const auto& c : fit.components) {
        if (c.component_id >= x_new.cols()) {
            throw InvalidArgument("predict: covariate " + std::to_string(c.component_id) + " missing");
        }
        if (c.selected) {
            out += evaluate_component(c, x_new.col(c.component_id));
        }
    }
    return out;
}

namespace {

struct Block {
    ComponentBasis basis;
    Eigen::Index offset = 0;
};

struct LinearColumn {
    int covariate = 0;
    double weight = 1.0;
    Eigen::Index offset = 0;
};

struct Assembly {
    std::vector<Block> blocks;
    std::vector<LinearColumn> linear;
    std::shared_ptr<const LeastSquaresData> data;
    PenaltySpec penalty;
};

std::span<const double> column_span(const Eigen::MatrixXd& x, Eigen::Index k) {
    return {x.col(k).data(), static_cast<std::size_t>(x.rows())};
}

Assembly assemble(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const std::vector<int>& spline_ids,
                  const std::vector<KnotVector>& knots, const std::vector<int>& linear_ids, const ModelSpec& spec) {
    const Eigen::Index n = x.rows();
    Assembly out;
    Eigen::Index m = 1;
    for (std::size_t s = 0; s < spline_ids.size(); ++s) {
        ComponentBasis b = build_design(column_span(x, spline_ids[s]), knots[s], spec.basis.order);
        if (spec.uses_weights()) {
            b = weight_columns(std::move(b), spec.basis.weight_rule);
        }
        if (spec.uses_projection()) {
            b = project_truncated(std::move(b));
        }
        const Eigen::Index cols = b.column_count();
        if (n <= cols + 2) {
            throw InvalidArgument("fit: n = " + std::to_string(n) + " must exceed " + std::to_string(cols + 2) +
                                  " (basis columns per component + 2)");
        }
        out.blocks.push_back({std::move(b), m});
        m += cols;
    }
    for (int id : linear_ids) {
        const double second_moment = x.col(id).squaredNorm() / static_cast<double>(n);
        if (!(second_moment > 0.0)) {
            throw ZeroColumn("linear term " + std::to_string(id) + " is identically zero");
        }
        out.linear.push_back({id, 1.0 / std::sqrt(second_moment), m});
        ++m;
    }

    Eigen::MatrixXd design(n, m);
    design.col(0).setOnes();
    int group_id = 0;
    for (const auto& block : out.blocks) {
        design.middleCols(block.offset, block.basis.column_count()) = block.basis.columns;
        const Eigen::Index poly = block.basis.polynomial_count();
        auto range = [&](Eigen::Index from, Eigen::Index count) {
            std::vector<Eigen::Index> cols(static_cast<std::size_t>(count));
            for (Eigen::Index j = 0; j < count; ++j) {
                cols[static_cast<std::size_t>(j)] = block.offset + from + j;
            }
            return cols;
        };
        if (spec.splits_groups()) {
            out.penalty.groups.push_back(
                {group_id++, range(0, poly), GroupKind::sqrt_group, block.basis.component_id, Subgroup::polynomial});
            out.penalty.groups.push_back({group_id++, range(poly, block.basis.truncated_count()),
                                          GroupKind::sqrt_group, block.basis.component_id, Subgroup::truncated});
        } else {
            out.penalty.groups.push_back({group_id++, range(0, block.basis.column_count()), GroupKind::sqrt_group,
                                          block.basis.component_id, Subgroup::whole});
        }
    }
    for (const auto& lin : out.linear) {
        design.col(lin.offset) = lin.weight * x.col(lin.covariate);
        out.penalty.groups.push_back({group_id++, {lin.offset}, GroupKind::l1_singleton, lin.covariate, Subgroup::whole});
    }
    out.data = std::make_shared<const LeastSquaresData>(std::move(design), y);
    return out;
}

struct Mapped {
    double intercept = 0.0;
    std::vector<ComponentEstimate> components;
    std::vector<LinearCoefficient> linear;
};

// Re-expresses internal coefficients on the raw basis, then centers every
// component over the training sample, moving its mean into the intercept.
Mapped map_back(const Assembly& assembly, const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, double lambda,
                double df) {
    Mapped out;
    out.intercept = beta(0);
    for (const auto& block : assembly.blocks) {
        const auto& b = block.basis;
        const Eigen::Index poly = b.polynomial_count();
        const Eigen::Index trunc = b.truncated_count();
        const Eigen::VectorXd internal = beta.segment(block.offset, b.column_count());

        ComponentEstimate est;
        est.component_id = b.component_id;
        est.order = b.order;
        est.knots = b.knots;
        est.lambda = lambda;
        est.df = df;
        const auto xs = x.col(b.component_id);
        est.x_min = xs.minCoeff();
        est.x_max = xs.maxCoeff();
        est.selected = (internal.array() != 0.0).any();
        est.coefficients = Eigen::VectorXd::Zero(b.column_count());
        if (est.selected) {
            Eigen::VectorXd weighted = internal;
            if (b.projected) {
                weighted.head(poly) -= b.projection_loadings.bottomRows(poly) * internal.tail(trunc);
                out.intercept -= b.projection_loadings.row(0).dot(internal.tail(trunc));
            }
            est.coefficients = weighted.cwiseProduct(b.column_weights);
            est.empirical_mean_offset = 0.0;
            const Eigen::VectorXd values = evaluate_component(est, xs);
            est.empirical_mean_offset = values.mean();
            out.intercept += est.empirical_mean_offset;
        }
        out.components.push_back(std::move(est));
    }
    for (const auto& lin : assembly.linear) {
        out.linear.push_back({lin.covariate, beta(lin.offset) * lin.weight});
    }
    return out;
}

std::vector<PathPoint> summarize_path(const std::vector<TuningRecord>& path) {
    std::vector<PathPoint> out;
    out.reserve(path.size());
    for (const auto& r : path) {
        out.push_back({r.lambda, r.mgcv, r.gcv, r.df, r.rss, r.active_groups, r.status});
    }
    return out;
}

struct AssembledFit {
    Assembly assembly;
    TuningResult tuning;
};

AssembledFit run_tuned(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const std::vector<int>& spline_ids,
                       const std::vector<KnotVector>& knots, const std::vector<int>& linear_ids,
                       const ModelSpec& spec) {
    AssembledFit out{assemble(y, x, spline_ids, knots, linear_ids, spec), {}};
    const auto& data = out.assembly.data;
    const auto& penalty = out.assembly.penalty;
    // Keeping zeroed groups at zero along the path screens out noise components.
    // With a single component there is nothing to screen, and the sticky path
    // would lock in a truncated group that dies at the largest lambda, so every
    // grid point starts from the ridge estimate instead.
    TuningConfig tuning = spec.tuning;
    if (spline_ids.size() + linear_ids.size() <= 1) {
        tuning.warm_start = false;
    }
    out.tuning = select_lambda(
        [&](double lambda) {
            PenaltySpec p = penalty;
            p.lambda = lambda;
            return Problem(data, std::move(p));
        },
        tuning, spec.solver);
    return out;
}

struct UnivariateFit {
    ComponentEstimate estimate;
    double intercept = 0.0;
    double lambda = 0.0;
    double mgcv = 0.0;
    double df = 0.0;
};

UnivariateFit fit_univariate(std::span<const double> xs, const Eigen::VectorXd& y, int component_id,
                             const KnotVector& knots, const ModelSpec& spec) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd x1 = Eigen::Map<const Eigen::VectorXd>(xs.data(), n);
    KnotVector k = knots;
    k.component_id = 0;
    AssembledFit af = run_tuned(y, x1, {0}, {k}, {}, spec);
    const auto& best = af.tuning.best;
    Mapped mapped = map_back(af.assembly, best.solution.coefficients, x1, best.lambda, best.df);
    UnivariateFit out{std::move(mapped.components.front()), mapped.intercept, best.lambda, best.mgcv, best.df};
    out.estimate.component_id = component_id;
    out.estimate.knots.component_id = component_id;
    return out;
}

}  // namespace

FitResult fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const ModelSpec& spec) {
    if (y.size() != x.rows()) {
        throw InvalidArgument("fit: response length does not match covariate rows");
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw InvalidArgument("fit: data contains missing or non-finite values");
    }
    spec.validate(x.cols());
    std::vector<bool> is_linear(static_cast<std::size_t>(x.cols()), false);
    for (int id : spec.linear_terms) {
        is_linear[static_cast<std::size_t>(id)] = true;
    }
    std::vector<int> spline_ids;
    std::vector<KnotVector> knots;
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (!is_linear[static_cast<std::size_t>(k)]) {
            spline_ids.push_back(static_cast<int>(k));
            knots.push_back(place_knots(column_span(x, k), spec.basis, static_cast<int>(k)));
        }
    }

    AssembledFit af = run_tuned(y, x, spline_ids, knots, spec.linear_terms, spec);
    const auto& best = af.tuning.best;
    Mapped mapped = map_back(af.assembly, best.solution.coefficients, x, best.lambda, best.df);

    FitResult result;
    result.intercept = mapped.intercept;
    result.components = std::move(mapped.components);
    result.linear = std::move(mapped.linear);
    result.lambda = best.lambda;
    result.mgcv = best.mgcv;
    result.df = best.df;
    const double n = static_cast<double>(x.rows());
    result.sigma2_hat = best.rss / std::max(n - best.df, 1.0);
    result.method = spec.method;
    result.stage = Stage::one_stage;
    result.tuning_path = summarize_path(af.tuning.path);
    result.fitted = af.assembly.data->design() * best.solution.coefficients;

    if (spec.two_stage && std::any_of(result.components.begin(), result.components.end(),
                                      [](const ComponentEstimate& c) { return c.selected; })) {
        return two_stage_refit(result, y, x, spec);
    }
    if (spec.two_stage) {
        result.stage = Stage::two_stage;
    }
    return result;
}

FitResult two_stage_refit(const FitResult& first, const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                          const ModelSpec& spec) {
    if (first.stage != Stage::one_stage) {
        throw InvalidArgument("two_stage_refit: input must be a one-stage fit");
    }
    const Eigen::Index n = x.rows();
    Eigen::VectorXd linear_part = Eigen::VectorXd::Zero(n);
    int active_linear = 0;
    for (const auto& lin : first.linear) {
        linear_part += lin.coefficient * x.col(lin.covariate_id);
        active_linear += lin.coefficient != 0.0 ? 1 : 0;
    }
    std::vector<std::size_t> selected;
    Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::VectorXd> contributions(first.components.size());
    for (std::size_t c = 0; c < first.components.size(); ++c) {
        const auto& est = first.components[c];
        if (est.selected) {
            selected.push_back(c);
            contributions[c] = evaluate_component(est, x.col(est.component_id));
            total += contributions[c];
        }
    }
    if (selected.empty()) {
        throw InvalidArgument("two_stage_refit: no component was selected in the first stage");
    }

    FitResult result = first;
    result.stage = Stage::two_stage;
    double df = 1.0 + active_linear;
    for (std::size_t c : selected) {
        const auto& est = first.components[c];
        const Eigen::VectorXd partial = y - linear_part - (total - contributions[c]);
        UnivariateFit uni = fit_univariate(column_span(x, est.component_id), partial, est.component_id, est.knots, spec);
        uni.estimate.x_min = est.x_min;
        uni.estimate.x_max = est.x_max;
        df += uni.df - 1.0;
        result.components[c] = std::move(uni.estimate);
    }
    Eigen::VectorXd without_intercept = linear_part;
    for (const auto& c : result.components) {
        if (c.selected) {
            without_intercept += evaluate_component(c, x.col(c.component_id));
        }
    }
    result.intercept = (y - without_intercept).mean();
    result.fitted = without_intercept.array() + result.intercept;
    result.df = df;
    const double rss = (y - result.fitted).squaredNorm();
    result.sigma2_hat = rss / std::max(static_cast<double>(n) - df, 1.0);
    return result;
}

ComponentEstimate oracle_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                             const std::vector<ComponentFunction>& truth, int target, const ModelSpec& spec) {
    if (static_cast<Eigen::Index>(truth.size()) != x.cols()) {
        throw InvalidArgument("oracle_fit: need one true function per covariate");
    }
    if (target < 0 || target >= x.cols()) {
        throw InvalidArgument("oracle_fit: target out of range");
    }
    spec.validate(x.cols());
    Eigen::VectorXd partial = y;
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (k == target) {
            continue;
        }
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            partial(i) -= truth[static_cast<std::size_t>(k)](x(i, k));
        }
    }
    const auto xs = column_span(x, target);
    const KnotVector knots = place_knots(xs, spec.basis, target);
    UnivariateFit uni = fit_univariate(xs, partial, target, knots, spec);
    uni.estimate.x_min = x.col(target).minCoeff();
    uni.estimate.x_max = x.col(target).maxCoeff();
    return uni.estimate;
}

}  // namespace addsel
