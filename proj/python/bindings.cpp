#include <algorithm>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "addsel/errors.hpp"
#include "addsel/io.hpp"
#include "addsel/model.hpp"
#include "addsel/simbench.hpp"
#include "addsel/tuning.hpp"

namespace py = pybind11;
using namespace addsel;

namespace {

py::dict dataset_dict(const Dataset& d) {
    py::dict out;
    out["x"] = d.x;
    out["y"] = d.y;
    out["signal"] = d.signal;
    return out;
}

py::dict path_dict(const std::vector<PathPoint>& path) {
    const auto n = static_cast<Eigen::Index>(path.size());
    Eigen::VectorXd lambda(n), mgcv(n), gcv(n), df(n), rss(n);
    Eigen::VectorXi groups(n);
    std::vector<std::string> status;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = path[static_cast<std::size_t>(i)];
        lambda(i) = p.lambda;
        mgcv(i) = p.mgcv;
        gcv(i) = p.gcv;
        df(i) = p.df;
        rss(i) = p.rss;
        groups(i) = p.active_groups;
        status.push_back(p.status == RecordStatus::ok          ? "ok"
                         : p.status == RecordStatus::saturated ? "saturated"
                                                               : "numerical_failure");
    }
    py::dict out;
    out["lambda"] = lambda;
    out["mgcv"] = mgcv;
    out["gcv"] = gcv;
    out["df"] = df;
    out["rss"] = rss;
    out["active_groups"] = groups;
    out["status"] = status;
    return out;
}

}  // namespace

PYBIND11_MODULE(_addsel, m) {
    m.doc() = "Sparse additive models with penalized truncated-power splines";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<MissingFit>(m, "MissingFit", base.ptr());
    py::register_exception<TooFewDistinctValues>(m, "TooFewDistinctValues", base.ptr());
    py::register_exception<AllSaturated>(m, "AllSaturated", base.ptr());
    py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());

    py::enum_<Method>(m, "Method")
        .value("OLSM", Method::OLSM)
        .value("WLSM", Method::WLSM)
        .value("PWLSM", Method::PWLSM);
    py::enum_<Stage>(m, "Stage").value("one_stage", Stage::one_stage).value("two_stage", Stage::two_stage);
    py::enum_<KnotRule>(m, "KnotRule")
        .value("interior_quantile", KnotRule::interior_quantile)
        .value("order_statistic", KnotRule::order_statistic);
    py::enum_<WeightRule>(m, "WeightRule")
        .value("second_moment", WeightRule::second_moment)
        .value("inverse_gram_diagonal", WeightRule::inverse_gram_diagonal);

    py::class_<BasisConfig>(m, "BasisConfig")
        .def(py::init<>())
        .def_readwrite("order", &BasisConfig::order)
        .def_readwrite("knot_count", &BasisConfig::knot_count)
        .def_readwrite("knot_rule", &BasisConfig::knot_rule)
        .def_readwrite("weight_rule", &BasisConfig::weight_rule);

    py::class_<TuningConfig>(m, "TuningConfig")
        .def(py::init<>())
        .def_readwrite("grid_size", &TuningConfig::grid_size)
        .def_readwrite("log10_min", &TuningConfig::log10_min)
        .def_readwrite("log10_max", &TuningConfig::log10_max)
        .def_readwrite("gamma", &TuningConfig::gamma)
        .def_readwrite("warm_start", &TuningConfig::warm_start)
        .def_readwrite("pilot_lambda", &TuningConfig::pilot_lambda)
        .def_readwrite("pilot_width", &TuningConfig::pilot_width)
        .def("grid", &TuningConfig::grid, py::arg("n"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("max_iterations", &SolverConfig::max_iterations)
        .def_readwrite("rel_tol", &SolverConfig::rel_tol)
        .def_readwrite("ridge_init_delta", &SolverConfig::ridge_init_delta);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def(py::init<>())
        .def_readwrite("method", &ModelSpec::method)
        .def_readwrite("basis", &ModelSpec::basis)
        .def_readwrite("tuning", &ModelSpec::tuning)
        .def_readwrite("solver", &ModelSpec::solver)
        .def_readwrite("linear_terms", &ModelSpec::linear_terms)
        .def_readwrite("two_stage", &ModelSpec::two_stage)
        .def("validate", &ModelSpec::validate, py::arg("covariates"));

    py::class_<ComponentEstimate>(m, "ComponentEstimate")
        .def_readonly("component_id", &ComponentEstimate::component_id)
        .def_readonly("selected", &ComponentEstimate::selected)
        .def_readonly("order", &ComponentEstimate::order)
        .def_property_readonly("knots", [](const ComponentEstimate& c) { return c.knots.knots; })
        .def_readonly("coefficients", &ComponentEstimate::coefficients)
        .def_readonly("empirical_mean_offset", &ComponentEstimate::empirical_mean_offset)
        .def_readonly("x_min", &ComponentEstimate::x_min)
        .def_readonly("x_max", &ComponentEstimate::x_max)
        .def_readonly("lambda_", &ComponentEstimate::lambda)
        .def_readonly("df", &ComponentEstimate::df)
        .def("__call__", [](const ComponentEstimate& c, const Eigen::VectorXd& x) { return evaluate_component(c, x); },
             py::arg("x"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("components", &FitResult::components)
        .def_property_readonly("linear",
                               [](const FitResult& f) {
                                   py::dict out;
                                   for (const auto& l : f.linear) out[py::int_(l.covariate_id)] = l.coefficient;
                                   return out;
                               })
        .def_readonly("lambda_", &FitResult::lambda)
        .def_readonly("mgcv", &FitResult::mgcv)
        .def_readonly("df", &FitResult::df)
        .def_readonly("sigma2_hat", &FitResult::sigma2_hat)
        .def_readonly("method", &FitResult::method)
        .def_readonly("stage", &FitResult::stage)
        .def_readonly("fitted", &FitResult::fitted)
        .def_property_readonly("tuning_path", [](const FitResult& f) { return path_dict(f.tuning_path); })
        .def_property_readonly("selected",
                               [](const FitResult& f) {
                                   std::vector<int> ids;
                                   for (const auto& c : f.components) {
                                       if (c.selected) ids.push_back(c.component_id);
                                   }
                                   for (const auto& l : f.linear) {
                                       if (l.coefficient != 0.0) ids.push_back(l.covariate_id);
                                   }
                                   std::sort(ids.begin(), ids.end());
                                   return ids;
                               })
        .def("component", [](const FitResult& f, int id) { return f.component(id); },
             py::return_value_policy::reference_internal, py::arg("id"));

    m.def("fit", &fit, py::arg("y"), py::arg("x"), py::arg("spec"), py::call_guard<py::gil_scoped_release>());
    m.def("two_stage_refit", &two_stage_refit, py::arg("first"), py::arg("y"), py::arg("x"), py::arg("spec"),
          py::call_guard<py::gil_scoped_release>());
    m.def("predict", &predict, py::arg("fit"), py::arg("x"));
    m.def("evaluate_component", &evaluate_component, py::arg("estimate"), py::arg("grid"));
    m.def("mgcv_score", &mgcv_score, py::arg("rss"), py::arg("df"), py::arg("n"), py::arg("gamma"));

    m.def(
        "generate_example1",
        [](int n, int K, std::uint64_t seed, double noise_variance) {
            return dataset_dict(generate_example1(n, K, seed, noise_variance));
        },
        py::arg("n"), py::arg("K"), py::arg("seed"), py::arg("noise_variance") = 1.0);
    m.def(
        "generate_example2",
        [](int n, int K, std::uint64_t seed, double noise_variance) {
            return dataset_dict(generate_example2(n, K, seed, noise_variance));
        },
        py::arg("n"), py::arg("K"), py::arg("seed"), py::arg("noise_variance") = 1.74);

    m.def(
        "serialize_fit",
        [](const FitResult& f, const ModelSpec& spec, const std::string& response,
           const std::vector<std::string>& covariates) {
            return serialize_fit(FitDocument{response, covariates, spec, f});
        },
        py::arg("fit"), py::arg("spec"), py::arg("response"), py::arg("covariates"));
    m.def(
        "deserialize_fit",
        [](const std::string& text) {
            FitDocument doc = deserialize_fit(text);
            return py::make_tuple(doc.fit, doc.spec, doc.response, doc.covariates);
        },
        py::arg("text"));
    m.def(
        "export_curves",
        [](const std::string& text, int grid_size) { return export_curves(deserialize_fit(text), grid_size); },
        py::arg("text"), py::arg("grid_size"));
}
