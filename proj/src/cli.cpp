#include "addsel/cli.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "addsel/errors.hpp"
#include "addsel/io.hpp"
#include "addsel/model.hpp"
#include "addsel/simbench.hpp"

namespace addsel::cli {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

CLI::Validator at_least(double lo, const std::string& range) {
    return CLI::Validator(
        [lo, range](std::string& value) -> std::string {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                return "'" + value + "' is not a number; valid range is " + range;
            }
            if (!(v >= lo)) {
                return "value " + value + " out of range; valid range is " + range;
            }
            return {};
        },
        range);
}

struct SpecFlags {
    std::string method = "pwlsm";
    int knots = 15;
    int order = 3;
    double gamma = 1.5;
    int grid_size = 100;
    double log10_min = -5.0;
    double log10_max = 2.0;
    bool cold_start = false;
    bool order_statistic_knots = false;
    bool inverse_gram_weights = false;

    void add_to(CLI::App& app) {
        app.add_option("--method", method, "olsm, wlsm or pwlsm")->capture_default_str();
        app.add_option("--knots", knots, "interior knots per component")->check(at_least(1, "knots >= 1"))->capture_default_str();
        app.add_option("--order", order, "spline order p (degree p-1)")->check(at_least(2, "order >= 2"))->capture_default_str();
        app.add_option("--gamma", gamma, "MGCV inflation factor")->check(at_least(1.0, "gamma >= 1"))->capture_default_str();
        app.add_option("--grid-size", grid_size, "number of lambda grid points")->check(at_least(2, "grid size >= 2"))->capture_default_str();
        app.add_option("--log10-min", log10_min, "smallest log10(lambda)")->capture_default_str();
        app.add_option("--log10-max", log10_max, "largest log10(lambda)")->capture_default_str();
        app.add_flag("--cold-start", cold_start, "start every grid point from the ridge estimate");
        app.add_flag("--order-statistic-knots", order_statistic_knots, "use order statistics instead of interpolated quantiles");
        app.add_flag("--inverse-gram-weights", inverse_gram_weights,
                     "weight columns by the diagonal of the inverse block Gram instead of unit second moment");
    }

    [[nodiscard]] ModelSpec to_spec() const {
        ModelSpec spec;
        spec.method = parse_method(method);
        spec.basis.knot_count = knots;
        spec.basis.order = order;
        spec.basis.knot_rule = order_statistic_knots ? KnotRule::order_statistic : KnotRule::interior_quantile;
        spec.basis.weight_rule = inverse_gram_weights ? WeightRule::inverse_gram_diagonal : WeightRule::second_moment;
        spec.tuning.gamma = gamma;
        spec.tuning.grid_size = grid_size;
        spec.tuning.log10_min = log10_min;
        spec.tuning.log10_max = log10_max;
        spec.tuning.warm_start = !cold_start;
        if (!(log10_min < log10_max)) {
            throw InvalidArgument("--log10-min must be smaller than --log10-max");
        }
        return spec;
    }
};

Eigen::MatrixXd select_columns(const CsvTable& table, const std::vector<std::string>& names, const std::string& source) {
    Eigen::MatrixXd x(table.values.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t c = 0; c < names.size(); ++c) {
        const int col = table.column(names[c]);
        if (col < 0) {
            throw InvalidArgument(source + ": missing covariate column '" + names[c] + "'");
        }
        x.col(static_cast<Eigen::Index>(c)) = table.values.col(col);
    }
    return x;
}

int do_fit(const std::string& input, const std::string& response, const std::string& linear, bool two_stage,
           const SpecFlags& flags, const std::string& output) {
    ModelSpec spec = flags.to_spec();
    spec.two_stage = two_stage;
    const CsvTable table = read_csv(input);
    const int ycol = table.column(response);
    if (ycol < 0) {
        throw InvalidArgument("--response: column '" + response + "' not found in " + input);
    }
    FitDocument doc;
    doc.response = response;
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
        if (c != ycol) doc.covariates.push_back(table.header[static_cast<std::size_t>(c)]);
    }
    if (doc.covariates.empty()) {
        throw InvalidArgument(input + ": no covariate columns");
    }
    for (const auto& name : split_list(linear)) {
        auto it = std::find(doc.covariates.begin(), doc.covariates.end(), name);
        if (it == doc.covariates.end()) {
            throw InvalidArgument("--linear: column '" + name + "' is not a covariate");
        }
        spec.linear_terms.push_back(static_cast<int>(it - doc.covariates.begin()));
    }
    const Eigen::MatrixXd x = select_columns(table, doc.covariates, input);
    const Eigen::VectorXd y = table.values.col(ycol);
    doc.spec = spec;
    doc.fit = fit(y, x, spec);
    write_file_atomic(output, serialize_fit(doc));
    int selected = 0;
    for (const auto& c : doc.fit.components) selected += c.selected ? 1 : 0;
    std::cerr << "fit: lambda=" << doc.fit.lambda << " df=" << doc.fit.df << " selected " << selected << "/"
              << doc.fit.components.size() << " components -> " << output << "\n";
    return kExitOk;
}

int do_predict(const std::string& fit_path, const std::string& input, const std::string& output) {
    const FitDocument doc = deserialize_fit(read_file(fit_path));
    const CsvTable table = read_csv(input);
    const Eigen::MatrixXd x = select_columns(table, doc.covariates, input);
    const Eigen::VectorXd yhat = predict(doc.fit, x);
    write_file_atomic(output, format_csv({"prediction"}, yhat));
    return kExitOk;
}

double noise_or_default(double noise, ScenarioName name) {
    return noise < 0.0 ? SimulationScenario::default_noise_variance(name) : noise;
}

int do_simulate(const std::string& scenario_name, int n, int K, std::uint64_t seed, double noise,
                const std::string& output) {
    SimulationScenario sc;
    sc.name = parse_scenario(scenario_name);
    sc.n = n;
    sc.K = K;
    sc.seed = seed;
    sc.replicates = 1;
    sc.noise_variance = noise_or_default(noise, sc.name);
    const Dataset d = generate(sc, 0);
    std::vector<std::string> header{"y"};
    for (int k = 0; k < K; ++k) header.push_back("x" + std::to_string(k + 1));
    Eigen::MatrixXd values(d.x.rows(), K + 1);
    values.col(0) = d.y;
    values.rightCols(K) = d.x;
    write_file_atomic(output, format_csv(header, values));
    return kExitOk;
}

int do_benchmark(const std::string& scenario_name, const std::string& methods, const std::string& stages,
                 bool oracle, int replicates, int n, int K, std::uint64_t seed, double noise, const SpecFlags& flags,
                 const std::string& prefix) {
    SimulationScenario sc;
    sc.name = parse_scenario(scenario_name);
    sc.n = n;
    sc.K = K;
    sc.seed = seed;
    sc.replicates = replicates;
    sc.noise_variance = noise_or_default(noise, sc.name);
    sc.validate();

    BenchmarkOptions options;
    options.base = flags.to_spec();
    options.methods.clear();
    for (const auto& m : split_list(methods)) options.methods.push_back(parse_method(m));
    if (options.methods.empty()) throw InvalidArgument("--methods: no method given");
    options.one_stage = options.two_stage = false;
    for (const auto& s : split_list(stages)) {
        if (s == "one" || s == "one_stage") options.one_stage = true;
        else if (s == "two" || s == "two_stage") options.two_stage = true;
        else throw InvalidArgument("--stages: unknown stage '" + s + "' (expected one, two)");
    }
    options.oracle = oracle;

    const BenchmarkReport report = run_benchmark(sc, options);
    write_file_atomic(prefix + ".summary.csv", summary_csv(report.summary));
    write_file_atomic(prefix + ".replicates.csv", replicates_csv(report));
    write_file_atomic(prefix + ".json", report_json(report, options.base));
    std::cerr << summary_csv(report.summary);
    return kExitOk;
}

int do_curves(const std::string& fit_path, int grid_size, const std::string& output) {
    const FitDocument doc = deserialize_fit(read_file(fit_path));
    write_file_atomic(output, export_curves(doc, grid_size));
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Component selection and estimation for sparse additive models"};
    app.require_subcommand(1);

    SpecFlags fit_flags;
    std::string fit_input, fit_response = "y", fit_linear, fit_output = "fit.json";
    bool fit_two_stage = false;
    auto* fit_cmd = app.add_subcommand("fit", "fit a sparse additive model to a CSV file");
    fit_cmd->add_option("--input", fit_input, "CSV file with a header row")->required();
    fit_cmd->add_option("--response", fit_response, "response column name")->capture_default_str();
    fit_cmd->add_option("--linear", fit_linear, "comma-separated covariates fitted as L1-penalized linear terms");
    fit_cmd->add_flag("--two-stage", fit_two_stage, "refit selected components on partial residuals");
    fit_cmd->add_option("--output", fit_output, "fit document (JSON)")->capture_default_str();
    fit_flags.add_to(*fit_cmd);

    std::string pred_fit, pred_input, pred_output = "predictions.csv";
    auto* pred_cmd = app.add_subcommand("predict", "apply a fit document to new covariates");
    pred_cmd->add_option("--fit", pred_fit, "fit document")->required();
    pred_cmd->add_option("--input", pred_input, "CSV file with the fit's covariate columns")->required();
    pred_cmd->add_option("--output", pred_output, "prediction CSV")->capture_default_str();

    std::string sim_scenario = "example1", sim_output = "simulated.csv";
    int sim_n = 400, sim_K = 50;
    std::uint64_t sim_seed = 0;
    double sim_noise = -1.0;
    auto* sim_cmd = app.add_subcommand("simulate", "write one simulated dataset");
    sim_cmd->add_option("--scenario", sim_scenario, "example1 or example2")->capture_default_str();
    sim_cmd->add_option("--n", sim_n, "sample size")->check(at_least(50, "n >= 50"))->capture_default_str();
    sim_cmd->add_option("--K", sim_K, "number of covariates")->check(at_least(4, "K >= 4"))->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "random seed")->required();
    sim_cmd->add_option("--noise-variance", sim_noise, "noise variance (default: scenario's)");
    sim_cmd->add_option("--output", sim_output, "CSV file")->capture_default_str();

    SpecFlags bench_flags;
    std::string bench_scenario = "example1", bench_methods = "olsm,wlsm,pwlsm", bench_stages = "one,two",
                bench_output = "benchmark";
    int bench_reps = 100, bench_n = 400, bench_K = 50;
    std::uint64_t bench_seed = 0;
    double bench_noise = -1.0;
    bool bench_oracle = false;
    auto* bench_cmd = app.add_subcommand("benchmark", "run a simulation study and write summary tables");
    bench_cmd->add_option("--scenario", bench_scenario, "example1 or example2")->capture_default_str();
    bench_cmd->add_option("--methods", bench_methods, "comma-separated methods")->capture_default_str();
    bench_cmd->add_option("--stages", bench_stages, "comma-separated stages: one, two")->capture_default_str();
    bench_cmd->add_flag("--oracle", bench_oracle, "also run oracle fits of the signal components");
    bench_cmd->add_option("--replicates", bench_reps, "simulation runs")->check(at_least(1, "replicates >= 1"))->capture_default_str();
    bench_cmd->add_option("--n", bench_n, "sample size")->check(at_least(50, "n >= 50"))->capture_default_str();
    bench_cmd->add_option("--K", bench_K, "number of covariates")->check(at_least(4, "K >= 4"))->capture_default_str();
    bench_cmd->add_option("--seed", bench_seed, "base seed; replicate r uses seed + r")->required();
    bench_cmd->add_option("--noise-variance", bench_noise, "noise variance (default: scenario's)");
    bench_cmd->add_option("--output", bench_output, "output prefix for .summary.csv, .replicates.csv, .json")->capture_default_str();
    bench_flags.add_to(*bench_cmd);

    std::string curves_fit, curves_output = "curves.json";
    int curves_grid = 101;
    auto* curves_cmd = app.add_subcommand("curves", "export fitted component curves on a grid");
    curves_cmd->add_option("--fit", curves_fit, "fit document")->required();
    curves_cmd->add_option("--grid-size", curves_grid, "points per component")->check(at_least(2, "grid size >= 2"))->capture_default_str();
    curves_cmd->add_option("--output", curves_output, "curve document (JSON)")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*fit_cmd) return do_fit(fit_input, fit_response, fit_linear, fit_two_stage, fit_flags, fit_output);
        if (*pred_cmd) return do_predict(pred_fit, pred_input, pred_output);
        if (*sim_cmd) return do_simulate(sim_scenario, sim_n, sim_K, sim_seed, sim_noise, sim_output);
        if (*bench_cmd)
            return do_benchmark(bench_scenario, bench_methods, bench_stages, bench_oracle, bench_reps, bench_n,
                                bench_K, bench_seed, bench_noise, bench_flags, bench_output);
        if (*curves_cmd) return do_curves(curves_fit, curves_grid, curves_output);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace addsel::cli
