#include "addsel/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "addsel/errors.hpp"

namespace addsel {

using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::string cell_text(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string status_name(RecordStatus s) {
    switch (s) {
        case RecordStatus::ok: return "ok";
        case RecordStatus::saturated: return "saturated";
        case RecordStatus::numerical_failure: return "numerical_failure";
    }
    return "ok";
}

RecordStatus parse_status(const std::string& s) {
    if (s == "saturated") return RecordStatus::saturated;
    if (s == "numerical_failure") return RecordStatus::numerical_failure;
    return RecordStatus::ok;
}

json spec_json(const ModelSpec& spec) {
    json j;
    j["method"] = to_string(spec.method);
    j["order"] = spec.basis.order;
    j["knots"] = spec.basis.knot_count;
    j["knot_rule"] = spec.basis.knot_rule == KnotRule::interior_quantile ? "interior_quantile" : "order_statistic";
    j["weight_rule"] =
        spec.basis.weight_rule == WeightRule::second_moment ? "second_moment" : "inverse_gram_diagonal";
    j["gamma"] = spec.tuning.gamma;
    j["grid_size"] = spec.tuning.grid_size;
    j["log10_min"] = spec.tuning.log10_min;
    j["log10_max"] = spec.tuning.log10_max;
    j["warm_start"] = spec.tuning.warm_start;
    j["max_iterations"] = spec.solver.max_iterations;
    j["rel_tol"] = spec.solver.rel_tol;
    j["linear_terms"] = spec.linear_terms;
    j["two_stage"] = spec.two_stage;
    return j;
}

ModelSpec spec_from(const json& j) {
    ModelSpec spec;
    spec.method = parse_method(j.at("method").get<std::string>());
    spec.basis.order = j.at("order").get<int>();
    spec.basis.knot_count = j.at("knots").get<int>();
    spec.basis.knot_rule =
        j.at("knot_rule").get<std::string>() == "order_statistic" ? KnotRule::order_statistic : KnotRule::interior_quantile;
    spec.basis.weight_rule = j.value("weight_rule", std::string("second_moment")) == "inverse_gram_diagonal"
                                 ? WeightRule::inverse_gram_diagonal
                                 : WeightRule::second_moment;
    spec.tuning.gamma = j.at("gamma").get<double>();
    spec.tuning.grid_size = j.at("grid_size").get<int>();
    spec.tuning.log10_min = j.at("log10_min").get<double>();
    spec.tuning.log10_max = j.at("log10_max").get<double>();
    spec.tuning.warm_start = j.at("warm_start").get<bool>();
    spec.solver.max_iterations = j.at("max_iterations").get<int>();
    spec.solver.rel_tol = j.at("rel_tol").get<double>();
    spec.linear_terms = j.at("linear_terms").get<std::vector<int>>();
    spec.two_stage = j.at("two_stage").get<bool>();
    return spec;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(source + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    CsvTable table;
    for (auto& h : split_line(line)) {
        table.header.push_back(trim(h));
    }
    const std::size_t cols = table.header.size();
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != cols) {
            throw ParseError(source + ": row " + std::to_string(row_number) + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string cell = trim(cells[c]);
            const std::string where = source + ": row " + std::to_string(row_number) + ", column " +
                                      std::to_string(c + 1) + " (" + table.header[c] + ")";
            if (cell.empty()) {
                throw ParseError(where + ": missing value");
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = first + cell.size();
            if (*first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw ParseError(where + ": non-numeric value '" + cell + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }
    table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
        }
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    return parse_csv(in, path);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp + "'");
        }
        out << content;
        if (!out.flush()) {
            throw Error("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFit("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) {
        os << (c ? "," : "") << header[c];
    }
    os << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            os << (c ? "," : "") << cell_text(values(r, c));
        }
        os << '\n';
    }
    return os.str();
}

std::string serialize_fit(const FitDocument& doc) {
    const FitResult& f = doc.fit;
    json j;
    j["format"] = "addsel-fit";
    j["version"] = 1;
    j["response"] = doc.response;
    j["covariates"] = doc.covariates;
    j["config"] = spec_json(doc.spec);

    json fit;
    fit["intercept"] = f.intercept;
    fit["lambda"] = f.lambda;
    fit["mgcv"] = number_or_null(f.mgcv);
    fit["df"] = f.df;
    fit["sigma2_hat"] = f.sigma2_hat;
    fit["method"] = to_string(f.method);
    fit["stage"] = to_string(f.stage);
    fit["components"] = json::array();
    for (const auto& c : f.components) {
        json jc;
        jc["component_id"] = c.component_id;
        jc["name"] = c.component_id < static_cast<int>(doc.covariates.size())
                         ? doc.covariates[static_cast<std::size_t>(c.component_id)]
                         : std::to_string(c.component_id);
        jc["selected"] = c.selected;
        jc["order"] = c.order;
        jc["knots"] = c.knots.knots;
        jc["coefficients"] = to_json(c.coefficients);
        jc["empirical_mean_offset"] = c.empirical_mean_offset;
        jc["x_min"] = c.x_min;
        jc["x_max"] = c.x_max;
        jc["lambda"] = c.lambda;
        jc["df"] = c.df;
        fit["components"].push_back(std::move(jc));
    }
    fit["linear"] = json::array();
    for (const auto& l : f.linear) {
        fit["linear"].push_back({{"covariate_id", l.covariate_id}, {"coefficient", l.coefficient}});
    }
    j["fit"] = std::move(fit);

    json path = json::array();
    for (const auto& p : f.tuning_path) {
        path.push_back({{"lambda", p.lambda},
                        {"mgcv", number_or_null(p.mgcv)},
                        {"gcv", number_or_null(p.gcv)},
                        {"df", p.df},
                        {"rss", p.rss},
                        {"active_groups", p.active_groups},
                        {"status", status_name(p.status)}});
    }
    j["tuning_path"] = std::move(path);
    return j.dump(2) + "\n";
}

FitDocument deserialize_fit(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "addsel-fit") {
            throw ParseError("not an addsel fit document");
        }
        FitDocument doc;
        doc.response = j.at("response").get<std::string>();
        doc.covariates = j.at("covariates").get<std::vector<std::string>>();
        doc.spec = spec_from(j.at("config"));
        const json& fit = j.at("fit");
        FitResult& f = doc.fit;
        f.intercept = fit.at("intercept").get<double>();
        f.lambda = fit.at("lambda").get<double>();
        f.mgcv = number_from(fit.at("mgcv"));
        f.df = fit.at("df").get<double>();
        f.sigma2_hat = fit.at("sigma2_hat").get<double>();
        f.method = parse_method(fit.at("method").get<std::string>());
        f.stage = fit.at("stage").get<std::string>() == "two_stage" ? Stage::two_stage : Stage::one_stage;
        for (const auto& jc : fit.at("components")) {
            ComponentEstimate c;
            c.component_id = jc.at("component_id").get<int>();
            c.selected = jc.at("selected").get<bool>();
            c.order = jc.at("order").get<int>();
            c.knots.component_id = c.component_id;
            c.knots.knots = jc.at("knots").get<std::vector<double>>();
            c.coefficients = vector_from(jc.at("coefficients"));
            c.empirical_mean_offset = jc.at("empirical_mean_offset").get<double>();
            c.x_min = jc.at("x_min").get<double>();
            c.x_max = jc.at("x_max").get<double>();
            c.lambda = jc.at("lambda").get<double>();
            c.df = jc.at("df").get<double>();
            if (c.coefficients.size() != static_cast<Eigen::Index>(c.order - 1 + c.knots.knots.size())) {
                throw ParseError("component " + std::to_string(c.component_id) + ": coefficient count mismatch");
            }
            f.components.push_back(std::move(c));
        }
        for (const auto& jl : fit.at("linear")) {
            f.linear.push_back({jl.at("covariate_id").get<int>(), jl.at("coefficient").get<double>()});
        }
        for (const auto& p : j.at("tuning_path")) {
            f.tuning_path.push_back({p.at("lambda").get<double>(), number_from(p.at("mgcv")), number_from(p.at("gcv")),
                                     p.at("df").get<double>(), p.at("rss").get<double>(),
                                     p.at("active_groups").get<int>(), parse_status(p.at("status").get<std::string>())});
        }
        return doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed fit document: ") + e.what());
    }
}

std::string export_curves(const FitDocument& doc, int grid_size) {
    if (grid_size < 2) {
        throw InvalidArgument("curves: grid size must be >= 2");
    }
    json out;
    out["format"] = "addsel-curves";
    out["components"] = json::array();
    for (const auto& c : doc.fit.components) {
        Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_size, c.x_min, c.x_max);
        grid(0) = c.x_min;
        grid(grid_size - 1) = c.x_max;
        const Eigen::VectorXd values = evaluate_component(c, grid);
        std::vector<double> retained;
        const auto poly = static_cast<std::size_t>(c.order - 1);
        for (std::size_t t = 0; t < c.knots.knots.size(); ++t) {
            if (c.coefficients(static_cast<Eigen::Index>(poly + t)) != 0.0) {
                retained.push_back(c.knots.knots[t]);
            }
        }
        json jc;
        jc["component_id"] = c.component_id;
        jc["name"] = c.component_id < static_cast<int>(doc.covariates.size())
                         ? doc.covariates[static_cast<std::size_t>(c.component_id)]
                         : std::to_string(c.component_id);
        jc["selected"] = c.selected;
        jc["x"] = to_json(grid);
        jc["f"] = to_json(values);
        jc["knots"] = c.knots.knots;
        jc["retained_knots"] = retained;
        out["components"].push_back(std::move(jc));
    }
    return out.dump(2) + "\n";
}

std::string summary_csv(const SummaryTable& table) {
    std::ostringstream os;
    os << "method,stage,MSE_f1,MSE_f2,MSE_f3,MSE_f4,MSE,TP,FP,succeeded,failed\n";
    auto cell = [](const SummaryCell& c) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(3) << c.median << "(" << c.robust_sd << ")";
        return s.str();
    };
    for (const auto& r : table.rows) {
        os << to_string(r.method) << ',' << to_string(r.stage);
        for (const auto& c : r.component_mse) os << ',' << cell(c);
        os << ',' << cell(r.total_mse) << ',' << cell(r.tp) << ',' << cell(r.fp) << ',' << r.succeeded << ','
           << r.failed << '\n';
    }
    return os.str();
}

std::string replicates_csv(const BenchmarkReport& report) {
    std::ostringstream os;
    os << "replicate,seed,method,stage,failed,lambda,tp,fp,MSE";
    const Eigen::Index K = report.scenario.K;
    for (Eigen::Index k = 0; k < K; ++k) os << ",MSE_f" << (k + 1);
    os << ",message\n";
    for (const auto& r : report.records) {
        os << r.replicate << ',' << r.seed << ',' << to_string(r.method) << ',' << to_string(r.stage) << ','
           << (r.failed ? 1 : 0) << ',' << cell_text(r.lambda) << ',' << r.metrics.tp << ',' << r.metrics.fp << ','
           << cell_text(r.failed ? std::nan("") : r.metrics.total_mse);
        for (Eigen::Index k = 0; k < K; ++k) {
            os << ',' << cell_text(r.failed || k >= r.metrics.per_component_mse.size() ? std::nan("")
                                                                                       : r.metrics.per_component_mse(k));
        }
        std::string msg = r.message;
        for (char& ch : msg) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        os << ',' << msg << '\n';
    }
    return os.str();
}

std::string report_json(const BenchmarkReport& report, const ModelSpec& spec) {
    json j;
    j["format"] = "addsel-benchmark";
    j["scenario"] = {{"name", to_string(report.scenario.name)},
                     {"n", report.scenario.n},
                     {"K", report.scenario.K},
                     {"noise_variance", report.scenario.noise_variance},
                     {"seed", report.scenario.seed},
                     {"replicates", report.scenario.replicates}};
    j["config"] = spec_json(spec);
    j["summary"] = json::array();
    auto cell = [](const SummaryCell& c) { return json{{"median", c.median}, {"robust_sd", c.robust_sd}}; };
    for (const auto& r : report.summary.rows) {
        json row{{"method", to_string(r.method)}, {"stage", to_string(r.stage)},
                 {"succeeded", r.succeeded},      {"failed", r.failed},
                 {"MSE", cell(r.total_mse)},      {"TP", cell(r.tp)},
                 {"FP", cell(r.fp)}};
        for (std::size_t k = 0; k < r.component_mse.size(); ++k) {
            row["MSE_f" + std::to_string(k + 1)] = cell(r.component_mse[k]);
        }
        j["summary"].push_back(std::move(row));
    }
    j["replicates"] = json::array();
    for (const auto& r : report.records) {
        json rec{{"replicate", r.replicate}, {"seed", r.seed}, {"method", to_string(r.method)},
                 {"stage", to_string(r.stage)}, {"failed", r.failed}, {"message", r.message},
                 {"lambda", r.lambda}, {"tp", r.metrics.tp}, {"fp", r.metrics.fp},
                 {"MSE", r.failed ? json(nullptr) : json(r.metrics.total_mse)}};
        rec["per_component_mse"] = r.failed ? json::array() : to_json(r.metrics.per_component_mse);
        j["replicates"].push_back(std::move(rec));
    }
    return j.dump(2) + "\n";
}

}  // namespace addsel
