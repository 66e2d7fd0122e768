#include "addsel/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include "addsel/errors.hpp"
#include "addsel/parallel.hpp"

namespace addsel {

std::string to_string(ScenarioName name) {
    return name == ScenarioName::example1_independent ? "example1" : "example2";
}

ScenarioName parse_scenario(const std::string& name) {
    if (name == "example1" || name == "example1_independent") return ScenarioName::example1_independent;
    if (name == "example2" || name == "example2_correlated") return ScenarioName::example2_correlated;
    throw InvalidArgument("unknown scenario '" + name + "' (expected example1 or example2)");
}

std::string to_string(BenchStage stage) {
    switch (stage) {
        case BenchStage::oracle: return "oracle";
        case BenchStage::one_stage: return "one_stage";
        case BenchStage::two_stage: return "two_stage";
    }
    return "unknown";
}

void SimulationScenario::validate() const {
    if (n < 50) throw InvalidArgument("scenario: n must be >= 50, got " + std::to_string(n));
    if (K < kSignalComponents) throw InvalidArgument("scenario: K must be >= 4, got " + std::to_string(K));
    if (replicates < 1) throw InvalidArgument("scenario: replicates must be >= 1");
    if (!(noise_variance >= 0.0)) throw InvalidArgument("scenario: noise variance must be >= 0");
}

double SimulationScenario::default_noise_variance(ScenarioName name) {
    return name == ScenarioName::example1_independent ? 1.0 : 1.74;
}

std::vector<ComponentFunction> example1_truth(int K) {
    std::vector<ComponentFunction> f(static_cast<std::size_t>(K), [](double) { return 0.0; });
    f[0] = [](double x) { return -std::sin(2.0 * x); };
    f[1] = [](double x) { return x * x - 25.0 / 12.0; };
    f[2] = [](double x) { return x; };
    f[3] = [](double x) { return std::exp(-x) - 2.0 * std::sinh(2.5) / 5.0; };
    return f;
}

std::vector<ComponentFunction> example2_truth(int K) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<ComponentFunction> f(static_cast<std::size_t>(K), [](double) { return 0.0; });
    f[0] = [](double x) { return 5.0 * x; };
    f[1] = [](double x) { return 3.0 * (2.0 * x - 1.0) * (2.0 * x - 1.0); };
    f[2] = [](double x) {
        const double s = std::sin(two_pi * x);
        return 4.0 * s / (2.0 - s);
    };
    f[3] = [](double x) {
        const double s = std::sin(two_pi * x);
        const double c = std::cos(two_pi * x);
        return 0.6 * s + 1.2 * c + 1.8 * s * s + 2.4 * c * c * c + 3.0 * s * s * s;
    };
    return f;
}

namespace {

Dataset finish(Eigen::MatrixXd x, std::vector<ComponentFunction> truth, double noise_variance, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    Dataset d;
    d.signal.resize(n, x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            d.signal(i, k) = truth[static_cast<std::size_t>(k)](x(i, k));
        }
    }
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance));
    d.y = d.signal.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        d.y(i) += noise(rng);
    }
    d.x = std::move(x);
    d.truth = std::move(truth);
    return d;
}

void check_dims(int n, int K) {
    if (n < 1) throw InvalidArgument("generator: n must be positive");
    if (K < kSignalComponents) throw InvalidArgument("generator: K must be >= 4");
}

}  // namespace

Dataset generate_example1(int n, int K, std::uint64_t seed, double noise_variance) {
    check_dims(n, K);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-2.5, 2.5);
    Eigen::MatrixXd x(n, K);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < K; ++k) {
            x(i, k) = unif(rng);
        }
    }
    return finish(std::move(x), example1_truth(K), noise_variance, rng);
}

Dataset generate_example2(int n, int K, std::uint64_t seed, double noise_variance) {
    check_dims(n, K);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd x(n, K);
    for (int i = 0; i < n; ++i) {
        const double shared = unif(rng);
        for (int k = 0; k < K; ++k) {
            x(i, k) = (unif(rng) + 0.5 * shared) / 1.5;
        }
    }
    return finish(std::move(x), example2_truth(K), noise_variance, rng);
}

Dataset generate(const SimulationScenario& scenario, int replicate) {
    scenario.validate();
    const std::uint64_t seed = scenario.seed + static_cast<std::uint64_t>(replicate);
    if (scenario.name == ScenarioName::example1_independent) {
        return generate_example1(scenario.n, scenario.K, seed, scenario.noise_variance);
    }
    return generate_example2(scenario.n, scenario.K, seed, scenario.noise_variance);
}

RunMetrics score_run(const FitResult& fit, const Dataset& data) {
    const Eigen::Index n = data.x.rows();
    const Eigen::Index K = data.x.cols();
    RunMetrics m;
    m.per_component_mse = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd predictor = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < K; ++k) {
        Eigen::VectorXd estimate = Eigen::VectorXd::Zero(n);
        bool selected = false;
        if (const auto* c = fit.component(static_cast<int>(k))) {
            selected = c->selected;
            estimate = evaluate_component(*c, data.x.col(k));
        }
        for (const auto& lin : fit.linear) {
            if (lin.covariate_id == k && lin.coefficient != 0.0) {
                selected = true;
                estimate = lin.coefficient * data.x.col(k);
                estimate.array() -= estimate.mean();
            }
        }
        const Eigen::VectorXd truth = data.signal.col(k).array() - data.signal.col(k).mean();
        m.per_component_mse(k) = (estimate - truth).squaredNorm() / static_cast<double>(n);
        predictor += estimate;
        if (selected) {
            (k < kSignalComponents ? m.tp : m.fp) += 1;
        }
    }
    Eigen::VectorXd signal = data.signal.rowwise().sum();
    signal.array() -= signal.mean();
    predictor.array() -= predictor.mean();
    m.total_mse = (predictor - signal).squaredNorm() / static_cast<double>(n);
    return m;
}

namespace {

double quantile7(const std::vector<double>& sorted, double q) {
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double sample_median(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    return quantile7(values, 0.5);
}

double robust_sd(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    constexpr double normal_iqr = 1.3489795003921634;
    return (quantile7(values, 0.75) - quantile7(values, 0.25)) / normal_iqr;
}

const SummaryRow* SummaryTable::find(Method method, BenchStage stage) const {
    for (const auto& r : rows) {
        if (r.method == method && r.stage == stage) return &r;
    }
    return nullptr;
}

SummaryTable summarize(const std::vector<ReplicateRecord>& records) {
    std::map<std::pair<int, int>, std::vector<const ReplicateRecord*>> cells;
    for (const auto& r : records) {
        cells[{static_cast<int>(r.method), static_cast<int>(r.stage)}].push_back(&r);
    }
    SummaryTable table;
    for (const auto& [key, recs] : cells) {
        SummaryRow row;
        row.method = static_cast<Method>(key.first);
        row.stage = static_cast<BenchStage>(key.second);
        auto cell = [&](auto&& get) {
            std::vector<double> v;
            for (const auto* r : recs) {
                if (!r->failed) v.push_back(get(*r));
            }
            return SummaryCell{sample_median(v), robust_sd(v)};
        };
        for (const auto* r : recs) {
            (r->failed ? row.failed : row.succeeded) += 1;
        }
        for (int k = 0; k < kSignalComponents; ++k) {
            row.component_mse.push_back(cell([k](const ReplicateRecord& r) { return r.metrics.per_component_mse(k); }));
        }
        row.total_mse = cell([](const ReplicateRecord& r) { return r.metrics.total_mse; });
        row.tp = cell([](const ReplicateRecord& r) { return static_cast<double>(r.metrics.tp); });
        row.fp = cell([](const ReplicateRecord& r) { return static_cast<double>(r.metrics.fp); });
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

RunMetrics score_oracle(const std::vector<ComponentEstimate>& estimates, const Dataset& data) {
    FitResult f;
    f.components = estimates;
    return score_run(f, data);
}

std::vector<ReplicateRecord> run_replicate(const SimulationScenario& scenario, const BenchmarkOptions& options, int r) {
    const Dataset data = generate(scenario, r);
    const std::uint64_t seed = scenario.seed + static_cast<std::uint64_t>(r);
    std::vector<ReplicateRecord> out;
    for (Method method : options.methods) {
        ModelSpec spec = options.base;
        spec.method = method;
        spec.two_stage = false;
        auto record = [&](BenchStage stage) {
            ReplicateRecord rec;
            rec.replicate = r;
            rec.seed = seed;
            rec.method = method;
            rec.stage = stage;
            return rec;
        };
        if (options.oracle) {
            ReplicateRecord rec = record(BenchStage::oracle);
            try {
                std::vector<ComponentEstimate> estimates;
                for (int k = 0; k < kSignalComponents; ++k) {
                    estimates.push_back(oracle_fit(data.y, data.x, data.truth, k, spec));
                }
                rec.metrics = score_oracle(estimates, data);
            } catch (const Error& e) {
                rec.failed = true;
                rec.message = e.what();
            }
            out.push_back(std::move(rec));
        }
        if (!options.one_stage && !options.two_stage) {
            continue;
        }
        ReplicateRecord one = record(BenchStage::one_stage);
        FitResult first;
        try {
            first = fit(data.y, data.x, spec);
            one.metrics = score_run(first, data);
            one.lambda = first.lambda;
        } catch (const Error& e) {
            one.failed = true;
            one.message = e.what();
        }
        if (options.two_stage) {
            ReplicateRecord two = record(BenchStage::two_stage);
            if (one.failed) {
                two.failed = true;
                two.message = "first stage failed: " + one.message;
            } else {
                try {
                    const bool any = std::any_of(first.components.begin(), first.components.end(),
                                                 [](const ComponentEstimate& c) { return c.selected; });
                    const FitResult second = any ? two_stage_refit(first, data.y, data.x, spec) : first;
                    two.metrics = score_run(second, data);
                    two.lambda = second.lambda;
                } catch (const Error& e) {
                    two.failed = true;
                    two.message = e.what();
                }
            }
            if (options.one_stage) out.push_back(std::move(one));
            out.push_back(std::move(two));
        } else {
            out.push_back(std::move(one));
        }
    }
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const SimulationScenario& scenario, const BenchmarkOptions& options) {
    scenario.validate();
    std::vector<std::vector<ReplicateRecord>> per_replicate(static_cast<std::size_t>(scenario.replicates));
    parallel_for(
        per_replicate.size(),
        [&](std::size_t r) { per_replicate[r] = run_replicate(scenario, options, static_cast<int>(r)); },
        options.threads == 0 ? thread_count() : options.threads);

    BenchmarkReport report;
    report.scenario = scenario;
    for (auto& recs : per_replicate) {
        for (auto& rec : recs) {
            report.records.push_back(std::move(rec));
        }
    }
    report.summary = summarize(report.records);
    return report;
}

}  // namespace addsel
