#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "addsel/model.hpp"

namespace addsel {

enum class ScenarioName { example1_independent, example2_correlated };

std::string to_string(ScenarioName name);
ScenarioName parse_scenario(const std::string& name);

struct SimulationScenario {
    ScenarioName name = ScenarioName::example1_independent;
    int n = 400;
    int K = 50;
    double noise_variance = 1.0;
    std::uint64_t seed = 0;
    int replicates = 100;

    void validate() const;
    // Default noise variance of each design: 1 for example 1, 1.74 for example 2.
    static double default_noise_variance(ScenarioName name);
};

struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::MatrixXd signal;  // signal(i, k) = f_k(x(i, k))
    std::vector<ComponentFunction> truth;
};

// Only the first four components are nonzero in both designs.
inline constexpr int kSignalComponents = 4;

std::vector<ComponentFunction> example1_truth(int K);
std::vector<ComponentFunction> example2_truth(int K);

// X ~ U(-2.5, 2.5) iid; f1 = -sin(2x), f2 = x^2 - 25/12, f3 = x,
// f4 = exp(-x) - 2 sinh(5/2)/5; eps ~ N(0, noise_variance).
Dataset generate_example1(int n, int K, std::uint64_t seed, double noise_variance = 1.0);

// X_k = (W_k + 0.5 U) / 1.5 with W_k, U iid U(0, 1), so corr(X_j, X_k) = 0.2.
Dataset generate_example2(int n, int K, std::uint64_t seed, double noise_variance = 1.74);

// Dataset of replicate r, seeded with scenario.seed + r.
Dataset generate(const SimulationScenario& scenario, int replicate);

struct RunMetrics {
    Eigen::VectorXd per_component_mse;
    double total_mse = 0.0;
    int tp = 0;
    int fp = 0;
};

// MSE against truth centered by its sample mean; total MSE compares the
// centered additive predictor with the centered signal.
RunMetrics score_run(const FitResult& fit, const Dataset& data);

enum class BenchStage { oracle, one_stage, two_stage };
std::string to_string(BenchStage stage);

struct ReplicateRecord {
    int replicate = 0;
    std::uint64_t seed = 0;
    Method method = Method::PWLSM;
    BenchStage stage = BenchStage::one_stage;
    bool failed = false;
    std::string message;
    double lambda = 0.0;
    RunMetrics metrics;
};

struct SummaryCell {
    double median = 0.0;
    double robust_sd = 0.0;
};

struct SummaryRow {
    Method method = Method::PWLSM;
    BenchStage stage = BenchStage::one_stage;
    int succeeded = 0;
    int failed = 0;
    std::vector<SummaryCell> component_mse;  // f1..f4
    SummaryCell total_mse;
    SummaryCell tp;
    SummaryCell fp;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
    [[nodiscard]] const SummaryRow* find(Method method, BenchStage stage) const;
};

struct BenchmarkOptions {
    std::vector<Method> methods{Method::OLSM, Method::WLSM, Method::PWLSM};
    bool one_stage = true;
    bool two_stage = true;
    bool oracle = false;
    ModelSpec base;  // method and two_stage fields are overridden per run
    std::size_t threads = 0;  // 0: thread_count()
};

struct BenchmarkReport {
    SimulationScenario scenario;
    std::vector<ReplicateRecord> records;  // sorted by replicate, method, stage
    SummaryTable summary;
};

double sample_median(std::vector<double> values);
// Interquartile range over the standard normal one, (Phi^-1(.75) - Phi^-1(.25)).
double robust_sd(std::vector<double> values);

SummaryTable summarize(const std::vector<ReplicateRecord>& records);

BenchmarkReport run_benchmark(const SimulationScenario& scenario, const BenchmarkOptions& options);

}  // namespace addsel
