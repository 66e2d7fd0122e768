#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "addsel/model.hpp"
#include "addsel/simbench.hpp"

namespace addsel {

// Numeric CSV with a header row. Comma separated, dot decimal, LF newlines
// (a trailing CR is tolerated).
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    [[nodiscard]] int column(const std::string& name) const;  // -1 when absent
};

// Throws ParseError naming the row (1-based, header is row 1) and column of
// any empty or non-numeric cell.
CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::string& path);

// Writes to `path + ".tmp"` and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& values);

// A fit together with what is needed to apply it to new files.
struct FitDocument {
    std::string response;
    std::vector<std::string> covariates;
    ModelSpec spec;
    FitResult fit;
};

std::string serialize_fit(const FitDocument& doc);
FitDocument deserialize_fit(const std::string& text);

// Per component: grid_size evenly spaced points over the training range with
// the fitted values, plus the knots whose truncated coefficient is nonzero.
std::string export_curves(const FitDocument& doc, int grid_size);

// Median(robust sd) cells in the column order method, stage, MSE_f1..MSE_f4,
// MSE, TP, FP.
std::string summary_csv(const SummaryTable& table);
std::string replicates_csv(const BenchmarkReport& report);
std::string report_json(const BenchmarkReport& report, const ModelSpec& spec);

}  // namespace addsel
