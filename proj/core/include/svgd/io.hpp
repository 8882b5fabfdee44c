#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "svgd/flow1d.hpp"
#include "svgd/sampler.hpp"
#include "svgd/target.hpp"

namespace svgd {

enum class CsvErrorKind { missing_file, no_rows, ragged_row, non_numeric, bad_label };

struct CsvError : std::runtime_error {
  CsvErrorKind kind;
  int line;  // 1-based file line, 0 when not applicable
  CsvError(CsvErrorKind k, int l, const std::string& message)
      : std::runtime_error(message), kind(k), line(l) {}
};

struct LoadOptions {
  std::optional<int> label_col;  // default: last column
  bool standardize = false;      // per-feature standardization of the features
};

// Comma-separated numeric file with an optional header row. Labels encoded
// {0,1} or {-1,+1}; the canonical in-memory form is {-1,+1}.
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});

// Plain numeric matrix, one row per line, no header.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// Shortest round-trip decimal form, locale-independent.
std::string format_double(double value);

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows, int dim,
                          const std::vector<double>* accuracy = nullptr);
void write_particles_csv(const std::string& path, const Eigen::MatrixXd& positions);
void write_flow_csv(const std::string& path, const FlowReport& report);
void write_weights_file(const std::string& path, const Eigen::VectorXd& weights, double objective);

}  // namespace svgd
