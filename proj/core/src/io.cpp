#include "svgd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace svgd {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    std::size_t begin = field.find_first_not_of(" \t\r");
    std::size_t end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_number(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;  // from_chars rejects a leading '+'
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && begin != end;
}

}  // namespace

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvErrorKind::missing_file, 0, "cannot open file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  int width = -1;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    std::size_t bad_field = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_number(fields[i], values[i])) {
        numeric = false;
        bad_field = i;
        break;
      }
    }
    if (!numeric) {
      if (first_content_line) {  // header row
        first_content_line = false;
        continue;
      }
      throw CsvError(CsvErrorKind::non_numeric, line_no,
                     "non-numeric value '" + fields[bad_field] + "' at line " +
                         std::to_string(line_no));
    }
    first_content_line = false;
    if (width < 0) width = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != width)
      throw CsvError(CsvErrorKind::ragged_row, line_no,
                     "row at line " + std::to_string(line_no) + " has " +
                         std::to_string(values.size()) + " fields, expected " +
                         std::to_string(width));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw CsvError(CsvErrorKind::no_rows, 0, "no rows in " + path);
  if (width < 2)
    throw CsvError(CsvErrorKind::ragged_row, 0, "need at least one feature column plus labels");

  int label_col = options.label_col.value_or(width - 1);
  if (label_col < 0 || label_col >= width)
    throw CsvError(CsvErrorKind::ragged_row, 0, "label column out of range");

  Dataset data;
  const int n = static_cast<int>(rows.size());
  const int d = width - 1;
  data.rows.resize(n, d);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    double label = rows[i][label_col];
    if (label == 0.0)
      data.labels(i) = -1.0;
    else if (label == 1.0 || label == -1.0)
      data.labels(i) = label;
    else
      throw CsvError(CsvErrorKind::bad_label, 0,
                     "label value " + format_double(label) + " is not in {0,1} or {-1,+1}");
    int col = 0;
    for (int j = 0; j < width; ++j)
      if (j != label_col) data.rows(i, col++) = rows[i][j];
  }
  if (options.standardize) {
    for (int j = 0; j < d; ++j) {
      double mean = data.rows.col(j).mean();
      double sd = std::sqrt((data.rows.col(j).array() - mean).square().mean());
      if (sd > 0.0) data.rows.col(j) = (data.rows.col(j).array() - mean) / sd;
    }
  }
  return data;
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvErrorKind::missing_file, 0, "cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line);
    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (!parse_number(fields[i], values[i]))
        throw CsvError(CsvErrorKind::non_numeric, line_no,
                       "non-numeric value at line " + std::to_string(line_no));
    if (!rows.empty() && values.size() != rows.front().size())
      throw CsvError(CsvErrorKind::ragged_row, line_no,
                     "ragged row at line " + std::to_string(line_no));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw CsvError(CsvErrorKind::no_rows, 0, "no rows in " + path);
  Eigen::MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) out(i, j) = rows[i][j];
  return out;
}

std::string format_double(double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows, int dim,
                          const std::vector<double>* accuracy) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,ksd,weight_dev";
  for (int j = 0; j < dim; ++j) out << ",mean_" << j;
  for (int j = 0; j < dim; ++j) out << ",m2_" << j;
  out << ",wall_ms";
  if (accuracy) out << ",accuracy";
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TrajectoryRow& row = rows[i];
    out << row.iter << ',' << format_double(row.ksd) << ',' << format_double(row.weight_dev);
    for (int j = 0; j < dim; ++j) out << ',' << format_double(row.mean(j));
    for (int j = 0; j < dim; ++j) out << ',' << format_double(row.second_moment(j));
    out << ',' << format_double(row.wall_ms);
    if (accuracy) out << ',' << format_double((*accuracy)[i]);
    out << "\n";
  }
}

void write_particles_csv(const std::string& path, const Eigen::MatrixXd& positions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    for (Eigen::Index j = 0; j < positions.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(positions(i, j));
    }
    out << "\n";
  }
}

void write_flow_csv(const std::string& path, const FlowReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,renyi,stein_fisher,identity_residual,avg_stein_fisher,bound\n";
  for (const FlowSample& s : report.samples) {
    out << format_double(s.t) << ',' << format_double(s.renyi) << ','
        << format_double(s.stein_fisher) << ',' << format_double(s.identity_residual) << ','
        << format_double(s.avg_stein_fisher) << ',' << format_double(s.bound) << "\n";
  }
}

void write_weights_file(const std::string& path, const Eigen::VectorXd& weights,
                        double objective) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index i = 0; i < weights.size(); ++i) out << format_double(weights(i)) << "\n";
  out << "objective " << format_double(objective) << "\n";
}

}  // namespace svgd
