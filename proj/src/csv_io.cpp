#include "wavecal/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "wavecal/errors.hpp"

namespace wavecal {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_real(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

double require_real(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  const auto value = parse_real(text);
  if (!value) {
    throw IoError(fmt::format("{}:{}: expected a number, got '{}'", path.string(), line, text));
  }
  return *value;
}

}  // namespace

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void write_observed_csv(const std::filesystem::path& path, const Eigen::VectorXd& grid,
                        const Eigen::MatrixXd& observed) {
  auto out = open_output(path);
  out << "t,sample_id,value\n";
  for (Eigen::Index i = 0; i < observed.cols(); ++i) {
    for (Eigen::Index m = 0; m < observed.rows(); ++m) {
      out << format_real(grid[m]) << ',' << i << ',' << format_real(observed(m, i)) << '\n';
    }
  }
  finish(out, path);
}

void write_truth_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_output(path);
  out << "t,component_name,value\n";
  for (Eigen::Index l = 0; l < data.truth.cols(); ++l) {
    const auto name = component_name(data.components[static_cast<std::size_t>(l)]);
    for (Eigen::Index m = 0; m < data.truth.rows(); ++m) {
      out << format_real(data.grid[m]) << ',' << name << ',' << format_real(data.truth(m, l))
          << '\n';
    }
  }
  finish(out, path);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
  auto out = open_output(path);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_real(matrix(r, c));
    }
    out << '\n';
  }
  finish(out, path);
}

void write_estimate_csv(const std::filesystem::path& path, const Eigen::VectorXd& grid,
                        const Eigen::MatrixXd& estimate) {
  auto out = open_output(path);
  out << "t,component_index,estimate\n";
  for (Eigen::Index l = 0; l < estimate.cols(); ++l) {
    for (Eigen::Index m = 0; m < estimate.rows(); ++m) {
      out << format_real(grid[m]) << ',' << l << ',' << format_real(estimate(m, l)) << '\n';
    }
  }
  finish(out, path);
}

ObservedCurves read_observed_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<long long, std::vector<std::pair<double, double>>> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1 && !parse_real(fields.front())) continue;  // header
    if (fields.size() != 3) {
      throw IoError(fmt::format("{}:{}: expected 3 fields (t,sample_id,value), got {}",
                                path.string(), line_no, fields.size()));
    }
    const double t = require_real(fields[0], path, line_no);
    const double id = require_real(fields[1], path, line_no);
    const double value = require_real(fields[2], path, line_no);
    samples[static_cast<long long>(id)].emplace_back(t, value);
  }
  if (samples.empty()) throw IoError(path.string() + ": no data rows");

  ObservedCurves curves;
  const auto rows = static_cast<Eigen::Index>(samples.begin()->second.size());
  curves.observed.resize(rows, static_cast<Eigen::Index>(samples.size()));
  curves.grid.resize(rows);
  Eigen::Index column = 0;
  for (auto& [id, points] : samples) {
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<Eigen::Index>(points.size()) != rows) {
      throw IoError(fmt::format("{}: sample {} has {} points, sample {} has {}", path.string(), id,
                                points.size(), samples.begin()->first, rows));
    }
    for (Eigen::Index m = 0; m < rows; ++m) {
      const auto& [t, value] = points[static_cast<std::size_t>(m)];
      if (column == 0) {
        curves.grid[m] = t;
      } else if (t != curves.grid[m]) {
        throw IoError(fmt::format("{}: sample {} is not on the common grid", path.string(), id));
      }
      curves.observed(m, column) = value;
    }
    ++column;
  }
  return curves;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (rows.empty() && line_no == 1 && !parse_real(fields.front())) continue;
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(require_real(f, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(fmt::format("{}:{}: ragged row ({} fields, expected {})", path.string(),
                                line_no, row.size(), rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": no data rows");
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return matrix;
}

}  // namespace wavecal
