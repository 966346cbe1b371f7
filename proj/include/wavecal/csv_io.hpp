#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wavecal/testbed.hpp"

namespace wavecal {

/// Round-trip exact text form of a double (17 significant digits).
std::string format_real(double value);

/// Long-format observed curves: t,sample_id,value (sample_id from 0).
void write_observed_csv(const std::filesystem::path& path, const Eigen::VectorXd& grid,
                        const Eigen::MatrixXd& observed);
/// Long-format truth: t,component_name,value.
void write_truth_csv(const std::filesystem::path& path, const Dataset& data);
/// Plain numeric matrix, one row per line, no header.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);
/// Long-format estimate: t,component_index,estimate (component_index from 0).
void write_estimate_csv(const std::filesystem::path& path, const Eigen::VectorXd& grid,
                        const Eigen::MatrixXd& estimate);

struct ObservedCurves {
  Eigen::VectorXd grid;      // M
  Eigen::MatrixXd observed;  // M x I, columns ordered by sample_id
};

/// Reads t,sample_id,value rows in any order. Every sample must cover the
/// same grid.
ObservedCurves read_observed_csv(const std::filesystem::path& path);

/// Reads a plain numeric matrix; a leading non-numeric line is treated as a header.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace wavecal
