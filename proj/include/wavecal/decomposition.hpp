#pragma once

// Estimation of L component curves from I aggregated curves with known
// mixing weights: forward transform, shrinkage, least squares, inverse
// transform.

#include <optional>

#include <Eigen/Core>

#include "wavecal/shrinkage.hpp"
#include "wavecal/wavelet.hpp"

namespace wavecal {

/// Gamma minimizing ||shrunk - Gamma * weights||_F.
///
/// Solved through a Householder QR of weights^t; throws RankError when the
/// smallest singular value of `weights` is below 1e-10 times the largest.
Eigen::MatrixXd solve_gamma(const Eigen::MatrixXd& shrunk, const Eigen::MatrixXd& weights);

enum class SigmaMode { Pooled, PerColumn, Fixed };

struct EstimationConfig {
  WaveletFilter<double> filter = make_filter(WaveletFamily::Daubechies, 10);
  int primary_level = 3;
  RuleSettings rule;
  SigmaMode sigma_mode = SigmaMode::Pooled;
  /// Noise sd used when sigma_mode == Fixed.
  double fixed_sigma = 0.0;
};

struct Estimate {
  Eigen::MatrixXd components;  // M x L
  /// Noise sd used for each observed column.
  Eigen::VectorXd sigma;
};

/// Full pipeline. Errors are rethrown as StageError labelled with the stage
/// (transform, sigma, shrink, solve, inverse).
Estimate estimate_components(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& weights,
                             const EstimationConfig& config);

}  // namespace wavecal
