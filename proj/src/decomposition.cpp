#include "wavecal/decomposition.hpp"

#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "wavecal/errors.hpp"

namespace wavecal {
namespace {

constexpr double kRankTolerance = 1e-10;

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

Eigen::MatrixXd solve_gamma(const Eigen::MatrixXd& shrunk, const Eigen::MatrixXd& weights) {
  const Eigen::Index components = weights.rows();
  const Eigen::Index samples = weights.cols();
  if (shrunk.cols() != samples) {
    throw DimensionError("coefficient matrix has " + std::to_string(shrunk.cols()) +
                         " columns but the mixing matrix has " + std::to_string(samples));
  }
  if (components < 1 || samples < components) {
    throw RankError("mixing matrix is " + std::to_string(components) + " x " +
                    std::to_string(samples) + "; need at least as many samples as components");
  }
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(weights).singularValues();
  if (!(s[components - 1] >= kRankTolerance * s[0])) {
    throw RankError("mixing matrix is rank deficient: smallest singular value " +
                    std::to_string(s[components - 1]) + " vs largest " + std::to_string(s[0]));
  }
  // weights^t * Gamma^t = shrunk^t in the least-squares sense.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(weights.transpose());
  return qr.solve(shrunk.transpose()).transpose();
}

Estimate estimate_components(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& weights,
                             const EstimationConfig& config) {
  if (observed.cols() != weights.cols()) {
    throw StageError("input", "observed matrix has " + std::to_string(observed.cols()) +
                                  " samples but the mixing matrix has " +
                                  std::to_string(weights.cols()));
  }
  const int primary = config.primary_level;
  const Eigen::MatrixXd coeffs = in_stage("transform", [&] {
    return transform_columns(observed, config.filter, primary, Direction::Forward);
  });
  const Eigen::Index samples = coeffs.cols();
  const Eigen::Index half = coeffs.rows() / 2;

  Estimate result;
  result.sigma = in_stage("sigma", [&] {
    Eigen::VectorXd sigma(samples);
    if (config.sigma_mode == SigmaMode::Fixed) {
      if (!(config.fixed_sigma >= 0.0)) throw DomainError("fixed sigma must be nonnegative");
      sigma.setConstant(config.fixed_sigma);
      return sigma;
    }
    for (Eigen::Index i = 0; i < samples; ++i) {
      sigma[i] = estimate_sigma(coeffs.col(i).tail(half));
    }
    if (config.sigma_mode == SigmaMode::Pooled) sigma.setConstant(sigma.mean());
    return sigma;
  });

  const Eigen::MatrixXd shrunk = in_stage("shrink", [&] {
    Eigen::MatrixXd out(coeffs.rows(), samples);
    for (Eigen::Index i = 0; i < samples; ++i) {
      const Pyramid<double> pyramid(Eigen::VectorXd(coeffs.col(i)), primary);
      const RuleSpec rule = resolve_rule(config.rule, result.sigma[i], pyramid);
      out.col(i) = shrink_pyramid(pyramid, rule, config.rule.policy).flat();
    }
    return out;
  });

  const Eigen::MatrixXd gamma = in_stage("solve", [&] { return solve_gamma(shrunk, weights); });
  result.components = in_stage("inverse", [&] {
    return transform_columns(gamma, config.filter, primary, Direction::Inverse);
  });
  return result;
}

}  // namespace wavecal
