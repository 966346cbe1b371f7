#pragma once

// Bayesian shrinkage and thresholding rules for a single empirical wavelet
// coefficient d = theta + N(0, sigma^2) noise.

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "wavecal/quadrature.hpp"
#include "wavecal/wavelet.hpp"

namespace wavecal {

/// Point mass at zero mixed with a zero-centred logistic density of scale tau.
class Logistic {
 public:
  Logistic(double p, double tau, double sigma);
  double p() const noexcept { return p_; }
  double tau() const noexcept { return tau_; }
  double sigma() const noexcept { return sigma_; }

 private:
  double p_;
  double tau_;
  double sigma_;
};

/// Point mass at zero mixed with a symmetric beta density on [-m, m].
class Beta {
 public:
  Beta(double p, double a, double m, double sigma);
  double p() const noexcept { return p_; }
  double a() const noexcept { return a_; }
  double m() const noexcept { return m_; }
  double sigma() const noexcept { return sigma_; }

 private:
  double p_;
  double a_;
  double m_;
  double sigma_;
};

/// Large posterior mode thresholding; prior exponent k > 1/2.
class Lpm {
 public:
  Lpm(double k, double sigma);
  double k() const noexcept { return k_; }
  double sigma() const noexcept { return sigma_; }
  /// 2 sigma sqrt(2k - 1)
  double threshold() const noexcept;

 private:
  double k_;
  double sigma_;
};

/// Amplitude-scale invariant Bayes estimator (d^2 - 3 sigma^2)_+ / d.
class Abe {
 public:
  explicit Abe(double sigma);
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

/// Bayesian adaptive multiresolution smoother: point mass plus DE(0, tau)
/// prior, with an exponential prior of rate mu on the noise variance.
///
/// The closed form has a removable singularity at 2 mu tau^2 = 1; parameters
/// within 1e-8 of it are rejected.
class Bams {
 public:
  Bams(double alpha, double tau, double mu);
  double alpha() const noexcept { return alpha_; }
  double tau() const noexcept { return tau_; }
  double mu() const noexcept { return mu_; }

 private:
  double alpha_;
  double tau_;
  double mu_;
};

using RuleSpec = std::variant<Logistic, Beta, Lpm, Abe, Bams>;

std::string_view rule_name(const RuleSpec& rule);

struct RuleOutcome {
  double value = 0.0;
  /// Set when the posterior normalizer could not be represented.
  bool underflow = false;
};

/// Median absolute deviation estimate median(|d|) / 0.6745 of the noise sd.
double estimate_sigma(const Eigen::Ref<const Eigen::VectorXd>& finest_details);

/// Posterior mean under the logistic mixture prior. Both integrals are taken
/// on the same standard-normal Gauss-Hermite nodes when tau >= sigma. A
/// sharper prior (tau < sigma) switches to composite Gauss-Legendre in theta,
/// graded toward zero and the posterior mode, and `quad` is not used.
RuleOutcome logistic_rule_checked(double d, const Logistic& spec,
                                  const QuadratureSpec& quad = default_hermite());
double logistic_rule(double d, const Logistic& spec,
                     const QuadratureSpec& quad = default_hermite());

/// Posterior mean under the beta mixture prior, Gauss-Legendre on the part of
/// [-m, m] where the likelihood is not negligible. `quad` is the reference
/// rule on [-1, 1].
RuleOutcome beta_rule_checked(double d, const Beta& spec,
                              const QuadratureSpec& quad = default_legendre());
double beta_rule(double d, const Beta& spec, const QuadratureSpec& quad = default_legendre());

double lpm_rule(double d, const Lpm& spec);
double abe_rule(double d, const Abe& spec);
double bams_rule(double d, const Bams& spec);

/// Predictive density of d when theta ~ DE(0, tau) and d | theta is Laplace
/// with scale 1 / sqrt(2 mu).
double bams_marginal(double d, double tau, double mu);
/// Posterior mean of theta under the pure DE(0, tau) prior.
double bams_de_rule(double d, double tau, double mu);

double apply_rule(double d, const RuleSpec& rule);

/// Level-dependent hyperparameters p(j) = 1 - (j - J0 + 1)^-gamma and
/// m(j) = max_k |d_jk|.
struct LevelPolicy {
  double gamma_exponent = 2.0;
  int primary_level = 3;
};

struct LevelHyperparameters {
  double p = 0.0;
  double m = 0.0;
};

/// `details` must be the full block of level `level` (2^level entries).
LevelHyperparameters av_policy(int level, const Eigen::Ref<const Eigen::VectorXd>& details,
                               const LevelPolicy& policy);

/// Applies the rule to every detail coefficient; the coarse block is copied.
/// With a policy, Logistic takes p(j) and Beta takes p(j), m(j) per level.
Pyramid<double> shrink_pyramid(const Pyramid<double>& pyramid, const RuleSpec& rule,
                               const std::optional<LevelPolicy>& policy = std::nullopt);

// ---------------------------------------------------------------------------
// Rule settings: a rule family plus optional hyperparameters. Missing values
// are filled from the noise estimate and the data by resolve_rule.

enum class RuleKind { Logistic, Beta, Lpm, Abe, Bams };

struct RuleSettings {
  RuleKind kind = RuleKind::Lpm;
  std::optional<double> p;      // Logistic, Beta (default 0.9)
  std::optional<double> tau;    // Logistic (default 1.0), Bams (default 3 sigma)
  std::optional<double> a;      // Beta (default 2)
  std::optional<double> m;      // Beta (default max |detail|)
  std::optional<double> k;      // Lpm (default 1)
  std::optional<double> alpha;  // Bams (default 0.8)
  std::optional<double> mu;     // Bams (default 1 / sigma^2)
  /// Level-dependent p(j), m(j) for Logistic and Beta.
  std::optional<LevelPolicy> policy;
};

/// Short CLI names: log, beta, lpm, abe, bams.
RuleKind parse_rule_kind(std::string_view name);
std::string_view rule_kind_name(RuleKind kind);

inline constexpr double kDefaultMixtureWeight = 0.9;
inline constexpr double kDefaultLogisticScale = 1.0;
inline constexpr double kDefaultBetaShape = 2.0;
inline constexpr double kDefaultLpmExponent = 1.0;
inline constexpr double kDefaultBamsAlpha = 0.8;
inline constexpr double kDefaultBamsScaleFactor = 3.0;

/// Builds a concrete rule for one coefficient set with noise estimate sigma.
RuleSpec resolve_rule(const RuleSettings& settings, double sigma, const Pyramid<double>& pyramid);

}  // namespace wavecal
