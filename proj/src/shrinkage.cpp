#include "wavecal/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wavecal/errors.hpp"

namespace wavecal {
namespace {

constexpr double kMadScale = 0.6745;
constexpr double kBamsSingularityGuard = 1e-8;
// Likelihood window half-width in units of sigma: exp(-144/2) is far below
// double precision relative to the peak.
constexpr double kWindowSigmas = 12.0;

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// log of the logistic density, written symmetrically in |x|.
double log_logistic(double x, double tau) {
  const double z = std::abs(x) / tau;
  return -z - std::log(tau) - 2.0 * std::log1p(std::exp(-z));
}

// Shared posterior-mean assembly: point mass at zero with log-density
// `log_point`, continuous part sum_i w_i exp(log_terms_i) over nodes theta_i.
// All terms are scaled by the largest exponent before summation.
RuleOutcome posterior_mean(double log_point, const std::vector<double>& log_terms,
                           const Eigen::VectorXd& weights, const std::vector<double>& thetas) {
  double shift = log_point;
  for (double v : log_terms) shift = std::max(shift, v);
  if (!std::isfinite(shift)) return {0.0, true};

  double numerator = 0.0;
  double denominator = std::exp(log_point - shift);
  for (std::size_t i = 0; i < log_terms.size(); ++i) {
    const double term = weights[static_cast<Eigen::Index>(i)] * std::exp(log_terms[i] - shift);
    numerator += thetas[i] * term;
    denominator += term;
  }
  if (!(denominator > 0.0) || !std::isfinite(denominator)) return {0.0, true};
  return {numerator / denominator, false};
}

// Composite Gauss-Legendre for the logistic slab when the prior is sharper
// than the noise (tau < sigma). Integrand theta -> g(theta; tau) phi((theta -
// d) / sigma) is log-concave; panels are graded geometrically away from its
// mode and from zero, where g bends on the scale tau.
constexpr int kPanelNodes = 12;
// Window ends where the integrand has dropped by exp(-40) from its peak.
constexpr double kWindowLogDrop = 40.0;

double log_slab(double theta, double d, double tau, double sigma) {
  const double z = (theta - d) / sigma;
  return log_logistic(theta, tau) - 0.5 * z * z;
}

double slab_mode(double d, double tau, double sigma) {
  // The log-derivative is decreasing and changes sign between 0 and d.
  double lo = std::min(0.0, d);
  double hi = std::max(0.0, d);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double slope = -std::tanh(mid / (2.0 * tau)) / tau - (mid - d) / (sigma * sigma);
    (slope > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double window_end(double mode, double direction, double d, double tau, double sigma) {
  const double floor = log_slab(mode, d, tau, sigma) - kWindowLogDrop;
  auto inside = [&](double offset) {
    return log_slab(mode + direction * offset, d, tau, sigma) > floor;
  };
  double far = std::min(tau, sigma);
  for (int it = 0; it < 200 && inside(far); ++it) far *= 2.0;
  double near = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (near + far);
    (inside(mid) ? near : far) = mid;
  }
  return mode + direction * far;
}

void add_graded(std::vector<double>& points, double centre, double step, double lo, double hi) {
  if (centre > lo && centre < hi) points.push_back(centre);
  for (double direction : {-1.0, 1.0}) {
    for (double offset = step;; offset *= 2.0) {
      const double x = centre + direction * offset;
      if (x <= lo || x >= hi) break;
      points.push_back(x);
    }
  }
}

RuleOutcome logistic_composite(double d, const Logistic& spec) {
  // Computed for |d| and mirrored, so the rule is exactly odd.
  const double magnitude = std::abs(d);
  const double tau = spec.tau();
  const double sigma = spec.sigma();
  const double mode = slab_mode(magnitude, tau, sigma);
  const double lo = window_end(mode, -1.0, magnitude, tau, sigma);
  const double hi = window_end(mode, 1.0, magnitude, tau, sigma);
  const double bend = 1.0 / std::cosh(mode / (2.0 * tau));
  const double scale =
      1.0 / std::sqrt(1.0 / (sigma * sigma) + bend * bend / (2.0 * tau * tau));

  std::vector<double> points = {lo, hi};
  add_graded(points, mode, scale, lo, hi);
  add_graded(points, 0.0, tau, lo, hi);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  static const QuadratureSpec panel = gauss_legendre(kPanelNodes);
  const double log_cont = std::log1p(-spec.p()) - kLogSqrt2Pi - std::log(sigma);
  std::vector<double> thetas;
  std::vector<double> log_terms;
  Eigen::VectorXd weights((static_cast<Eigen::Index>(points.size()) - 1) * kPanelNodes);
  Eigen::Index k = 0;
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const QuadratureSpec mapped = map_to_interval(panel, points[j], points[j + 1]);
    for (Eigen::Index i = 0; i < mapped.size(); ++i, ++k) {
      const double theta = mapped.nodes[i];
      thetas.push_back(theta);
      log_terms.push_back(log_cont + log_slab(theta, magnitude, tau, sigma));
      weights[k] = mapped.weights[i];
    }
  }
  const double z = magnitude / sigma;
  const double log_point = spec.p() > 0.0
                               ? std::log(spec.p()) - 0.5 * z * z - kLogSqrt2Pi - std::log(sigma)
                               : -std::numeric_limits<double>::infinity();
  RuleOutcome out = posterior_mean(log_point, log_terms, weights, thetas);
  out.value = std::copysign(out.value, d);
  return out;
}

}  // namespace

Logistic::Logistic(double p, double tau, double sigma) : p_(p), tau_(tau), sigma_(sigma) {
  require(p >= 0.0 && p <= 1.0, "logistic rule: p must lie in [0, 1], got " + std::to_string(p));
  require(tau > 0.0, "logistic rule: tau must be positive, got " + std::to_string(tau));
  require(sigma >= 0.0, "logistic rule: sigma must be nonnegative, got " + std::to_string(sigma));
}

Beta::Beta(double p, double a, double m, double sigma) : p_(p), a_(a), m_(m), sigma_(sigma) {
  require(p >= 0.0 && p <= 1.0, "beta rule: p must lie in [0, 1], got " + std::to_string(p));
  require(a >= 1.0, "beta rule: shape a must be >= 1, got " + std::to_string(a));
  require(m >= 0.0 && std::isfinite(m),
          "beta rule: half-support m must be nonnegative, got " + std::to_string(m));
  require(sigma >= 0.0, "beta rule: sigma must be nonnegative, got " + std::to_string(sigma));
}

Lpm::Lpm(double k, double sigma) : k_(k), sigma_(sigma) {
  require(k > 0.5, "LPM rule: k must exceed 1/2, got " + std::to_string(k));
  require(sigma >= 0.0, "LPM rule: sigma must be nonnegative, got " + std::to_string(sigma));
}

double Lpm::threshold() const noexcept { return 2.0 * sigma_ * std::sqrt(2.0 * k_ - 1.0); }

Abe::Abe(double sigma) : sigma_(sigma) {
  require(sigma >= 0.0, "ABE rule: sigma must be nonnegative, got " + std::to_string(sigma));
}

Bams::Bams(double alpha, double tau, double mu) : alpha_(alpha), tau_(tau), mu_(mu) {
  require(alpha >= 0.0 && alpha < 1.0,
          "BAMS rule: alpha must lie in [0, 1), got " + std::to_string(alpha));
  require(tau > 0.0 && std::isfinite(tau), "BAMS rule: tau must be positive");
  require(mu > 0.0 && std::isfinite(mu), "BAMS rule: mu must be positive");
  require(std::abs(2.0 * mu * tau * tau - 1.0) > kBamsSingularityGuard,
          "BAMS rule: 2 mu tau^2 too close to 1 (removable singularity)");
}

std::string_view rule_name(const RuleSpec& rule) {
  constexpr std::string_view names[] = {"log", "beta", "lpm", "abe", "bams"};
  return names[rule.index()];
}

double estimate_sigma(const Eigen::Ref<const Eigen::VectorXd>& finest_details) {
  if (finest_details.size() == 0) {
    throw DomainError("estimate_sigma: empty coefficient vector");
  }
  std::vector<double> magnitudes(static_cast<std::size_t>(finest_details.size()));
  for (Eigen::Index i = 0; i < finest_details.size(); ++i) {
    magnitudes[static_cast<std::size_t>(i)] = std::abs(finest_details[i]);
  }
  const std::size_t n = magnitudes.size();
  const auto upper = magnitudes.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(magnitudes.begin(), upper, magnitudes.end());
  double median = *upper;
  if (n % 2 == 0) {
    median = 0.5 * (median + *std::max_element(magnitudes.begin(), upper));
  }
  return median / kMadScale;
}

RuleOutcome logistic_rule_checked(double d, const Logistic& spec, const QuadratureSpec& quad) {
  if (quad.kind != QuadratureKind::GaussHermiteStandardNormal) {
    throw DomainError("logistic rule needs a standard-normal Gauss-Hermite rule");
  }
  if (spec.p() >= 1.0 || d == 0.0) return {0.0, false};
  const double sigma = spec.sigma();
  if (sigma == 0.0) return {d, false};
  // Gauss-Hermite in u resolves the prior only when it is no sharper than the
  // noise.
  if (spec.tau() < sigma) return logistic_composite(d, spec);

  // theta = sigma u + d; phi(u) is carried by the weights.
  const auto n = static_cast<std::size_t>(quad.size());
  std::vector<double> thetas(n);
  std::vector<double> log_terms(n);
  const double log_cont = std::log1p(-spec.p());
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = sigma * quad.nodes[static_cast<Eigen::Index>(i)] + d;
    thetas[i] = theta;
    log_terms[i] = log_cont + log_logistic(theta, spec.tau());
  }
  const double z = d / sigma;
  const double log_point = spec.p() > 0.0
                               ? std::log(spec.p()) - 0.5 * z * z - kLogSqrt2Pi - std::log(sigma)
                               : -std::numeric_limits<double>::infinity();
  return posterior_mean(log_point, log_terms, quad.weights, thetas);
}

double logistic_rule(double d, const Logistic& spec, const QuadratureSpec& quad) {
  return logistic_rule_checked(d, spec, quad).value;
}

RuleOutcome beta_rule_checked(double d, const Beta& spec, const QuadratureSpec& quad) {
  if (quad.kind != QuadratureKind::GaussLegendreInterval) {
    throw DomainError("beta rule needs a Gauss-Legendre interval rule");
  }
  const double m = spec.m();
  if (spec.p() >= 1.0 || d == 0.0 || m == 0.0) return {0.0, false};
  const double sigma = spec.sigma();
  if (sigma == 0.0) return {std::clamp(d, -m, m), false};

  // Integrate over the likelihood window around the point of [-m, m]
  // nearest to d.
  const double centre = std::clamp(d, -m, m);
  const double lo = std::max(-m, centre - kWindowSigmas * sigma);
  const double hi = std::min(m, centre + kWindowSigmas * sigma);
  const QuadratureSpec rule = map_to_interval(quad, lo, hi);

  const double a = spec.a();
  const double log_beta_fn = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
  const double log_norm = -(2.0 * a - 1.0) * std::log(2.0 * m) - log_beta_fn;
  const double log_lik_norm = -kLogSqrt2Pi - std::log(sigma);
  const double log_cont = std::log1p(-spec.p()) + log_norm + log_lik_norm;

  const auto n = static_cast<std::size_t>(rule.size());
  std::vector<double> thetas(n);
  std::vector<double> log_terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = rule.nodes[static_cast<Eigen::Index>(i)];
    const double z = (d - theta) / sigma;
    double value = log_cont - 0.5 * z * z;
    if (a != 1.0) value += (a - 1.0) * std::log((m - theta) * (m + theta));
    thetas[i] = theta;
    log_terms[i] = value;
  }
  const double z = d / sigma;
  const double log_point = spec.p() > 0.0 ? std::log(spec.p()) - 0.5 * z * z + log_lik_norm
                                          : -std::numeric_limits<double>::infinity();
  return posterior_mean(log_point, log_terms, rule.weights, thetas);
}

double beta_rule(double d, const Beta& spec, const QuadratureSpec& quad) {
  return beta_rule_checked(d, spec, quad).value;
}

double lpm_rule(double d, const Lpm& spec) {
  const double magnitude = std::abs(d);
  if (magnitude < spec.threshold()) return 0.0;
  const double sigma = spec.sigma();
  const double radicand = d * d - 4.0 * sigma * sigma * (2.0 * spec.k() - 1.0);
  // At |d| == threshold the radicand can round to a tiny negative value.
  return 0.5 * (d + sign(d) * std::sqrt(std::max(radicand, 0.0)));
}

double abe_rule(double d, const Abe& spec) {
  const double sigma = spec.sigma();
  const double excess = d * d - 3.0 * sigma * sigma;
  if (d == 0.0 || std::abs(d) <= std::sqrt(3.0) * sigma || excess <= 0.0) return 0.0;
  return excess / d;
}

namespace {

// exp(-|d|/tau) and exp(-|d| sqrt(2 mu)), both divided by the larger of the
// two. Every BAMS quantity below is homogeneous in this pair (or carries the
// common factor through both numerator and denominator).
struct BamsExponentials {
  double prior;
  double noise;
  double log_scale;
};

BamsExponentials bams_exponentials(double d, double tau, double mu) {
  const double magnitude = std::abs(d);
  const double prior_rate = 1.0 / tau;
  const double noise_rate = std::sqrt(2.0 * mu);
  const double slowest = std::min(prior_rate, noise_rate);
  return {std::exp(-magnitude * (prior_rate - slowest)),
          std::exp(-magnitude * (noise_rate - slowest)), -magnitude * slowest};
}

double de_rule_scaled(double d, double tau, double mu, const BamsExponentials& e) {
  const double noise_scale = 1.0 / std::sqrt(2.0 * mu);
  const double gap = tau * tau - 1.0 / (2.0 * mu);
  const double numerator =
      tau * gap * d * e.prior + sign(d) * (tau * tau / mu) * (e.noise - e.prior);
  const double denominator = gap * (tau * e.prior - noise_scale * e.noise);
  return numerator / denominator;
}

double marginal_scaled(double tau, double mu, const BamsExponentials& e) {
  const double noise_scale = 1.0 / std::sqrt(2.0 * mu);
  return (tau * e.prior - noise_scale * e.noise) / (2.0 * tau * tau - 1.0 / mu);
}

}  // namespace

double bams_marginal(double d, double tau, double mu) {
  const auto e = bams_exponentials(d, tau, mu);
  return marginal_scaled(tau, mu, e) * std::exp(e.log_scale);
}

double bams_de_rule(double d, double tau, double mu) {
  return de_rule_scaled(d, tau, mu, bams_exponentials(d, tau, mu));
}

double bams_rule(double d, const Bams& spec) {
  if (d == 0.0) return 0.0;
  const double tau = spec.tau();
  const double mu = spec.mu();
  const auto e = bams_exponentials(d, tau, mu);
  const double marginal = (1.0 - spec.alpha()) * marginal_scaled(tau, mu, e);
  // DE(0, 1/sqrt(2 mu)) density at d, same scaling.
  const double null_density = spec.alpha() * std::sqrt(2.0 * mu) * 0.5 * e.noise;
  return marginal * de_rule_scaled(d, tau, mu, e) / (marginal + null_density);
}

double apply_rule(double d, const RuleSpec& rule) {
  struct Visitor {
    double d;
    double operator()(const Logistic& r) const { return logistic_rule(d, r); }
    double operator()(const Beta& r) const { return beta_rule(d, r); }
    double operator()(const Lpm& r) const { return lpm_rule(d, r); }
    double operator()(const Abe& r) const { return abe_rule(d, r); }
    double operator()(const Bams& r) const { return bams_rule(d, r); }
  };
  return std::visit(Visitor{d}, rule);
}

LevelHyperparameters av_policy(int level, const Eigen::Ref<const Eigen::VectorXd>& details,
                               const LevelPolicy& policy) {
  if (!(policy.gamma_exponent > 0.0)) {
    throw DomainError("level policy: gamma must be positive");
  }
  if (level < policy.primary_level || level >= 62 ||
      details.size() != (Eigen::Index{1} << level)) {
    throw DomainError("level policy: level " + std::to_string(level) +
                      " outside the detail range starting at J0 = " +
                      std::to_string(policy.primary_level));
  }
  LevelHyperparameters out;
  out.p = 1.0 - std::pow(static_cast<double>(level - policy.primary_level + 1),
                         -policy.gamma_exponent);
  out.m = details.size() > 0 ? details.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

Pyramid<double> shrink_pyramid(const Pyramid<double>& pyramid, const RuleSpec& rule,
                               const std::optional<LevelPolicy>& policy) {
  if (policy && policy->primary_level != pyramid.primary_level()) {
    throw DomainError("level policy J0 = " + std::to_string(policy->primary_level) +
                      " does not match pyramid J0 = " +
                      std::to_string(pyramid.primary_level()));
  }
  Pyramid<double> out = pyramid;
  for (int level = pyramid.primary_level(); level < pyramid.depth(); ++level) {
    RuleSpec level_rule = rule;
    if (policy) {
      const auto hyper = av_policy(level, pyramid.detail(level), *policy);
      if (const auto* r = std::get_if<Logistic>(&rule)) {
        level_rule = Logistic(hyper.p, r->tau(), r->sigma());
      } else if (const auto* r = std::get_if<Beta>(&rule)) {
        level_rule = Beta(hyper.p, r->a(), hyper.m, r->sigma());
      }
    }
    auto block = out.detail(level);
    for (Eigen::Index i = 0; i < block.size(); ++i) {
      block[i] = apply_rule(block[i], level_rule);
    }
  }
  return out;
}

RuleKind parse_rule_kind(std::string_view name) {
  if (name == "log" || name == "logistic") return RuleKind::Logistic;
  if (name == "beta") return RuleKind::Beta;
  if (name == "lpm") return RuleKind::Lpm;
  if (name == "abe") return RuleKind::Abe;
  if (name == "bams") return RuleKind::Bams;
  throw DomainError("unknown rule '" + std::string(name) + "' (expected log, beta, lpm, abe, bams)");
}

std::string_view rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::Logistic: return "log";
    case RuleKind::Beta: return "beta";
    case RuleKind::Lpm: return "lpm";
    case RuleKind::Abe: return "abe";
    case RuleKind::Bams: return "bams";
  }
  return "unknown";
}

RuleSpec resolve_rule(const RuleSettings& settings, double sigma, const Pyramid<double>& pyramid) {
  switch (settings.kind) {
    case RuleKind::Logistic:
      return Logistic(settings.p.value_or(kDefaultMixtureWeight),
                      settings.tau.value_or(kDefaultLogisticScale), sigma);
    case RuleKind::Beta: {
      double m = 0.0;
      if (settings.m) {
        m = *settings.m;
      } else if (pyramid.details().size() > 0) {
        m = pyramid.details().cwiseAbs().maxCoeff();
      }
      return Beta(settings.p.value_or(kDefaultMixtureWeight),
                  settings.a.value_or(kDefaultBetaShape), m, sigma);
    }
    case RuleKind::Lpm:
      return Lpm(settings.k.value_or(kDefaultLpmExponent), sigma);
    case RuleKind::Abe:
      return Abe(sigma);
    case RuleKind::Bams: {
      if ((!settings.tau || !settings.mu) && !(sigma > 0.0)) {
        throw DomainError("BAMS defaults need a positive noise estimate");
      }
      return Bams(settings.alpha.value_or(kDefaultBamsAlpha),
                  settings.tau.value_or(kDefaultBamsScaleFactor * sigma),
                  settings.mu.value_or(1.0 / (sigma * sigma)));
    }
  }
  throw DomainError("unknown rule kind");
}

}  // namespace wavecal
