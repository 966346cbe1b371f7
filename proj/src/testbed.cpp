#include "wavecal/testbed.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SVD>
#include <boost/math/special_functions/erf.hpp>

#include "wavecal/errors.hpp"

namespace wavecal {
namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 11> kBumpLocations = {0.1,  0.13, 0.15, 0.23, 0.25, 0.40,
                                                   0.44, 0.65, 0.76, 0.78, 0.81};
constexpr std::array<double, 11> kBumpHeights = {4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
constexpr std::array<double, 11> kBumpWidths = {0.005, 0.005, 0.006, 0.01,  0.01, 0.03,
                                                0.01,  0.01,  0.005, 0.008, 0.005};
constexpr std::array<double, 11> kBlockHeights = {4,   -5,  3,   -4,  5,   -4.2,
                                                  2.1, 4.3, -3.1, 2.1, -4.2};

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double bumps(double x) {
  double sum = 0.0;
  for (std::size_t l = 0; l < kBumpLocations.size(); ++l) {
    const double u = std::abs((x - kBumpLocations[l]) / kBumpWidths[l]);
    sum += kBumpHeights[l] * std::pow(1.0 + u, -4.0);
  }
  return sum;
}

double blocks(double x) {
  double sum = 0.0;
  for (std::size_t l = 0; l < kBumpLocations.size(); ++l) {
    sum += kBlockHeights[l] * 0.5 * (1.0 + sgn(x - kBumpLocations[l]));
  }
  return sum;
}

double doppler(double x) {
  return std::sqrt(x * (1.0 - x)) * std::sin(2.1 * kPi / (x + 0.05));
}

double heavisine(double x) {
  return 4.0 * std::sin(4.0 * kPi * x) - sgn(x - 0.3) - sgn(0.72 - x);
}

double logit(double x) { return 1.0 / (1.0 + std::exp(-20.0 * (x - 0.5))); }

double spahet(double x) {
  const double shift = std::pow(2.0, -0.6);
  return std::sqrt(x * (1.0 - x)) * std::sin(2.0 * kPi * (1.0 + shift) / (x + shift));
}

}  // namespace

std::string_view component_name(ComponentFunction f) {
  switch (f) {
    case ComponentFunction::Bumps: return "bumps";
    case ComponentFunction::Blocks: return "blocks";
    case ComponentFunction::Doppler: return "doppler";
    case ComponentFunction::Heavisine: return "heavisine";
    case ComponentFunction::Logit: return "logit";
    case ComponentFunction::SpaHet: return "spahet";
  }
  return "unknown";
}

ComponentFunction parse_component(std::string_view name) {
  for (auto f : {ComponentFunction::Bumps, ComponentFunction::Blocks, ComponentFunction::Doppler,
                 ComponentFunction::Heavisine, ComponentFunction::Logit,
                 ComponentFunction::SpaHet}) {
    if (component_name(f) == name) return f;
  }
  throw DomainError("unknown component function '" + std::string(name) + "'");
}

double eval_component(ComponentFunction f, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("component functions are defined on [0, 1], got x = " + std::to_string(x));
  }
  switch (f) {
    case ComponentFunction::Bumps: return bumps(x);
    case ComponentFunction::Blocks: return blocks(x);
    case ComponentFunction::Doppler: return doppler(x);
    case ComponentFunction::Heavisine: return heavisine(x);
    case ComponentFunction::Logit: return logit(x);
    case ComponentFunction::SpaHet: return spahet(x);
  }
  throw DomainError("unknown component function");
}

Eigen::VectorXd eval_component(ComponentFunction f, const Eigen::VectorXd& grid) {
  return grid.unaryExpr([f](double x) { return eval_component(f, x); });
}

Eigen::VectorXd sample_grid(Eigen::Index samples) {
  if (samples < 2) throw DomainError("sample grid needs at least two points");
  Eigen::VectorXd grid(samples);
  for (Eigen::Index m = 0; m < samples; ++m) {
    grid[m] = static_cast<double>(m + 1) / static_cast<double>(samples);
  }
  return grid;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uniform_open());
}

Eigen::MatrixXd draw_weights(Eigen::Index components, Eigen::Index samples,
                             const WeightScheme& scheme, Rng& rng) {
  if (components < 1) throw DomainError("need at least one component");
  if (samples < components) {
    throw DomainError("need at least as many samples (" + std::to_string(samples) +
                      ") as components (" + std::to_string(components) + ")");
  }
  if (scheme.kind == WeightScheme::Kind::Constant) {
    if (components > 1) {
      throw RankError("constant weights are rank deficient for more than one component");
    }
    return Eigen::MatrixXd::Constant(components, samples, scheme.value);
  }
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::MatrixXd y(components, samples);
    for (Eigen::Index i = 0; i < samples; ++i) {
      for (Eigen::Index l = 0; l < components; ++l) {
        y(l, i) = rng.uniform(scheme.lo, scheme.hi);
      }
    }
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(y).singularValues();
    if (s[s.size() - 1] >= 1e-10 * s[0]) return y;
  }
  throw RankError("could not draw a full-rank mixing matrix");
}

double population_sd(const Eigen::MatrixXd& values) {
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().mean());
}

double sigma_for_snr(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& weights, double snr) {
  if (!(snr > 0.0)) throw DomainError("snr must be positive");
  const double sd = population_sd(truth * weights);
  if (!(sd > 0.0)) throw DomainError("noiseless aggregate is constant; SNR is undefined");
  return sd / snr;
}

Dataset generate_dataset(const DatasetSpec& spec, Rng& rng) {
  if (spec.samples_per_curve < 2 ||
      (spec.samples_per_curve & (spec.samples_per_curve - 1)) != 0) {
    throw DimensionError("samples per curve must be a power of two, got " +
                         std::to_string(spec.samples_per_curve));
  }
  const auto components = static_cast<Eigen::Index>(spec.components.size());
  if (components < 1) throw DomainError("dataset needs at least one component");

  Dataset data;
  data.components = spec.components;
  data.grid = sample_grid(spec.samples_per_curve);
  data.truth.resize(spec.samples_per_curve, components);
  for (Eigen::Index l = 0; l < components; ++l) {
    data.truth.col(l) = eval_component(spec.components[static_cast<std::size_t>(l)], data.grid);
  }
  data.weights = draw_weights(components, spec.curves, spec.weight_scheme, rng);
  const Eigen::MatrixXd clean = data.truth * data.weights;
  data.sigma_true = spec.sigma_override ? *spec.sigma_override
                                        : sigma_for_snr(data.truth, data.weights, spec.snr);
  data.observed = clean;
  if (data.sigma_true > 0.0) {
    for (Eigen::Index i = 0; i < data.observed.cols(); ++i) {
      for (Eigen::Index m = 0; m < data.observed.rows(); ++m) {
        data.observed(m, i) += data.sigma_true * rng.normal();
      }
    }
  }
  return data;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  Rng rng(spec.seed);
  return generate_dataset(spec, rng);
}

std::vector<ComponentFunction> study_components(int study_id) {
  using F = ComponentFunction;
  switch (study_id) {
    case 1: return {F::Bumps, F::Blocks};
    case 2: return {F::Bumps, F::Blocks, F::Doppler, F::Logit};
    case 3: return {F::Bumps, F::Blocks, F::Doppler, F::Heavisine, F::Logit, F::SpaHet};
    default: throw DomainError("study id must be 1, 2 or 3, got " + std::to_string(study_id));
  }
}

}  // namespace wavecal
