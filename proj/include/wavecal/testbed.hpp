#pragma once

// Synthetic aggregated functional data: the six benchmark component curves,
// mixing weights, SNR-calibrated Gaussian noise and a reproducible RNG.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace wavecal {

enum class ComponentFunction { Bumps, Blocks, Doppler, Heavisine, Logit, SpaHet };

std::string_view component_name(ComponentFunction f);
ComponentFunction parse_component(std::string_view name);

/// Exact evaluation of the closed form at x in [0, 1]; DomainError otherwise.
double eval_component(ComponentFunction f, double x);

/// Evaluates f at every grid point.
Eigen::VectorXd eval_component(ComponentFunction f, const Eigen::VectorXd& grid);

/// t_m = m / M, m = 1..M.
Eigen::VectorXd sample_grid(Eigen::Index samples);

/// 64-bit Mersenne twister with portable uniform and normal variates.
///
/// Uniforms use the top 53 bits of each draw; normals use the inverse normal
/// CDF of one uniform, so the stream does not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, index), keyed through splitmix64.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct WeightScheme {
  enum class Kind { Uniform, Constant };
  Kind kind = Kind::Uniform;
  double lo = 0.5;
  double hi = 1.5;
  double value = 1.0;

  static WeightScheme uniform(double lo = 0.5, double hi = 1.5) {
    return {Kind::Uniform, lo, hi, 1.0};
  }
  static WeightScheme constant(double value = 1.0) { return {Kind::Constant, 0.0, 0.0, value}; }
};

/// L x I mixing matrix with full row rank; uniform draws are repeated until
/// the rank test passes.
Eigen::MatrixXd draw_weights(Eigen::Index components, Eigen::Index samples,
                             const WeightScheme& scheme, Rng& rng);

/// Population standard deviation of every entry of `values`.
double population_sd(const Eigen::MatrixXd& values);

/// sd(vec(truth * weights)) / snr.
double sigma_for_snr(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& weights, double snr);

struct DatasetSpec {
  std::vector<ComponentFunction> components;
  Eigen::Index samples_per_curve = 512;  // M
  Eigen::Index curves = 50;              // I
  double snr = 3.0;
  std::uint64_t seed = 42;
  WeightScheme weight_scheme = WeightScheme::uniform();
  /// Forces the noise sd instead of deriving it from the SNR (0 gives
  /// noiseless data).
  std::optional<double> sigma_override;
};

struct Dataset {
  Eigen::VectorXd grid;      // M
  Eigen::MatrixXd truth;     // M x L
  Eigen::MatrixXd weights;   // L x I
  Eigen::MatrixXd observed;  // M x I
  double sigma_true = 0.0;
  std::vector<ComponentFunction> components;
};

/// Draws weights, then noise column by column, from `rng`.
Dataset generate_dataset(const DatasetSpec& spec, Rng& rng);
/// Same, with Rng(spec.seed).
Dataset generate_dataset(const DatasetSpec& spec);

/// Component sets of the three simulation studies (L = 2, 4, 6).
std::vector<ComponentFunction> study_components(int study_id);

}  // namespace wavecal
