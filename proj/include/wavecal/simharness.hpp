#pragma once

// Monte Carlo driver for the aggregated-curve simulation studies.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wavecal/decomposition.hpp"
#include "wavecal/shrinkage.hpp"
#include "wavecal/testbed.hpp"

namespace wavecal {

struct StudyConfig {
  /// 1, 2 or 3 selects the study's component set; 0 means `components` is used as given.
  int study_id = 1;
  std::vector<ComponentFunction> components;
  std::vector<Eigen::Index> sample_sizes = {512, 1024};
  std::vector<double> snrs = {3.0, 9.0};
  Eigen::Index curves = 50;
  int replicates = 20;
  std::vector<RuleSettings> rules;
  std::uint64_t seed = 42;
  int primary_level = 3;
  int vanishing_moments = 10;
  SigmaMode sigma_mode = SigmaMode::Pooled;
  WeightScheme weight_scheme = WeightScheme::uniform();
  /// Worker threads; never changes any result.
  unsigned threads = 1;
};

/// The five rules with harness defaults: Logistic and Beta use the level
/// policy with gamma = 2.
std::vector<RuleSettings> default_study_rules(int primary_level = 3);
RuleSettings default_rule_settings(RuleKind kind, int primary_level = 3);

/// Component list for the config (study set or custom list).
std::vector<ComponentFunction> resolved_components(const StudyConfig& config);

struct ReplicateResult {
  int study_id = 0;
  std::string rule;
  Eigen::Index samples_per_curve = 0;
  double snr = 0.0;
  int replicate = 0;
  std::string component;
  double mse = 0.0;
};

struct ReplicateFailure {
  int study_id = 0;
  std::string rule;
  Eigen::Index samples_per_curve = 0;
  double snr = 0.0;
  int replicate = 0;
  std::string stage;
  std::string message;
};

struct AmseRow {
  int study_id = 0;
  std::string rule;
  Eigen::Index samples_per_curve = 0;
  double snr = 0.0;
  std::string component;
  double amse = 0.0;
  /// Sample standard deviation of the MSEs (0 when only one replicate).
  double sd = 0.0;
  int count = 0;
};

struct StudyResult {
  std::vector<ReplicateResult> replicates;
  std::vector<AmseRow> amse;
  std::vector<ReplicateFailure> failures;
};

/// (1/M) sum (estimate - truth)^2.
double compute_mse(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                   const Eigen::Ref<const Eigen::VectorXd>& truth);

/// Runs every (M, snr, replicate) cell; all rules see the same dataset.
/// Replicate j draws from Rng::substream(seed, j), so a replicate shares its
/// weights and standard-normal draws across M and SNR cells.
StudyResult run_study(const StudyConfig& config);

/// Groups consecutive-key results in first-appearance order; AMSE is the
/// mean in stream order.
std::vector<AmseRow> aggregate_replicates(const std::vector<ReplicateResult>& stream);

/// Writes replicates.csv, amse.csv, failures.csv and run.json into `outdir`
/// (created if missing).
void emit_reports(const StudyResult& result, const StudyConfig& config,
                  const std::filesystem::path& outdir);

std::vector<ReplicateResult> read_replicates_csv(const std::filesystem::path& path);

/// JSON description of the resolved configuration, including the defaults
/// each rule falls back to.
std::string describe_config(const StudyConfig& config);
std::string describe_rule(const RuleSettings& settings);

}  // namespace wavecal
