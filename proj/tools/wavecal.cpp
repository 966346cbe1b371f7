// wavecal: command-line front end for the estimation pipeline and the
// simulation studies.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wavecal/csv_io.hpp"
#include "wavecal/decomposition.hpp"
#include "wavecal/errors.hpp"
#include "wavecal/simharness.hpp"
#include "wavecal/testbed.hpp"

namespace {

using namespace wavecal;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<Eigen::Index> parse_sizes(const std::string& text) {
  if (text == "both") return {512, 1024};
  std::vector<Eigen::Index> sizes;
  for (const auto& item : split_list(text)) sizes.push_back(std::stoll(item));
  return sizes;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> values;
  for (const auto& item : split_list(text)) values.push_back(std::stod(item));
  return values;
}

std::vector<RuleSettings> parse_rules(const std::string& text, int primary_level) {
  std::vector<RuleSettings> rules;
  for (const auto& item : split_list(text)) {
    rules.push_back(default_rule_settings(parse_rule_kind(item), primary_level));
  }
  return rules;
}

struct SimulateOptions {
  int study = 1;
  std::string sizes = "both";
  std::string snrs = "3,9";
  int replicates = 20;
  bool full = false;
  std::string rules = "log,beta,lpm,abe,bams";
  std::uint64_t seed = 42;
  std::string out = "results";
  int curves = 50;
  int primary_level = 3;
  int moments = 10;
  unsigned threads = 1;
  std::string sigma_mode = "pooled";
};

SigmaMode parse_sigma_mode(const std::string& text) {
  if (text == "pooled") return SigmaMode::Pooled;
  if (text == "per-column") return SigmaMode::PerColumn;
  throw DomainError("sigma mode must be 'pooled' or 'per-column', got '" + text + "'");
}

int run_simulate(const SimulateOptions& opt) {
  StudyConfig config;
  config.study_id = opt.study;
  config.sample_sizes = parse_sizes(opt.sizes);
  config.snrs = parse_reals(opt.snrs);
  config.replicates = opt.full ? 100 : opt.replicates;
  config.curves = opt.curves;
  config.primary_level = opt.primary_level;
  config.vanishing_moments = opt.moments;
  config.rules = parse_rules(opt.rules, opt.primary_level);
  config.seed = opt.seed;
  config.threads = opt.threads;
  config.sigma_mode = parse_sigma_mode(opt.sigma_mode);

  const StudyResult result = run_study(config);
  emit_reports(result, config, opt.out);

  fmt::print("{:<6} {:>5} {:>5} {:<10} {:>12} {:>12}\n", "rule", "M", "snr", "component", "amse",
             "sd");
  for (const auto& row : result.amse) {
    fmt::print("{:<6} {:>5} {:>5g} {:<10} {:>12.6f} {:>12.6f}\n", row.rule, row.samples_per_curve,
               row.snr, row.component, row.amse, row.sd);
  }
  if (!result.failures.empty()) {
    fmt::print(stderr, "{} replicate(s) failed; see {}\n", result.failures.size(),
               (std::filesystem::path(opt.out) / "failures.csv").string());
  }
  fmt::print("reports written to {}\n", opt.out);
  return 0;
}

struct EstimateOptions {
  std::string input;
  std::string weights;
  std::string rule = "lpm";
  std::string out = "estimate";
  int primary_level = 3;
  int moments = 10;
  std::string sigma = "pooled";
  bool level_policy = true;
};

int run_estimate(const EstimateOptions& opt) {
  const ObservedCurves curves = [&] {
    try {
      return read_observed_csv(opt.input);
    } catch (const std::exception& e) {
      throw StageError("read input", e.what());
    }
  }();
  const Eigen::MatrixXd weights = [&] {
    try {
      return read_matrix_csv(opt.weights);
    } catch (const std::exception& e) {
      throw StageError("read weights", e.what());
    }
  }();

  EstimationConfig config;
  config.filter = make_filter(WaveletFamily::Daubechies, opt.moments);
  config.primary_level = opt.primary_level;
  config.rule = default_rule_settings(parse_rule_kind(opt.rule), opt.primary_level);
  if (!opt.level_policy) config.rule.policy.reset();
  if (opt.sigma == "pooled" || opt.sigma == "per-column") {
    config.sigma_mode = parse_sigma_mode(opt.sigma);
  } else {
    config.sigma_mode = SigmaMode::Fixed;
    config.fixed_sigma = std::stod(opt.sigma);
  }

  const Estimate estimate = estimate_components(curves.observed, weights, config);

  std::error_code ec;
  std::filesystem::create_directories(opt.out, ec);
  if (ec) throw IoError("cannot create " + opt.out + ": " + ec.message());
  const auto path = std::filesystem::path(opt.out) / "estimate.csv";
  write_estimate_csv(path, curves.grid, estimate.components);
  fmt::print("estimated {} component(s) on {} points (sigma = {:.6g}); wrote {}\n",
             estimate.components.cols(), estimate.components.rows(), estimate.sigma.mean(),
             path.string());
  return 0;
}

struct GenerateOptions {
  int study = 1;
  int size = 512;
  double snr = 3.0;
  int curves = 50;
  std::uint64_t seed = 42;
  std::string out = "dataset";
};

int run_generate(const GenerateOptions& opt) {
  DatasetSpec spec;
  spec.components = study_components(opt.study);
  spec.samples_per_curve = opt.size;
  spec.curves = opt.curves;
  spec.snr = opt.snr;
  spec.seed = opt.seed;
  const Dataset data = generate_dataset(spec);

  std::error_code ec;
  std::filesystem::create_directories(opt.out, ec);
  if (ec) throw IoError("cannot create " + opt.out + ": " + ec.message());
  const std::filesystem::path dir(opt.out);
  write_observed_csv(dir / "data.csv", data.grid, data.observed);
  write_truth_csv(dir / "truth.csv", data);
  write_matrix_csv(dir / "weights.csv", data.weights);
  fmt::print("wrote {} curves of {} points (sigma = {:.6g}) to {}\n", data.observed.cols(),
             data.observed.rows(), data.sigma_true, opt.out);
  return 0;
}

int run_rules(int primary_level) {
  for (const auto& rule : default_study_rules(primary_level)) {
    fmt::print("{}\n", describe_rule(rule));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet shrinkage estimation of component curves from aggregated data"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo simulation study");
  simulate->add_option("--study", sim.study, "Study id (1, 2 or 3)")
      ->check(CLI::IsMember({1, 2, 3}));
  simulate->add_option("--m", sim.sizes, "Samples per curve: 512, 1024, both or a list");
  simulate->add_option("--snr", sim.snrs, "Comma-separated SNR values");
  auto* replicates = simulate->add_option("--replicates", sim.replicates, "Replicates per cell")
                         ->check(CLI::PositiveNumber);
  simulate->add_flag("--full", sim.full, "Full-scale run with 100 replicates")
      ->excludes(replicates);
  simulate->add_option("--rules", sim.rules, "Comma-separated rules: log,beta,lpm,abe,bams");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_option("--curves", sim.curves, "Aggregated curves per dataset (I)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--j0", sim.primary_level, "Primary resolution level");
  simulate->add_option("--moments", sim.moments, "Daubechies vanishing moments (1..10)");
  simulate->add_option("--threads", sim.threads, "Worker threads");
  simulate->add_option("--sigma", sim.sigma_mode, "Noise estimate: pooled or per-column");

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate component curves from a CSV dataset");
  estimate->add_option("--input", est.input, "Observed curves CSV (t,sample_id,value)")
      ->required();
  estimate->add_option("--weights", est.weights, "Mixing weights CSV (L rows, I columns)")
      ->required();
  estimate->add_option("--rule", est.rule, "Rule: log, beta, lpm, abe or bams");
  estimate->add_option("--out", est.out, "Output directory");
  estimate->add_option("--j0", est.primary_level, "Primary resolution level");
  estimate->add_option("--moments", est.moments, "Daubechies vanishing moments (1..10)");
  estimate->add_option("--sigma", est.sigma, "pooled, per-column or a fixed noise sd");
  estimate->add_flag("!--no-level-policy", est.level_policy,
                     "Use static p and m for the log and beta rules");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  generate->add_option("--study", gen.study, "Study id (1, 2 or 3)")
      ->check(CLI::IsMember({1, 2, 3}));
  generate->add_option("--m", gen.size, "Samples per curve");
  generate->add_option("--snr", gen.snr, "Signal-to-noise ratio");
  generate->add_option("--curves", gen.curves, "Aggregated curves (I)");
  generate->add_option("--seed", gen.seed, "Seed");
  generate->add_option("--out", gen.out, "Output directory");

  int rules_j0 = 3;
  bool show = false;
  auto* rules = app.add_subcommand("rules", "Print rule hyperparameters");
  rules->add_flag("--show", show, "Show each rule's resolved hyperparameters");
  rules->add_option("--j0", rules_j0, "Primary resolution level");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (estimate->parsed()) return run_estimate(est);
    if (generate->parsed()) return run_generate(gen);
    if (rules->parsed()) return run_rules(rules_j0);
  } catch (const StageError& e) {
    fmt::print(stderr, "error [{}]\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    const char* stage = simulate->parsed()   ? "simulate"
                        : estimate->parsed() ? "estimate"
                        : generate->parsed() ? "generate"
                                             : "rules";
    fmt::print(stderr, "error [{}: {}]\n", stage, e.what());
    return 1;
  }
  return 0;
}
