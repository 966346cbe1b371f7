// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wavecal/decomposition.hpp"
#include "wavecal/shrinkage.hpp"
#include "wavecal/simharness.hpp"
#include "wavecal/testbed.hpp"
#include "wavecal/wavelet.hpp"

namespace {

using namespace wavecal;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;  // 0: no budget
  std::function<Outcome()> run;
};

// Shared between criteria 7's check and report.
std::string g_note;

Outcome transform_correctness() {
  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> dist;
  double worst_roundtrip = 0.0;
  double worst_energy = 0.0;
  int signals = 0;
  for (int v : {1, 4, 10}) {
    const auto f = make_filter(WaveletFamily::Daubechies, v);
    for (Eigen::Index n : {64, 512, 1024}) {
      for (int s = 0; s < 1000; ++s) {
        Eigen::VectorXd x(n);
        for (auto& e : x) e = dist(gen);
        const auto p = dwt(x, f, 3);
        worst_roundtrip = std::max(worst_roundtrip, (idwt(p, f) - x).cwiseAbs().maxCoeff());
        worst_energy = std::max(worst_energy, std::abs(p.flat().squaredNorm() / x.squaredNorm() - 1));
        ++signals;
      }
    }
  }
  std::ostringstream os;
  os << signals << " signals, max round-trip " << worst_roundtrip << ", max energy rel "
     << worst_energy;
  return {worst_roundtrip < 1e-8 && worst_energy < 1e-8, os.str()};
}

Outcome rule_oracles() {
  double worst_log = 0.0;
  double worst_beta = 0.0;
  double worst_bams = 0.0;
  struct L { double p, tau, sigma; };
  struct B { double p, a, m, sigma; };
  struct S { double alpha, tau, mu; };
  for (const L s : {L{0.9, 1.0, 1.0}, L{0.5, 2.0, 1.0}, L{0.7, 0.5, 2.0}}) {
    for (int i = 0; i <= 200; ++i) {
      const double d = -10.0 + 0.1 * i;
      const double got = logistic_rule(d, Logistic(s.p, s.tau, s.sigma));
      const double want = oracle::logistic_posterior_mean(d, s.p, s.tau, s.sigma, 200'000);
      worst_log = std::max(worst_log, std::abs(got - want));
    }
  }
  for (const B s : {B{0.0, 1.0, 10.0, 1.0}, B{0.5, 2.0, 10.0, 1.0}, B{0.9, 3.0, 5.0, 0.8}}) {
    for (int i = 0; i <= 200; ++i) {
      const double d = -10.0 + 0.1 * i;
      const double got = beta_rule(d, Beta(s.p, s.a, s.m, s.sigma));
      const double want = s.a == 1.0 && s.p == 0.0
                              ? oracle::truncated_normal_mean(d, s.m, s.sigma)
                              : oracle::beta_posterior_mean(d, s.p, s.a, s.m, s.sigma, 100'000);
      worst_beta = std::max(worst_beta, std::abs(got - want));
    }
  }
  for (const S s : {S{0.8, 3.0, 1.0}, S{0.5, 2.0, 1.0}, S{0.95, 0.4, 0.3}}) {
    for (int i = 0; i <= 200; ++i) {
      const double d = -10.0 + 0.1 * i;
      const double got = bams_rule(d, Bams(s.alpha, s.tau, s.mu));
      worst_bams = std::max(worst_bams, std::abs(got - oracle::bams_direct(d, s.alpha, s.tau, s.mu)));
    }
  }
  std::ostringstream os;
  os << "max |diff| logistic " << worst_log << ", beta " << worst_beta << ", bams " << worst_bams;
  return {worst_log < 1e-6 && worst_beta < 1e-6 && worst_bams < 1e-10, os.str()};
}

Outcome spot_values() {
  Eigen::VectorXd x(4);
  x << 0.6745, -0.6745, 0.6745, 0.6745;
  const double values[][2] = {
      {abe_rule(2.0, Abe(1.0)), 0.5},
      {lpm_rule(3.0, Lpm(1.0, 1.0)), (3.0 + std::sqrt(5.0)) / 2.0},
      {estimate_sigma(x), 1.0},
      {eval_component(ComponentFunction::Blocks, 0.5), 0.9},
      {eval_component(ComponentFunction::Heavisine, 0.5), -2.0},
      {eval_component(ComponentFunction::Logit, 0.5), 0.5},
  };
  double worst = 0.0;
  for (const auto& v : values) worst = std::max(worst, std::abs(v[0] - v[1]));
  std::ostringstream os;
  os << "6 values, max error " << worst;
  return {worst < 1e-9, os.str()};
}

Outcome property_suite() {
  std::mt19937_64 gen(77);
  auto uniform = [&gen](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  };
  long checks = 0;
  long failures = 0;
  auto check = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };

  for (int draw = 0; draw < 10; ++draw) {
    const double sigma = uniform(0.2, 3.0);
    double tau = uniform(0.2, 4.0);
    double mu = uniform(0.05, 4.0);
    while (std::abs(2.0 * mu * tau * tau - 1.0) < 1e-3) mu = uniform(0.05, 4.0);
    const double k = uniform(0.51, 3.0);
    const std::vector<RuleSpec> rules = {
        Logistic(uniform(0.01, 0.99), uniform(0.2, 4.0), sigma),
        Beta(uniform(0.01, 0.99), uniform(1.0, 5.0), uniform(0.5, 20.0), sigma),
        Lpm(k, sigma), Abe(sigma), Bams(uniform(0.01, 0.99), tau, mu)};
    for (const auto& rule : rules) {
      const bool quadrature = rule.index() <= 1;
      for (int i = -100; i <= 100; ++i) {
        const double d = 10.0 * sigma * i / 100.0;
        const double plus = apply_rule(d, rule);
        const double minus = apply_rule(-d, rule);
        check(std::abs(plus + minus) <= (quadrature ? 1e-8 : 0.0));
        check(std::abs(plus) <= std::abs(d) * (1.0 + 1e-12) + 1e-14);
      }
    }
    const double lambda_lpm = 2.0 * sigma * std::sqrt(2.0 * k - 1.0);
    const double lambda_abe = std::sqrt(3.0) * sigma;
    for (int i = -300; i <= 300; ++i) {
      const double d = i * sigma / 37.0;
      check((lpm_rule(d, Lpm(k, sigma)) == 0.0) == (std::abs(d) < lambda_lpm));
      check((abe_rule(d, Abe(sigma)) == 0.0) == (std::abs(d) <= lambda_abe));
    }
  }
  // Monotone shrinkage in p (logistic, beta).
  for (double d : {0.3, 1.0, 2.5, 5.0, 8.0}) {
    double prev_log = d;
    double prev_beta = d;
    for (int i = 1; i < 20; ++i) {
      const double p = i / 20.0;
      const double log_v = logistic_rule(d, Logistic(p, 1.0, 1.0));
      const double beta_v = beta_rule(d, Beta(p, 2.0, 10.0, 1.0));
      check(log_v < prev_log);
      check(beta_v < prev_beta);
      prev_log = log_v;
      prev_beta = beta_v;
    }
  }
  // Shape effect of the beta slab, without the point mass.
  for (double m : {3.0, 10.0}) {
    for (double d = 0.1; d <= 10.0; d += 0.1) {
      double prev_a = INFINITY;
      for (double a = 1.0; a <= 8.0; a += 0.5) {
        const double v = beta_rule(d, Beta(0.0, a, m, 1.0));
        check(v < prev_a);
        prev_a = v;
      }
    }
  }
  std::ostringstream os;
  os << checks << " checks, " << failures << " failures";
  return {failures == 0, os.str()};
}

Outcome exact_recovery() {
  double worst = 0.0;
  for (int study : {1, 3}) {
    DatasetSpec spec;
    spec.components = study_components(study);
    spec.samples_per_curve = 512;
    spec.sigma_override = 0.0;
    const Dataset data = generate_dataset(spec);
    for (RuleKind kind : {RuleKind::Lpm, RuleKind::Abe}) {
      EstimationConfig config;
      config.rule.kind = kind;
      config.sigma_mode = SigmaMode::Fixed;
      config.fixed_sigma = 0.0;
      const auto est = estimate_components(data.observed, data.weights, config);
      worst = std::max(worst, (est.components - data.truth).cwiseAbs().maxCoeff());
    }
  }
  std::ostringstream os;
  os << "studies 1 and 3, LPM and ABE, max abs error " << worst;
  return {worst < 1e-6, os.str()};
}

Outcome least_squares() {
  std::mt19937_64 gen(606);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const Eigen::Index components = 2 + 2 * (instance % 3);
    Eigen::MatrixXd shrunk(64, 10);
    for (auto& v : shrunk.reshaped()) v = coef(gen);
    Rng rng(static_cast<std::uint64_t>(instance));
    const Eigen::MatrixXd y = draw_weights(components, 10, WeightScheme::uniform(), rng);
    const Eigen::MatrixXd diff = solve_gamma(shrunk, y) - oracle::normal_equations(shrunk, y);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  std::ostringstream os;
  os << "100 instances, max |diff| " << worst;
  return {worst < 1e-8, os.str()};
}

const AmseRow* find_row(const std::vector<AmseRow>& rows, const std::string& rule, double snr,
                        const std::string& component) {
  for (const auto& r : rows) {
    if (r.rule == rule && r.snr == snr && r.component == component) return &r;
  }
  return nullptr;
}

Outcome study_one_direction() {
  StudyConfig config;
  config.study_id = 1;
  config.sample_sizes = {512};
  config.replicates = 20;
  config.seed = 42;
  config.rules = default_study_rules();
  const auto result = run_study(config);
  bool ok = result.failures.empty();
  std::ostringstream os;
  for (const char* component : {"bumps", "blocks"}) {
    const auto* lpm = find_row(result.amse, "lpm", 9.0, component);
    const auto* log = find_row(result.amse, "log", 9.0, component);
    if (!lpm || !log) return {false, "missing AMSE rows"};
    ok = ok && lpm->amse < log->amse;
    os << component << " snr9 lpm " << lpm->amse << " < log " << log->amse << "; ";
    for (const auto& rule : config.rules) {
      const std::string name(rule_kind_name(rule.kind));
      const auto* lo = find_row(result.amse, name, 3.0, component);
      const auto* hi = find_row(result.amse, name, 9.0, component);
      ok = ok && lo && hi && hi->amse <= lo->amse;
    }
    // Ranking at SNR 3 is reported only.
    std::string best;
    double best_amse = INFINITY;
    for (const auto& r : result.amse) {
      if (r.snr == 3.0 && r.component == component && r.amse < best_amse) {
        best_amse = r.amse;
        best = r.rule;
      }
    }
    g_note += std::string(component) + " snr3 best=" + best + (best == "log" ? "" : " (log expected, non-blocking)") + "; ";
  }
  os << "every rule improves from snr 3 to 9: " << (ok ? "yes" : "no");
  return {ok, os.str()};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  StudyConfig config;
  config.study_id = 3;
  config.replicates = 20;
  config.rules = default_study_rules();
  const fs::path base = fs::temp_directory_path() / "wavecal_acceptance";
  fs::remove_all(base);
  config.threads = 1;
  emit_reports(run_study(config), config, base / "a");
  config.threads = 3;
  emit_reports(run_study(config), config, base / "b");
  bool same = true;
  for (const char* name : {"replicates.csv", "amse.csv"}) {
    const auto a = slurp(base / "a" / name);
    same = same && !a.empty() && a == slurp(base / "b" / name);
  }
  fs::remove_all(base);
  return {same, std::string("study 3, N=20, M={512,1024}, 1 vs 3 threads: ") +
                    (same ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "transform correctness", 10.0, transform_correctness},
      {2, "rule oracle equivalence", 5.0, rule_oracles},
      {3, "closed-form spot values", 0.0, spot_values},
      {4, "property suite", 0.0, property_suite},
      {5, "exact recovery", 0.0, exact_recovery},
      {6, "least-squares oracle", 0.0, least_squares},
      {7, "study 1 qualitative direction", 60.0, study_one_direction},
      {8, "determinism", 120.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds <= 0.0 || seconds < c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failed;
    const std::string budget =
        c.budget_seconds > 0.0 ? ", budget " + std::to_string(static_cast<int>(c.budget_seconds)) + "s" : "";
    std::printf("[%s] criterion %d: %s (%.2fs%s) %s%s\n", pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), seconds, budget.c_str(), outcome.detail.c_str(),
                in_time ? "" : " [over time budget]");
    if (c.id == 7 && !g_note.empty()) std::printf("       note: %s\n", g_note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
