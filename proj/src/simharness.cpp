#include "wavecal/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wavecal/csv_io.hpp"
#include "wavecal/errors.hpp"

namespace wavecal {
namespace {

using Json = nlohmann::ordered_json;

struct Cell {
  std::size_t size_index;
  std::size_t snr_index;
  int replicate;
};

struct CellOutput {
  std::vector<ReplicateResult> results;
  std::vector<ReplicateFailure> failures;
};

CellOutput run_cell(const StudyConfig& config, const std::vector<ComponentFunction>& components,
                    const WaveletFilter<double>& filter, const Cell& cell) {
  CellOutput out;
  const Eigen::Index size = config.sample_sizes[cell.size_index];
  const double snr = config.snrs[cell.snr_index];

  DatasetSpec spec;
  spec.components = components;
  spec.samples_per_curve = size;
  spec.curves = config.curves;
  spec.snr = snr;
  spec.seed = config.seed;
  spec.weight_scheme = config.weight_scheme;

  auto fail_all = [&](const std::string& stage, const std::string& message) {
    for (const auto& rule : config.rules) {
      out.failures.push_back({config.study_id, std::string(rule_kind_name(rule.kind)), size, snr,
                              cell.replicate, stage, message});
    }
  };

  Dataset data;
  try {
    Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(cell.replicate));
    data = generate_dataset(spec, rng);
  } catch (const std::exception& e) {
    fail_all("generate", e.what());
    return out;
  }

  for (const auto& rule : config.rules) {
    const std::string name(rule_kind_name(rule.kind));
    EstimationConfig estimation{filter, config.primary_level, rule, config.sigma_mode, 0.0};
    try {
      const Estimate estimate = estimate_components(data.observed, data.weights, estimation);
      for (std::size_t l = 0; l < components.size(); ++l) {
        const auto col = static_cast<Eigen::Index>(l);
        out.results.push_back({config.study_id, name, size, snr, cell.replicate,
                               std::string(component_name(components[l])),
                               compute_mse(estimate.components.col(col), data.truth.col(col))});
      }
    } catch (const StageError& e) {
      out.failures.push_back({config.study_id, name, size, snr, cell.replicate, e.stage(),
                              e.what()});
    } catch (const std::exception& e) {
      out.failures.push_back({config.study_id, name, size, snr, cell.replicate, "estimate",
                              e.what()});
    }
  }
  return out;
}

void validate(const StudyConfig& config) {
  if (config.replicates < 1) throw DomainError("need at least one replicate");
  if (config.rules.empty()) throw DomainError("need at least one rule");
  if (config.sample_sizes.empty()) throw DomainError("need at least one sample size");
  if (config.snrs.empty()) throw DomainError("need at least one SNR value");
  for (auto size : config.sample_sizes) dyadic_depth(size);
  for (double snr : config.snrs) {
    if (!(snr > 0.0)) throw DomainError("SNR values must be positive");
  }
}

std::string join_names(const std::vector<ComponentFunction>& components) {
  std::string out;
  for (auto f : components) {
    if (!out.empty()) out += ',';
    out += component_name(f);
  }
  return out;
}

std::string sigma_mode_name(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::Pooled: return "pooled";
    case SigmaMode::PerColumn: return "per-column";
    case SigmaMode::Fixed: return "fixed";
  }
  return "unknown";
}

Json rule_json(const RuleSettings& s) {
  Json j;
  j["rule"] = rule_kind_name(s.kind);
  auto value_or = [](const std::optional<double>& v, const Json& fallback) {
    return v ? Json(*v) : fallback;
  };
  switch (s.kind) {
    case RuleKind::Logistic:
      j["p"] = s.policy ? Json("1 - (j - J0 + 1)^-gamma") : value_or(s.p, kDefaultMixtureWeight);
      j["tau"] = value_or(s.tau, kDefaultLogisticScale);
      j["sigma"] = "sigma_hat";
      break;
    case RuleKind::Beta:
      j["p"] = s.policy ? Json("1 - (j - J0 + 1)^-gamma") : value_or(s.p, kDefaultMixtureWeight);
      j["a"] = value_or(s.a, kDefaultBetaShape);
      j["m"] = s.policy ? Json("max_k |d_jk| per level") : value_or(s.m, "max |detail|");
      j["sigma"] = "sigma_hat";
      break;
    case RuleKind::Lpm:
      j["k"] = value_or(s.k, kDefaultLpmExponent);
      j["sigma"] = "sigma_hat";
      j["threshold"] = "2 sigma sqrt(2k - 1)";
      break;
    case RuleKind::Abe:
      j["sigma"] = "sigma_hat";
      j["threshold"] = "sqrt(3) sigma";
      break;
    case RuleKind::Bams:
      j["alpha"] = value_or(s.alpha, kDefaultBamsAlpha);
      j["tau"] = value_or(s.tau, fmt::format("{} * sigma_hat", kDefaultBamsScaleFactor));
      j["mu"] = value_or(s.mu, "1 / sigma_hat^2");
      break;
  }
  if (s.policy) {
    j["level_policy"] = {{"gamma", s.policy->gamma_exponent}, {"J0", s.policy->primary_level}};
  }
  return j;
}

// Rule with the lowest AMSE for every (M, snr, component) cell.
Json best_rules(const std::vector<AmseRow>& rows) {
  std::map<std::tuple<Eigen::Index, double, std::string>, const AmseRow*> best;
  std::vector<std::tuple<Eigen::Index, double, std::string>> order;
  for (const auto& row : rows) {
    const auto key = std::make_tuple(row.samples_per_curve, row.snr, row.component);
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, &row);
      order.push_back(key);
    } else if (row.amse < it->second->amse) {
      it->second = &row;
    }
  }
  Json out = Json::array();
  for (const auto& key : order) {
    const AmseRow* row = best.at(key);
    out.push_back({{"M", row->samples_per_curve},
                   {"snr", row->snr},
                   {"component", row->component},
                   {"best_rule", row->rule},
                   {"amse", row->amse}});
  }
  return out;
}

}  // namespace

RuleSettings default_rule_settings(RuleKind kind, int primary_level) {
  RuleSettings s;
  s.kind = kind;
  if (kind == RuleKind::Logistic || kind == RuleKind::Beta) {
    s.policy = LevelPolicy{2.0, primary_level};
  }
  return s;
}

std::vector<RuleSettings> default_study_rules(int primary_level) {
  std::vector<RuleSettings> rules;
  for (auto kind :
       {RuleKind::Logistic, RuleKind::Beta, RuleKind::Lpm, RuleKind::Abe, RuleKind::Bams}) {
    rules.push_back(default_rule_settings(kind, primary_level));
  }
  return rules;
}

std::vector<ComponentFunction> resolved_components(const StudyConfig& config) {
  if (config.study_id == 0) {
    if (config.components.empty()) throw DomainError("custom study needs components");
    return config.components;
  }
  return study_components(config.study_id);
}

double compute_mse(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                   const Eigen::Ref<const Eigen::VectorXd>& truth) {
  if (estimate.size() != truth.size()) {
    throw DimensionError("estimate has " + std::to_string(estimate.size()) +
                         " points, truth has " + std::to_string(truth.size()));
  }
  if (estimate.size() == 0) throw DimensionError("cannot compute MSE of empty vectors");
  return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

StudyResult run_study(const StudyConfig& config) {
  validate(config);
  const auto components = resolved_components(config);
  const auto filter = make_filter(WaveletFamily::Daubechies, config.vanishing_moments);

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) {
    for (std::size_t r = 0; r < config.snrs.size(); ++r) {
      for (int j = 0; j < config.replicates; ++j) cells.push_back({s, r, j});
    }
  }

  std::vector<CellOutput> outputs(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      outputs[i] = run_cell(config, components, filter, cells[i]);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Canonical order: rule, M, snr, replicate, component (config order).
  StudyResult result;
  for (const auto& rule : config.rules) {
    const std::string name(rule_kind_name(rule.kind));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      for (const auto& r : outputs[i].results) {
        if (r.rule == name) result.replicates.push_back(r);
      }
      for (const auto& f : outputs[i].failures) {
        if (f.rule == name) result.failures.push_back(f);
      }
    }
  }
  result.amse = aggregate_replicates(result.replicates);
  return result;
}

std::vector<AmseRow> aggregate_replicates(const std::vector<ReplicateResult>& stream) {
  using Key = std::tuple<int, std::string, Eigen::Index, double, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<std::vector<double>> values;
  std::vector<AmseRow> rows;
  for (const auto& r : stream) {
    const Key key{r.study_id, r.rule, r.samples_per_curve, r.snr, r.component};
    auto [it, inserted] = index.emplace(key, rows.size());
    if (inserted) {
      rows.push_back({r.study_id, r.rule, r.samples_per_curve, r.snr, r.component, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[it->second].push_back(r.mse);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    const auto& v = values[g];
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[g].amse = mean;
    rows[g].sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    rows[g].count = static_cast<int>(v.size());
  }
  return rows;
}

std::string describe_rule(const RuleSettings& settings) { return rule_json(settings).dump(); }

std::string describe_config(const StudyConfig& config) {
  Json j;
  j["study"] = config.study_id;
  j["components"] = join_names(resolved_components(config));
  j["M"] = config.sample_sizes;
  j["snr"] = config.snrs;
  j["curves"] = config.curves;
  j["replicates"] = config.replicates;
  j["seed"] = config.seed;
  j["wavelet"] = {{"family", "daubechies"}, {"vanishing_moments", config.vanishing_moments}};
  j["J0"] = config.primary_level;
  j["sigma_mode"] = sigma_mode_name(config.sigma_mode);
  if (config.weight_scheme.kind == WeightScheme::Kind::Uniform) {
    j["weights"] = {{"scheme", "uniform"},
                    {"lo", config.weight_scheme.lo},
                    {"hi", config.weight_scheme.hi}};
  } else {
    j["weights"] = {{"scheme", "constant"}, {"value", config.weight_scheme.value}};
  }
  j["grid"] = "t_m = m / M, m = 1..M";
  j["snr_definition"] = "population sd of noiseless aggregate / noise sd";
  j["rng"] = "mt19937_64, replicate substream splitmix64(seed, replicate), inverse-CDF normals";
  Json rules = Json::array();
  for (const auto& r : config.rules) rules.push_back(rule_json(r));
  j["rules"] = rules;
  return j.dump(2);
}

void emit_reports(const StudyResult& result, const StudyConfig& config,
                  const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir.string() + ": " + ec.message());

  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
  };
  auto close = [](std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  };

  {
    const auto path = outdir / "replicates.csv";
    auto out = open(path);
    out << "study,rule,M,snr,replicate,component,mse\n";
    for (const auto& r : result.replicates) {
      out << r.study_id << ',' << r.rule << ',' << r.samples_per_curve << ','
          << format_real(r.snr) << ',' << r.replicate << ',' << r.component << ','
          << format_real(r.mse) << '\n';
    }
    close(out, path);
  }
  {
    const auto path = outdir / "amse.csv";
    auto out = open(path);
    out << "study,rule,M,snr,component,amse,sd\n";
    for (const auto& r : result.amse) {
      out << r.study_id << ',' << r.rule << ',' << r.samples_per_curve << ','
          << format_real(r.snr) << ',' << r.component << ',' << format_real(r.amse) << ','
          << format_real(r.sd) << '\n';
    }
    close(out, path);
  }
  {
    const auto path = outdir / "failures.csv";
    auto out = open(path);
    out << "study,rule,M,snr,replicate,stage,message\n";
    for (const auto& f : result.failures) {
      std::string message = f.message;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      out << f.study_id << ',' << f.rule << ',' << f.samples_per_curve << ','
          << format_real(f.snr) << ',' << f.replicate << ',' << f.stage << ',' << message << '\n';
    }
    close(out, path);
  }
  {
    const auto path = outdir / "run.json";
    auto out = open(path);
    Json j = Json::parse(describe_config(config));
    Json incomplete = Json::array();
    for (const auto& row : result.amse) {
      if (row.count < config.replicates) {
        incomplete.push_back({{"rule", row.rule},
                              {"M", row.samples_per_curve},
                              {"snr", row.snr},
                              {"component", row.component},
                              {"completed", row.count}});
      }
    }
    j["failures"] = result.failures.size();
    j["incomplete_cells"] = incomplete;
    j["best_rule_by_cell"] = best_rules(result.amse);
    out << j.dump(2) << '\n';
    close(out, path);
  }
}

std::vector<ReplicateResult> read_replicates_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<ReplicateResult> rows;
  std::string line;
  std::getline(in, line);  // header
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw IoError(fmt::format("{}:{}: expected 7 fields", path.string(), line_no));
    }
    try {
      rows.push_back({std::stoi(f[0]), f[1], static_cast<Eigen::Index>(std::stoll(f[2])),
                      std::stod(f[3]), std::stoi(f[4]), f[5], std::stod(f[6])});
    } catch (const std::logic_error&) {
      throw IoError(fmt::format("{}:{}: malformed row", path.string(), line_no));
    }
  }
  return rows;
}

}  // namespace wavecal
