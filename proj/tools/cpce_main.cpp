// Command-line front end: simulate synthetic datasets, estimate stratum
// effect curves from CSV data, run the closed-form/Monte-Carlo robustness
// checks, and drive the replication benchmark grids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpce/bench.hpp"
#include "cpce/bias_lab.hpp"
#include "cpce/csv.hpp"
#include "cpce/errors.hpp"
#include "cpce/estimators.hpp"
#include "cpce/math_util.hpp"
#include "cpce/rng.hpp"
#include "cpce/sim.hpp"

namespace {

using nlohmann::json;

cpce::FoldScheme ParseFoldScheme(const std::string& label) {
  if (label == "kfold") return cpce::FoldScheme::kKFold;
  if (label == "threeway") return cpce::FoldScheme::kThreeWay;
  throw cpce::ConfigError("unknown fold scheme '" + label +
                          "' (expected kfold or threeway)");
}

const char* FoldSchemeLabel(cpce::FoldScheme scheme) {
  return scheme == cpce::FoldScheme::kKFold ? "kfold" : "threeway";
}

cpce::ProbModelKind ParseProbKind(const std::string& label) {
  if (label == "logistic-linear") return cpce::ProbModelKind::kLogisticLinear;
  if (label == "additive-spline-logit") {
    return cpce::ProbModelKind::kLogisticAdditiveSpline;
  }
  throw cpce::ConfigError(
      "unknown probability learner '" + label +
      "' (expected logistic-linear or additive-spline-logit)");
}

cpce::SmootherKind ParseSmootherKind(const std::string& label) {
  if (label == "nadaraya-watson") return cpce::SmootherKind::kNadarayaWatson;
  if (label == "local-linear") return cpce::SmootherKind::kLocalLinear;
  if (label == "ols-linear") return cpce::SmootherKind::kOlsLinear;
  if (label == "additive-spline") return cpce::SmootherKind::kAdditiveSpline;
  throw cpce::ConfigError(
      "unknown smoother '" + label +
      "' (expected nadaraya-watson, local-linear, ols-linear, or "
      "additive-spline)");
}

std::string DeriveSiblingPath(const std::string& path,
                              const std::string& tag) {
  const std::size_t slash = path.find_last_of("/\\");
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + tag + ".csv";
  }
  return path.substr(0, dot) + tag + path.substr(dot);
}

std::vector<std::string> ConfigEcho(const std::string& command,
                                    const json& cfg) {
  return {"cpce " + command, "config: " + cfg.dump()};
}

json JsonNumber(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;  // NaN/inf have no JSON literal
}

void WriteJsonFile(const std::string& path, const json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cpce::Error("cannot open '" + path + "' for writing");
  out << value.dump(2) << "\n";
  if (!out) throw cpce::Error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string dgp;
  int scenario = 1;
  cpce::Index n = 1000;
  double noise_sd = 0.2;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth_out;
};

int RunSimulate(const SimulateOpts& o) {
  cpce::DgpSpec spec;
  spec.name = cpce::ParseDgpName(o.dgp);
  spec.scenario = o.scenario;
  spec.n = o.n;
  spec.seed = o.seed;
  spec.noise_sd = o.noise_sd;
  const cpce::TruthBundle truth = cpce::MakeTruth(spec.name, spec.scenario);
  const cpce::SampleTable table = cpce::Generate(spec);

  const json cfg = {{"command", "simulate"}, {"dgp", o.dgp},
                    {"scenario", o.scenario}, {"n", o.n},
                    {"noise_sd", o.noise_sd}, {"seed", o.seed}};
  const auto comments = ConfigEcho("simulate", cfg);
  cpce::WriteSampleTableCsv(o.out, table, comments);

  const std::string truth_path =
      o.truth_out.empty() ? DeriveSiblingPath(o.out, "_truth") : o.truth_out;
  std::vector<std::string> header;
  for (int j = 0; j < truth.dim; ++j) header.push_back("x" + std::to_string(j + 1));
  for (const char* name : {"pi", "p1", "p0", "mu11", "mu10", "mu01", "mu00",
                           "tau00", "tau10", "tau11"}) {
    header.push_back(name);
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(table.x.rows()));
  for (cpce::Index i = 0; i < table.x.rows(); ++i) {
    const Eigen::RowVectorXd x = table.x.row(i);
    std::vector<std::string> row;
    for (int j = 0; j < truth.dim; ++j) row.push_back(cpce::FormatDouble(x(j)));
    for (double v : {truth.pi(x), truth.p1(x), truth.p0(x), truth.mu11(x),
                     truth.mu10(x), truth.mu01(x), truth.mu00(x),
                     truth.tau00(x), truth.tau10(x), truth.tau11(x)}) {
      row.push_back(cpce::FormatDouble(v));
    }
    rows.push_back(std::move(row));
  }
  cpce::WriteCsv(truth_path, comments, header, rows);

  std::printf("wrote %lld rows to %s (truth: %s)\n",
              static_cast<long long>(table.x.rows()), o.out.c_str(),
              truth_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateOpts {
  std::string in;
  std::string out;
  std::string json_out;
  std::string queries_path;
  std::string estimator = "subset";
  std::string stratum = "10";
  std::string folds;  // empty: kfold, or threeway for the ratio estimator
  int k = 2;
  std::string prob_learner = "logistic-linear";
  std::string outcome_learner = "local-linear";
  std::string second_stage = "local-linear";
  double clip_eps = 0.01;
  double denom_eps = 0.01;
  bool strict_monotonicity = false;
  double monotonicity_tol = 0.0;
  bool hajek = false;
  double ci_level = 0.95;
  int spline_knots = 8;
  std::vector<double> bandwidths;
  bool cv_bandwidth = false;
  std::vector<std::string> x_cols;
  std::string y_col = "y";
  std::string s_col = "s";
  std::string z_col = "z";
  std::uint64_t seed = 0;
  int threads = 0;
};

std::vector<std::string> ResolveXNames(const cpce::CsvTable& raw,
                                       const EstimateOpts& o) {
  if (!o.x_cols.empty()) return o.x_cols;
  std::vector<std::string> names;
  for (const std::string& name : raw.header) {
    if (name != o.y_col && name != o.s_col && name != o.z_col) {
      names.push_back(name);
    }
  }
  return names;
}

Eigen::MatrixXd ReadQueryMatrix(const std::string& path,
                                const std::vector<std::string>& xnames) {
  const cpce::CsvTable raw = cpce::ReadCsv(path);
  std::vector<int> idx;
  for (const std::string& name : xnames) {
    const int j = raw.ColumnIndex(name);
    if (j < 0) {
      throw cpce::SchemaError("query file '" + path + "' lacks column '" +
                              name + "'");
    }
    idx.push_back(j);
  }
  Eigen::MatrixXd q(static_cast<cpce::Index>(raw.rows.size()),
                    static_cast<cpce::Index>(xnames.size()));
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      q(static_cast<cpce::Index>(i), static_cast<cpce::Index>(j)) =
          cpce::ParseDouble(raw.rows[i][static_cast<std::size_t>(idx[j])]);
    }
  }
  return q;
}

int RunEstimate(const EstimateOpts& o) {
  const cpce::CsvTable raw = cpce::ReadCsv(o.in);
  cpce::TableColumns cols;
  cols.x_cols = o.x_cols;
  cols.y_col = o.y_col;
  cols.s_col = o.s_col;
  cols.z_col = o.z_col;
  const cpce::SampleTable table = cpce::ReadSampleTableCsv(o.in, cols);
  const std::vector<std::string> xnames = ResolveXNames(raw, o);

  const Eigen::MatrixXd queries =
      o.queries_path.empty() ? table.x : ReadQueryMatrix(o.queries_path, xnames);

  cpce::EstimatorConfig cfg;
  cfg.kind = cpce::ParseEstimatorKind(o.estimator);
  cfg.stratum = cpce::ParseStratum(o.stratum);
  cfg.folds = o.folds.empty()
                  ? (cfg.kind == cpce::EstimatorKind::kEifRatio
                         ? cpce::FoldScheme::kThreeWay
                         : cpce::FoldScheme::kKFold)
                  : ParseFoldScheme(o.folds);
  cfg.k = o.k;
  cfg.seed = o.seed;
  cfg.nuisance.prob.kind = ParseProbKind(o.prob_learner);
  cfg.nuisance.prob.clip_eps = o.clip_eps;
  cfg.nuisance.prob.spline_interior_knots = o.spline_knots;
  cfg.nuisance.outcome.kind = ParseSmootherKind(o.outcome_learner);
  cfg.nuisance.outcome.spline_interior_knots = o.spline_knots;
  cfg.nuisance.clip_eps = o.clip_eps;
  cfg.second_stage.kind = ParseSmootherKind(o.second_stage);
  cfg.second_stage.spline_interior_knots = o.spline_knots;
  cfg.second_stage.cv_bandwidth = o.cv_bandwidth;
  if (!o.bandwidths.empty()) {
    Eigen::VectorXd bw(static_cast<cpce::Index>(o.bandwidths.size()));
    for (std::size_t j = 0; j < o.bandwidths.size(); ++j) {
      bw(static_cast<cpce::Index>(j)) = o.bandwidths[j];
    }
    cfg.second_stage.bandwidths = bw;
  }
  cfg.denom_eps = o.denom_eps;
  cfg.strict_monotonicity = o.strict_monotonicity;
  cfg.monotonicity_tol = o.monotonicity_tol;
  cfg.hajek = o.hajek;
  cfg.ci_level = o.ci_level;
  cfg.threads = o.threads;

  const cpce::EstimateResult res = cpce::Estimate(table, queries, cfg);

  json cfg_echo = {{"command", "estimate"},
                   {"in", o.in},
                   {"estimator", o.estimator},
                   {"stratum", o.stratum},
                   {"folds", FoldSchemeLabel(cfg.folds)},
                   {"k", o.k},
                   {"prob_learner", o.prob_learner},
                   {"outcome_learner", o.outcome_learner},
                   {"second_stage", o.second_stage},
                   {"clip_eps", o.clip_eps},
                   {"denom_eps", o.denom_eps},
                   {"strict_monotonicity", o.strict_monotonicity},
                   {"hajek", o.hajek},
                   {"ci_level", o.ci_level},
                   {"seed", o.seed}};
  const auto comments = ConfigEcho("estimate", cfg_echo);
  cpce::WriteEstimateCsv(o.out, queries, res, comments);

  if (!o.json_out.empty()) {
    json points = json::array();
    for (std::size_t i = 0; i < res.points.size(); ++i) {
      json x = json::array();
      for (cpce::Index j = 0; j < queries.cols(); ++j) {
        x.push_back(queries(static_cast<cpce::Index>(i), j));
      }
      points.push_back({{"x", x},
                        {"tau_hat", JsonNumber(res.points[i].tau_hat)},
                        {"se", JsonNumber(res.points[i].se)},
                        {"ci_lo", JsonNumber(res.points[i].ci_lo)},
                        {"ci_hi", JsonNumber(res.points[i].ci_hi)}});
    }
    const json meta = {
        {"estimator", res.meta.estimator},
        {"stratum", res.meta.stratum},
        {"n", res.meta.n},
        {"n_pseudo", res.meta.n_pseudo},
        {"folds_used", res.meta.folds_used},
        {"floored_scores", res.meta.floored_scores},
        {"truncated_denominators", res.meta.truncated_denominators},
        {"hajek", res.meta.hajek},
        {"ci_level", res.meta.ci_level},
        {"fraction_ci_excluding_zero",
         JsonNumber(res.meta.fraction_ci_excluding_zero)}};
    WriteJsonFile(o.json_out,
                  {{"config", cfg_echo}, {"meta", meta}, {"estimates", points}});
  }

  std::printf(
      "estimator=%s stratum=%s n=%lld pseudo_rows=%lld queries=%lld "
      "fraction_ci_excluding_zero=%s\n",
      res.meta.estimator.c_str(), res.meta.stratum.c_str(),
      static_cast<long long>(res.meta.n),
      static_cast<long long>(res.meta.n_pseudo),
      static_cast<long long>(queries.rows()),
      cpce::FormatDouble(res.meta.fraction_ci_excluding_zero).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// bias-check
// ---------------------------------------------------------------------------

struct BiasCheckOpts {
  std::string dgp = "study1";
  int scenario = 1;
  double magnitude = 0.05;
  long long n_mc = 400000;
  int points = 5;
  double noise_sd = 0.2;
  std::vector<std::string> families;
  std::vector<std::string> regimes;
  std::string regimes_file;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
};

void LoadRegimesFile(const std::string& path, BiasCheckOpts* o) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cpce::ConfigError("cannot open regimes file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw cpce::ConfigError("malformed regimes file '" + path +
                            "': " + e.what());
  }
  if (!doc.is_object()) {
    throw cpce::ConfigError("malformed regimes file '" + path +
                            "': expected a JSON object");
  }
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    const json& value = item.value();
    if (key == "families" || key == "regimes") {
      if (!value.is_array()) {
        throw cpce::ConfigError("malformed regimes file '" + path + "': '" +
                                key + "' must be an array of strings");
      }
      std::vector<std::string> parsed;
      for (const json& entry : value) {
        if (!entry.is_string()) {
          throw cpce::ConfigError("malformed regimes file '" + path + "': '" +
                                  key + "' must be an array of strings");
        }
        parsed.push_back(entry.get<std::string>());
      }
      (key == "families" ? o->families : o->regimes) = std::move(parsed);
    } else {
      throw cpce::ConfigError("malformed regimes file '" + path +
                              "': unknown key '" + key + "'");
    }
  }
}

int RunBiasCheck(const BiasCheckOpts& opts) {
  BiasCheckOpts o = opts;
  if (!o.regimes_file.empty()) {
    if (!o.families.empty() || !o.regimes.empty()) {
      throw cpce::ConfigError(
          "--regimes-file cannot be combined with --families/--regimes");
    }
    LoadRegimesFile(o.regimes_file, &o);
  }
  if (o.points < 1) throw cpce::ConfigError("--points must be positive");
  if (o.n_mc < 100) throw cpce::ConfigError("--n-mc must be at least 100");

  cpce::RobustnessConfig rc;
  rc.dgp = cpce::ParseDgpName(o.dgp);
  rc.scenario = o.scenario;
  rc.magnitude = o.magnitude;
  rc.n_mc = static_cast<cpce::Index>(o.n_mc);
  rc.seed = o.seed;
  rc.noise_sd = o.noise_sd;
  rc.threads = o.threads;
  for (const std::string& f : o.families) {
    rc.families.push_back(cpce::ParseFamily(f));
  }
  rc.regimes = o.regimes;
  rc.points = cpce::SampleCovariates(rc.dgp, o.points,
                                     cpce::MixSeed(o.seed, 0x9017ULL));

  const std::vector<cpce::RobustnessCase> cases = cpce::RobustnessSweep(rc);

  int failures = 0;
  int expected_bias_rows = 0;
  int detected_bias_rows = 0;
  std::printf("%-8s %-3s %-24s %-4s %12s %12s %12s %10s  %s\n", "family",
              "u", "regime", "pt", "limit_bias", "expansion", "mc_bias",
              "mc_se", "verdict");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const cpce::RobustnessCase& c = cases[i];
    const double route_gap = std::abs(c.limit_bias - c.expansion_bias);
    const double route_tol =
        1e-9 * std::max(1.0, std::abs(c.expansion_bias));
    std::string verdict;
    if (route_gap > route_tol) {
      verdict = "FAIL (expansion disagrees with limit)";
      ++failures;
    } else if (c.protected_regime) {
      const bool closed_zero = std::abs(c.expansion_bias) <= 1e-12;
      const bool mc_ok = std::abs(c.mc_bias) <= 3.0 * c.mc_se;
      if (closed_zero && mc_ok) {
        verdict = "PASS";
      } else {
        verdict = closed_zero ? "FAIL (|mc| > 3 se)"
                              : "FAIL (nonzero closed-form bias)";
        ++failures;
      }
    } else {
      ++expected_bias_rows;
      const bool detected = std::abs(c.mc_bias) > 5.0 * c.mc_se;
      if (detected) ++detected_bias_rows;
      verdict = detected ? "EXPECTED-BIAS (detected)"
                         : "EXPECTED-BIAS (below 5 se)";
    }
    const int point_index =
        static_cast<int>(i % static_cast<std::size_t>(o.points));
    std::printf("%-8s %-3s %-24s %-4d %12.3e %12.3e %12.3e %10.3e  %s\n",
                cpce::FamilyLabel(c.family), cpce::StratumLabel(c.stratum),
                c.regime.c_str(), point_index, c.limit_bias, c.expansion_bias,
                c.mc_bias, c.mc_se, verdict.c_str());
  }

  if (!o.out.empty()) {
    json cfg_echo = {{"command", "bias-check"},
                     {"dgp", o.dgp},
                     {"scenario", o.scenario},
                     {"magnitude", o.magnitude},
                     {"n_mc", o.n_mc},
                     {"points", o.points},
                     {"noise_sd", o.noise_sd},
                     {"families", o.families},
                     {"regimes", o.regimes},
                     {"seed", o.seed}};
    cpce::WriteRobustnessCsv(o.out, cases, ConfigEcho("bias-check", cfg_echo));
  }

  const int checked = static_cast<int>(cases.size()) - expected_bias_rows;
  std::printf(
      "\nchecks: %d passed, %d failed; expected-bias rows: %d (bias "
      "detected at %d)\n",
      checked - failures, failures, expected_bias_rows, detected_bias_rows);
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
  std::string mode = "rmse";
  std::string dgp = "study1";
  int scenario = 1;
  double noise_sd = 0.2;
  std::string stratum = "10";
  std::vector<long long> ns;
  int reps = 0;  // 0: mode default (100 rmse / 500 coverage)
  std::vector<std::string> estimators;
  std::string estimator = "subset";  // coverage mode
  long long n = 4000;                // coverage mode
  int points = 5;                    // coverage mode
  long long eval_points = 200;
  bool hajek = false;
  std::string out;
  std::string json_out;
  std::uint64_t seed = 0;
  int threads = 0;
};

Eigen::MatrixXd InteriorPoints(cpce::DgpName dgp, int count,
                               std::uint64_t seed) {
  Eigen::MatrixXd raw = cpce::SampleCovariates(dgp, count, seed);
  // Pull draws toward the middle of the support so kernel smoothers have
  // two-sided neighborhoods at every evaluation point.
  if (dgp == cpce::DgpName::kToy) return 0.8 * raw;
  return (0.8 * raw.array() + 0.1).matrix();
}

int RunBench(const BenchOpts& o) {
  if (o.mode == "rmse") {
    cpce::BenchConfig bc;
    bc.dgp = cpce::ParseDgpName(o.dgp);
    bc.scenario = o.scenario;
    bc.noise_sd = o.noise_sd;
    if (!o.ns.empty()) {
      bc.ns.clear();
      for (long long n : o.ns) bc.ns.push_back(static_cast<cpce::Index>(n));
    }
    bc.reps = o.reps > 0 ? o.reps : 100;
    if (!o.estimators.empty()) {
      bc.estimators.clear();
      for (const std::string& e : o.estimators) {
        bc.estimators.push_back(cpce::ParseEstimatorKind(e));
      }
    }
    bc.stratum = cpce::ParseStratum(o.stratum);
    bc.eval_points = static_cast<cpce::Index>(o.eval_points);
    bc.seed = o.seed;
    bc.threads = o.threads;
    bc.hajek = o.hajek;

    const std::vector<cpce::BenchCell> cells = cpce::RunBenchmark(bc);

    json ns_echo = json::array();
    for (cpce::Index n : bc.ns) ns_echo.push_back(n);
    json est_echo = json::array();
    for (cpce::EstimatorKind k : bc.estimators) {
      est_echo.push_back(cpce::EstimatorLabel(k));
    }
    json cfg_echo = {{"command", "bench"},     {"mode", "rmse"},
                     {"dgp", o.dgp},           {"scenario", o.scenario},
                     {"noise_sd", o.noise_sd}, {"stratum", o.stratum},
                     {"ns", ns_echo},          {"reps", bc.reps},
                     {"estimators", est_echo}, {"eval_points", o.eval_points},
                     {"hajek", o.hajek},       {"seed", o.seed}};
    if (!o.out.empty()) {
      cpce::WriteBenchCsv(o.out, cells, ConfigEcho("bench", cfg_echo));
    }

    json summary = json::array();
    for (const cpce::BenchCell& cell : cells) {
      summary.push_back({{"estimator", cpce::EstimatorLabel(cell.estimator)},
                         {"stratum", cpce::StratumLabel(cell.stratum)},
                         {"n", cell.n},
                         {"reps", static_cast<long long>(cell.rmse.size())},
                         {"mean_rmse", JsonNumber(cell.mean_rmse)},
                         {"failures", cell.failures}});
      std::printf("estimator=%-8s n=%-6lld mean_rmse=%.6f failures=%d\n",
                  cpce::EstimatorLabel(cell.estimator),
                  static_cast<long long>(cell.n), cell.mean_rmse,
                  cell.failures);
    }
    if (!o.json_out.empty()) {
      WriteJsonFile(o.json_out, {{"config", cfg_echo}, {"cells", summary}});
    }
    return 0;
  }

  if (o.mode == "coverage") {
    cpce::CoverageConfig cc;
    cc.dgp = cpce::ParseDgpName(o.dgp);
    cc.scenario = o.scenario;
    cc.noise_sd = o.noise_sd;
    cc.n = static_cast<cpce::Index>(o.n);
    cc.reps = o.reps > 0 ? o.reps : 500;
    cc.estimator = cpce::ParseEstimatorKind(o.estimator);
    cc.stratum = cpce::ParseStratum(o.stratum);
    cc.points = InteriorPoints(cc.dgp, o.points,
                               cpce::MixSeed(o.seed, 0x9017ULL));
    cc.seed = o.seed;
    cc.threads = o.threads;
    cc.hajek = o.hajek;

    const std::vector<cpce::CoverageCell> cells = cpce::RunCoverage(cc);

    json cfg_echo = {{"command", "bench"},     {"mode", "coverage"},
                     {"dgp", o.dgp},           {"scenario", o.scenario},
                     {"noise_sd", o.noise_sd}, {"stratum", o.stratum},
                     {"estimator", o.estimator}, {"n", o.n},
                     {"reps", cc.reps},        {"points", o.points},
                     {"hajek", o.hajek},       {"seed", o.seed}};
    if (!o.out.empty()) {
      cpce::WriteCoverageCsv(o.out, cells, ConfigEcho("bench", cfg_echo));
    }

    json summary = json::array();
    for (const cpce::CoverageCell& cell : cells) {
      json x = json::array();
      for (cpce::Index j = 0; j < cell.x.size(); ++j) x.push_back(cell.x(j));
      summary.push_back({{"x", x},
                         {"tau_true", cell.tau_true},
                         {"rate", cell.rate},
                         {"mean_se", JsonNumber(cell.mean_se)},
                         {"reps_used", cell.reps_used}});
      std::printf("coverage=%.4f tau_true=%.4f mean_se=%.4f reps=%d\n",
                  cell.rate, cell.tau_true, cell.mean_se, cell.reps_used);
    }
    if (!o.json_out.empty()) {
      WriteJsonFile(o.json_out, {{"config", cfg_echo}, {"points", summary}});
    }
    return 0;
  }

  throw cpce::ConfigError("unknown bench mode '" + o.mode +
                          "' (expected rmse or coverage)");
}

void AddSeedOption(CLI::App* sub, std::uint64_t* seed) {
  sub->add_option("--seed", *seed,
                  "RNG seed (falls back to the CPCE_SEED environment "
                  "variable); required")
      ->envname("CPCE_SEED")
      ->required();
}

void AddConfigOption(CLI::App* sub, std::string* sink) {
  sub->add_option("--config", *sink,
                  "JSON file of option values (explicit flags win)");
}

std::string ConfigScalarToken(const json& value, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number() || value.is_boolean()) return value.dump();
  throw cpce::ConfigError("config file: option '" + key +
                          "' must be a scalar or an array of scalars");
}

// Rewrites the argument list so config-file values become ordinary flags,
// skipping any option the command line already sets. The --config tokens
// themselves are consumed here.
std::vector<std::string> InjectConfigArgs(
    const std::map<std::string, CLI::App*>& subcommands,
    std::vector<std::string> args) {
  std::string subname;
  std::size_t insert_at = 0;
  std::string config_path;
  std::set<std::string> given;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& tok = args[i];
    if (subname.empty() && !tok.empty() && tok[0] != '-') {
      subname = tok;
      out.push_back(tok);
      insert_at = out.size();
      continue;
    }
    if (tok.rfind("--", 0) == 0) {
      std::string name = tok.substr(2);
      const std::size_t eq = name.find('=');
      std::string inline_value;
      if (eq != std::string::npos) {
        inline_value = name.substr(eq + 1);
        name = name.substr(0, eq);
      }
      if (name == "config") {
        if (eq != std::string::npos) {
          config_path = inline_value;
        } else if (i + 1 < args.size()) {
          config_path = args[++i];
        } else {
          throw cpce::ConfigError("--config requires a file path");
        }
        continue;
      }
      given.insert(name);
    }
    out.push_back(tok);
  }
  if (config_path.empty()) return out;
  if (subname.empty()) {
    throw cpce::ConfigError("--config requires a subcommand");
  }
  const auto sub_it = subcommands.find(subname);
  if (sub_it == subcommands.end()) {
    throw cpce::ConfigError("unknown subcommand '" + subname + "'");
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    throw cpce::ConfigError("cannot open config file '" + config_path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw cpce::ConfigError("malformed config file '" + config_path +
                            "': " + e.what());
  }
  if (!doc.is_object()) {
    throw cpce::ConfigError("malformed config file '" + config_path +
                            "': expected a JSON object");
  }

  std::vector<std::string> injected;
  for (const auto& item : doc.items()) {
    std::string key = item.key();
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    const CLI::Option* opt = sub_it->second->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw cpce::ConfigError("config file: unknown option '" + item.key() +
                              "' for subcommand '" + subname + "'");
    }
    if (given.count(key) != 0) continue;  // explicit flag wins
    const json& value = item.value();
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back("--" + key);
      continue;
    }
    if (value.is_array()) {
      std::string joined;
      for (const json& entry : value) {
        if (!joined.empty()) joined += ',';
        joined += ConfigScalarToken(entry, item.key());
      }
      injected.push_back("--" + key);
      injected.push_back(joined);
      continue;
    }
    injected.push_back("--" + key);
    injected.push_back(ConfigScalarToken(value, item.key()));
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at),
             injected.begin(), injected.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional principal-stratum effect toolkit"};
  app.require_subcommand(1);
  int rc = 0;
  std::string config_sink;

  SimulateOpts sim;
  CLI::App* s =
      app.add_subcommand("simulate", "Draw a synthetic dataset from a DGP");
  AddConfigOption(s, &config_sink);
  s->add_option("--dgp", sim.dgp,
                "DGP name: toy, study1, study2, study2_nonlinear_tau, study3")
      ->required();
  s->add_option("--scenario", sim.scenario,
                "study1 working-model scenario (1..4)")
      ->capture_default_str();
  s->add_option("--n", sim.n, "sample size")->capture_default_str();
  s->add_option("--noise-sd", sim.noise_sd, "outcome noise level")
      ->capture_default_str();
  AddSeedOption(s, &sim.seed);
  s->add_option("--out", sim.out, "dataset CSV path")->required();
  s->add_option("--truth-out", sim.truth_out,
                "truth CSV path (default: dataset path + _truth)");
  s->callback([&] { rc = RunSimulate(sim); });

  EstimateOpts est;
  CLI::App* e = app.add_subcommand(
      "estimate", "Estimate a stratum effect curve from a dataset CSV");
  AddConfigOption(e, &config_sink);
  e->add_option("--in", est.in, "input dataset CSV")->required();
  e->add_option("--out", est.out, "estimates CSV path")->required();
  e->add_option("--json-out", est.json_out, "estimates + meta JSON path");
  e->add_option("--queries", est.queries_path,
                "CSV of query points (default: the input rows)");
  e->add_option("--estimator", est.estimator,
                "subset, onestep, eif, or tlearner")
      ->capture_default_str();
  e->add_option("--stratum", est.stratum, "00, 10, or 11")
      ->capture_default_str();
  e->add_option("--folds", est.folds,
                "kfold or threeway (default: kfold; threeway for eif)");
  e->add_option("--k", est.k, "fold count for kfold")->capture_default_str();
  e->add_option("--prob-learner", est.prob_learner,
                "logistic-linear or additive-spline-logit")
      ->capture_default_str();
  e->add_option("--outcome-learner", est.outcome_learner,
                "nadaraya-watson, local-linear, ols-linear, additive-spline")
      ->capture_default_str();
  e->add_option("--second-stage", est.second_stage,
                "pseudo-outcome smoother (same choices as --outcome-learner)")
      ->capture_default_str();
  e->add_option("--clip-eps", est.clip_eps, "probability clipping level")
      ->capture_default_str();
  e->add_option("--denom-eps", est.denom_eps,
                "share/denominator truncation level")
      ->capture_default_str();
  e->add_flag("--strict-monotonicity", est.strict_monotonicity,
              "error out when fitted scores give p1 < p0");
  e->add_option("--monotonicity-tol", est.monotonicity_tol,
                "tolerance before a p1 < p0 violation counts")
      ->capture_default_str();
  e->add_flag("--hajek", est.hajek,
              "rescale inverse-probability factors to mean one");
  e->add_option("--ci-level", est.ci_level, "pointwise CI level")
      ->capture_default_str();
  e->add_option("--spline-knots", est.spline_knots,
                "interior knots for spline learners")
      ->capture_default_str();
  e->add_option("--bandwidth", est.bandwidths,
                "kernel bandwidths (comma-separated, one per covariate)")
      ->delimiter(',');
  e->add_flag("--cv-bandwidth", est.cv_bandwidth,
              "select the kernel bandwidth by leave-one-out CV");
  e->add_option("--x-cols", est.x_cols,
                "covariate column names (default: all except y/s/z)")
      ->delimiter(',');
  e->add_option("--y-col", est.y_col, "outcome column")->capture_default_str();
  e->add_option("--s-col", est.s_col, "intermediate column")
      ->capture_default_str();
  e->add_option("--z-col", est.z_col, "treatment column")
      ->capture_default_str();
  AddSeedOption(e, &est.seed);
  e->add_option("--threads", est.threads, "worker cap (0: all cores)")
      ->capture_default_str();
  e->callback([&] { rc = RunEstimate(est); });

  BiasCheckOpts bias;
  CLI::App* b = app.add_subcommand(
      "bias-check",
      "Check closed-form bias limits, expansions, and Monte-Carlo plug-in "
      "bias across perturbation regimes");
  AddConfigOption(b, &config_sink);
  b->add_option("--dgp", bias.dgp, "DGP supplying the true nuisances")
      ->capture_default_str();
  b->add_option("--scenario", bias.scenario, "study1 scenario")
      ->capture_default_str();
  b->add_option("--magnitude", bias.magnitude, "perturbation magnitude")
      ->capture_default_str();
  b->add_option("--n-mc", bias.n_mc, "Monte-Carlo draws per check")
      ->capture_default_str();
  b->add_option("--points", bias.points, "number of covariate points")
      ->capture_default_str();
  b->add_option("--noise-sd", bias.noise_sd, "outcome noise level")
      ->capture_default_str();
  b->add_option("--families", bias.families,
                "pseudo-outcome families to sweep (subset, onestep, eif)")
      ->delimiter(',');
  b->add_option("--regimes", bias.regimes,
                "regimes to sweep (default: every regime of each family)")
      ->delimiter(',');
  b->add_option("--regimes-file", bias.regimes_file,
                "JSON file with {\"families\": [...], \"regimes\": [...]}");
  b->add_option("--out", bias.out, "report CSV path");
  AddSeedOption(b, &bias.seed);
  b->add_option("--threads", bias.threads, "worker cap (0: all cores)")
      ->capture_default_str();
  b->callback([&] { rc = RunBiasCheck(bias); });

  BenchOpts bench;
  CLI::App* n = app.add_subcommand(
      "bench", "Replication benchmark: RMSE grids and CI coverage");
  AddConfigOption(n, &config_sink);
  n->add_option("--mode", bench.mode, "rmse or coverage")
      ->capture_default_str();
  n->add_option("--dgp", bench.dgp, "DGP name")->capture_default_str();
  n->add_option("--scenario", bench.scenario, "study1 scenario")
      ->capture_default_str();
  n->add_option("--noise-sd", bench.noise_sd, "outcome noise level")
      ->capture_default_str();
  n->add_option("--stratum", bench.stratum, "00, 10, or 11")
      ->capture_default_str();
  n->add_option("--ns", bench.ns,
                "sample sizes for rmse mode (default 1000,2000,4000,8000)")
      ->delimiter(',');
  n->add_option("--reps", bench.reps,
                "replications (default 100 rmse / 500 coverage)");
  n->add_option("--estimators", bench.estimators,
                "estimators for rmse mode (default all four)")
      ->delimiter(',');
  n->add_option("--estimator", bench.estimator, "estimator for coverage mode")
      ->capture_default_str();
  n->add_option("--n", bench.n, "sample size for coverage mode")
      ->capture_default_str();
  n->add_option("--points", bench.points, "query points for coverage mode")
      ->capture_default_str();
  n->add_option("--eval-points", bench.eval_points,
                "evaluation grid size per replication (rmse mode)")
      ->capture_default_str();
  n->add_flag("--hajek", bench.hajek,
              "rescale inverse-probability factors to mean one");
  n->add_option("--out", bench.out, "results CSV path");
  n->add_option("--json-out", bench.json_out, "summary JSON path");
  AddSeedOption(n, &bench.seed);
  n->add_option("--threads", bench.threads, "worker cap (0: all cores)")
      ->capture_default_str();
  n->callback([&] { rc = RunBench(bench); });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    const std::map<std::string, CLI::App*> submap = {
        {"simulate", s}, {"estimate", e}, {"bias-check", b}, {"bench", n}};
    args = InjectConfigArgs(submap, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const cpce::ConfigError& err) {
    std::fprintf(stderr, "usage error: %s\n", err.what());
    return 2;
  } catch (const cpce::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return rc;
}
