#include "cpce/bench.hpp"

#include <cmath>

#include "cpce/csv.hpp"
#include "cpce/math_util.hpp"
#include "cpce/parallel.hpp"
#include "cpce/rng.hpp"

namespace cpce {

double RmseAgainstTruth(const std::vector<double>& estimate,
                        const std::vector<double>& truth) {
  if (estimate.size() != truth.size()) {
    throw SchemaError("RmseAgainstTruth: length mismatch");
  }
  if (estimate.empty()) throw SchemaError("RmseAgainstTruth: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(estimate.size()));
}

EstimatorConfig PresetEstimatorConfig(DgpName dgp, EstimatorKind kind,
                                      Stratum stratum) {
  EstimatorConfig cfg;
  cfg.kind = kind;
  cfg.stratum = stratum;
  cfg.folds = kind == EstimatorKind::kEifRatio ? FoldScheme::kThreeWay
                                               : FoldScheme::kKFold;
  cfg.k = 2;
  if (dgp == DgpName::kStudy1) {
    cfg.nuisance.prob.kind = ProbModelKind::kLogisticLinear;
    cfg.nuisance.outcome.kind = SmootherKind::kOlsLinear;
    cfg.second_stage.kind = SmootherKind::kOlsLinear;
  } else {
    cfg.nuisance.prob.kind = ProbModelKind::kLogisticAdditiveSpline;
    cfg.nuisance.outcome.kind = SmootherKind::kAdditiveSpline;
    cfg.second_stage.kind = SmootherKind::kAdditiveSpline;
  }
  return cfg;
}

namespace {

std::vector<double> TruthOnGrid(const TruthBundle& truth, Stratum u,
                                const Eigen::MatrixXd& grid) {
  const PointFn tau = truth.Tau(u);
  std::vector<double> out(static_cast<std::size_t>(grid.rows()));
  for (Index i = 0; i < grid.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = tau(grid.row(i));
  }
  return out;
}

}  // namespace

std::vector<BenchCell> RunBenchmark(const BenchConfig& cfg) {
  if (cfg.reps < 1) throw ConfigError("reps must be positive");
  if (cfg.eval_points < 1) throw ConfigError("eval_points must be positive");
  const TruthBundle truth = MakeTruth(cfg.dgp, cfg.scenario);

  std::vector<BenchCell> cells;
  for (Index n : cfg.ns) {
    for (EstimatorKind kind : cfg.estimators) {
      BenchCell cell;
      cell.dgp = cfg.dgp;
      cell.scenario = cfg.scenario;
      cell.estimator = kind;
      cell.stratum = cfg.stratum;
      cell.n = n;
      cell.rmse.assign(static_cast<std::size_t>(cfg.reps),
                       std::numeric_limits<double>::quiet_NaN());
      cells.push_back(std::move(cell));
    }
  }

  for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    const Index n = cfg.ns[ni];
    ParallelFor(static_cast<std::size_t>(cfg.reps), cfg.threads,
                [&](std::size_t rep) {
      const std::uint64_t rep_seed =
          MixSeed(cfg.seed, static_cast<std::uint64_t>(n), rep);
      DgpSpec spec;
      spec.name = cfg.dgp;
      spec.scenario = cfg.scenario;
      spec.n = n;
      spec.seed = rep_seed;
      spec.noise_sd = cfg.noise_sd;
      const SampleTable data = Generate(spec);
      const Eigen::MatrixXd grid = SampleCovariates(
          cfg.dgp, cfg.eval_points,
          MixSeed(cfg.seed, static_cast<std::uint64_t>(n), rep, 0xE7A1ULL));
      const std::vector<double> truth_vals =
          TruthOnGrid(truth, cfg.stratum, grid);

      for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
        EstimatorConfig ecfg =
            PresetEstimatorConfig(cfg.dgp, cfg.estimators[ei], cfg.stratum);
        ecfg.seed = MixSeed(rep_seed, ei, 0xE577ULL);
        ecfg.hajek = cfg.hajek;
        ecfg.threads = 1;
        std::vector<double> est(truth_vals.size());
        double rmse = std::numeric_limits<double>::quiet_NaN();
        try {
          const EstimateResult result = Estimate(data, grid, ecfg);
          for (std::size_t q = 0; q < result.points.size(); ++q) {
            est[q] = result.points[q].tau_hat;
          }
          rmse = RmseAgainstTruth(est, truth_vals);
        } catch (const Error&) {
          // Replication-level failure: leave the entry as NaN.
        }
        cells[ni * cfg.estimators.size() + ei].rmse[rep] = rmse;
      }
    });
  }

  for (auto& cell : cells) {
    double acc = 0.0;
    int ok = 0;
    for (double r : cell.rmse) {
      if (std::isnan(r)) {
        ++cell.failures;
      } else {
        acc += r;
        ++ok;
      }
    }
    cell.mean_rmse = ok > 0 ? acc / ok : std::numeric_limits<double>::quiet_NaN();
  }
  return cells;
}

void WriteBenchCsv(const std::string& path,
                   const std::vector<BenchCell>& cells,
                   const std::vector<std::string>& comments) {
  const std::vector<std::string> header = {
      "dgp", "scenario", "estimator", "stratum", "n", "rep", "rmse"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& cell : cells) {
    for (std::size_t rep = 0; rep < cell.rmse.size(); ++rep) {
      rows.push_back({DgpLabel(cell.dgp), std::to_string(cell.scenario),
                      EstimatorLabel(cell.estimator),
                      StratumLabel(cell.stratum), std::to_string(cell.n),
                      std::to_string(rep), FormatDouble(cell.rmse[rep])});
    }
  }
  WriteCsv(path, comments, header, rows);
}

std::vector<CoverageCell> RunCoverage(const CoverageConfig& cfg) {
  if (cfg.reps < 1) throw ConfigError("reps must be positive");
  if (cfg.points.rows() < 1) {
    throw ConfigError("coverage requires at least one query point");
  }
  if (cfg.estimator == EstimatorKind::kTLearner) {
    throw ConfigError("coverage is undefined for an estimator without "
                      "interval output");
  }
  const TruthBundle truth = MakeTruth(cfg.dgp, cfg.scenario);
  if (cfg.points.cols() != truth.dim) {
    throw SchemaError("coverage points have wrong dimension");
  }
  const std::size_t m = static_cast<std::size_t>(cfg.points.rows());

  // covered[rep][point], filled independently per replication.
  std::vector<std::vector<int>> covered(
      static_cast<std::size_t>(cfg.reps), std::vector<int>(m, -1));
  std::vector<std::vector<double>> ses(
      static_cast<std::size_t>(cfg.reps), std::vector<double>(m, 0.0));

  ParallelFor(static_cast<std::size_t>(cfg.reps), cfg.threads,
              [&](std::size_t rep) {
    const std::uint64_t rep_seed =
        MixSeed(cfg.seed, static_cast<std::uint64_t>(cfg.n), rep);
    DgpSpec spec;
    spec.name = cfg.dgp;
    spec.scenario = cfg.scenario;
    spec.n = cfg.n;
    spec.seed = rep_seed;
    spec.noise_sd = cfg.noise_sd;
    const SampleTable data = Generate(spec);
    EstimatorConfig ecfg =
        PresetEstimatorConfig(cfg.dgp, cfg.estimator, cfg.stratum);
    ecfg.seed = MixSeed(rep_seed, 0xC0BEULL);
    ecfg.hajek = cfg.hajek;
    ecfg.threads = 1;
    try {
      const EstimateResult result = Estimate(data, cfg.points, ecfg);
      for (std::size_t q = 0; q < m; ++q) {
        const double tau = truth.Tau(cfg.stratum)(
            cfg.points.row(static_cast<Index>(q)));
        const auto& p = result.points[q];
        covered[rep][q] =
            (p.ci_lo <= tau && tau <= p.ci_hi) ? 1 : 0;
        ses[rep][q] = p.se;
      }
    } catch (const Error&) {
      // leave as -1: not counted
    }
  });

  std::vector<CoverageCell> cells(m);
  for (std::size_t q = 0; q < m; ++q) {
    CoverageCell& cell = cells[q];
    cell.x = cfg.points.row(static_cast<Index>(q));
    cell.tau_true = truth.Tau(cfg.stratum)(cell.x);
    double se_acc = 0.0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const int c = covered[static_cast<std::size_t>(rep)][q];
      if (c < 0) continue;
      ++cell.reps_used;
      cell.covered += c;
      se_acc += ses[static_cast<std::size_t>(rep)][q];
    }
    cell.rate = cell.reps_used > 0
                    ? static_cast<double>(cell.covered) / cell.reps_used
                    : std::numeric_limits<double>::quiet_NaN();
    cell.mean_se = cell.reps_used > 0 ? se_acc / cell.reps_used : 0.0;
  }
  return cells;
}

void WriteCoverageCsv(const std::string& path,
                      const std::vector<CoverageCell>& cells,
                      const std::vector<std::string>& comments) {
  std::vector<std::string> header;
  const Index d = cells.empty() ? 0 : cells.front().x.size();
  for (Index j = 0; j < d; ++j) header.push_back("x" + std::to_string(j + 1));
  for (const char* name :
       {"tau_true", "covered", "reps_used", "rate", "mean_se"}) {
    header.push_back(name);
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& cell : cells) {
    std::vector<std::string> row;
    for (Index j = 0; j < d; ++j) row.push_back(FormatDouble(cell.x(j)));
    row.push_back(FormatDouble(cell.tau_true));
    row.push_back(std::to_string(cell.covered));
    row.push_back(std::to_string(cell.reps_used));
    row.push_back(FormatDouble(cell.rate));
    row.push_back(FormatDouble(cell.mean_se));
    rows.push_back(std::move(row));
  }
  WriteCsv(path, comments, header, rows);
}

}  // namespace cpce
