#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpce/estimators.hpp"
#include "cpce/sim.hpp"

namespace cpce {

// Root-mean-square error between an estimated curve and the truth on a
// common evaluation grid.
double RmseAgainstTruth(const std::vector<double>& estimate,
                        const std::vector<double>& truth);

// Default learner stack for a DGP: parametric (logit-linear scores,
// linear-in-x outcome means and second stage) for the linear-score study,
// penalized additive splines everywhere else.
EstimatorConfig PresetEstimatorConfig(DgpName dgp, EstimatorKind kind,
                                      Stratum stratum);

struct BenchConfig {
  DgpName dgp = DgpName::kStudy1;
  int scenario = 1;
  double noise_sd = 0.2;
  std::vector<Index> ns = {1000, 2000, 4000, 8000};
  int reps = 100;
  std::vector<EstimatorKind> estimators = {
      EstimatorKind::kSubsetDr, EstimatorKind::kOneStep,
      EstimatorKind::kEifRatio, EstimatorKind::kTLearner};
  Stratum stratum = Stratum::k10;
  Index eval_points = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  bool hajek = false;
};

struct BenchCell {
  DgpName dgp;
  int scenario = 1;
  EstimatorKind estimator;
  Stratum stratum;
  Index n = 0;
  std::vector<double> rmse;  // one entry per replication (NaN on failure)
  double mean_rmse = 0.0;    // over successful replications
  int failures = 0;
};

// Runs the replication study. Each replication draws a fresh sample and a
// fresh 200-point evaluation grid from the covariate law, both seeded
// deterministically from (seed, n, rep).
std::vector<BenchCell> RunBenchmark(const BenchConfig& cfg);

void WriteBenchCsv(const std::string& path,
                   const std::vector<BenchCell>& cells,
                   const std::vector<std::string>& comments);

struct CoverageConfig {
  DgpName dgp = DgpName::kStudy1;
  int scenario = 1;
  double noise_sd = 0.2;
  Index n = 4000;
  int reps = 500;
  EstimatorKind estimator = EstimatorKind::kSubsetDr;
  Stratum stratum = Stratum::k10;
  Eigen::MatrixXd points;  // fixed query points
  std::uint64_t seed = 1;
  int threads = 1;
  bool hajek = false;
};

struct CoverageCell {
  Eigen::RowVectorXd x;
  double tau_true = 0.0;
  int covered = 0;
  int reps_used = 0;
  double rate = 0.0;
  double mean_se = 0.0;
};

// Fraction of replications whose pointwise interval covers the truth.
std::vector<CoverageCell> RunCoverage(const CoverageConfig& cfg);

void WriteCoverageCsv(const std::string& path,
                      const std::vector<CoverageCell>& cells,
                      const std::vector<std::string>& comments);

}  // namespace cpce
