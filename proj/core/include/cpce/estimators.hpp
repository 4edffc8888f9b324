#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cpce/folds.hpp"
#include "cpce/identification.hpp"
#include "cpce/nuisance.hpp"
#include "cpce/sample_table.hpp"

namespace cpce {

enum class EstimatorKind { kSubsetDr, kOneStep, kEifRatio, kTLearner };

const char* EstimatorLabel(EstimatorKind kind);
EstimatorKind ParseEstimatorKind(const std::string& label);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::kSubsetDr;
  Stratum stratum = Stratum::k10;
  FoldScheme folds = FoldScheme::kKFold;
  int k = 2;                     // fold count for kKFold
  std::uint64_t seed = 0;        // drives the fold split
  NuisanceConfig nuisance;       // stage-one learners
  SmootherConfig second_stage;   // pseudo-outcome regression
  double denom_eps = 0.01;       // floor for share / denominator truncation
  bool strict_monotonicity = false;
  double monotonicity_tol = 0.0;
  bool hajek = false;            // rescale inverse-probability factors
  double ci_level = 0.95;
  int threads = 1;

  // Oracle mode: use these nuisances instead of fitting stage one. The
  // preliminary effect function (one-step only) defaults to the plug-in
  // cell-mean contrast of whatever nuisances are in effect.
  std::optional<NuisanceBundle> oracle_nuisances;
  PointFn oracle_prelim;
};

struct PointEstimate {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct EstimateMeta {
  std::string estimator;
  std::string stratum;
  Index n = 0;
  Index n_pseudo = 0;        // rows contributing pseudo-outcomes
  int folds_used = 0;
  int floored_scores = 0;    // rows whose selection scores had p1 < p0
  int truncated_denominators = 0;
  bool hajek = false;
  double ci_level = 0.95;
  double fraction_ci_excluding_zero =
      std::numeric_limits<double>::quiet_NaN();
};

struct EstimateResult {
  std::vector<PointEstimate> points;  // one per query row
  EstimateMeta meta;
};

// Estimates the stratum effect curve at the query points. Cross-fitting:
// kKFold for the subset and one-step estimators (default two folds), a
// single three-way split for the ratio estimator (kKFold with it is a
// ConfigError), full-sample cell regressions for the T-learner (whose
// se/ci fields are NaN).
EstimateResult Estimate(const SampleTable& table,
                        const Eigen::MatrixXd& queries,
                        const EstimatorConfig& cfg);

// Writes query covariates plus tau_hat, se, ci_lo, ci_hi columns.
void WriteEstimateCsv(const std::string& path, const Eigen::MatrixXd& queries,
                      const EstimateResult& result,
                      const std::vector<std::string>& comments);

}  // namespace cpce
