#include "cpce/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "cpce/csv.hpp"
#include "cpce/math_util.hpp"
#include "cpce/parallel.hpp"

namespace cpce {

const char* EstimatorLabel(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kSubsetDr: return "subset";
    case EstimatorKind::kOneStep: return "onestep";
    case EstimatorKind::kEifRatio: return "eif";
    case EstimatorKind::kTLearner: return "tlearner";
  }
  return "??";
}

EstimatorKind ParseEstimatorKind(const std::string& label) {
  if (label == "subset") return EstimatorKind::kSubsetDr;
  if (label == "onestep") return EstimatorKind::kOneStep;
  if (label == "eif") return EstimatorKind::kEifRatio;
  if (label == "tlearner") return EstimatorKind::kTLearner;
  throw ConfigError("unknown estimator '" + label +
                    "' (expected subset, onestep, eif, or tlearner)");
}

namespace {

PointNuisanceValues EvalBundle(const NuisanceBundle& b,
                               const Eigen::RowVectorXd& x) {
  PointNuisanceValues v;
  v.pi = b.pi(x);
  v.p1 = b.p1(x);
  v.p0 = b.p0(x);
  v.mu11 = b.mu11(x);
  v.mu10 = b.mu10(x);
  v.mu01 = b.mu01(x);
  v.mu00 = b.mu00(x);
  return v;
}

double PlugInContrast(Stratum u, const PointNuisanceValues& v) {
  switch (u) {
    case Stratum::k00: return v.mu10 - v.mu00;
    case Stratum::k10: return v.mu11 - v.mu00;
    case Stratum::k11: return v.mu11 - v.mu01;
  }
  return 0.0;
}

// Second-stage regression of pseudo-outcomes on covariates, with the
// training residuals needed for pointwise standard errors.
struct SecondStage {
  Smoother smoother;
  Eigen::VectorXd residuals;
};

SecondStage FitSecondStage(const Eigen::MatrixXd& x, const Eigen::VectorXd& r,
                           const SmootherConfig& cfg) {
  SecondStage stage{FitSmoother(x, r, cfg), Eigen::VectorXd(r.size())};
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    stage.residuals(i) = r(i) - stage.smoother.PredictAt(x.row(i));
  }
  return stage;
}

// Pointwise estimate and weighted-residual standard error at each query.
void QuerySecondStage(const SecondStage& stage, const Eigen::MatrixXd& queries,
                      int threads, std::vector<double>* tau,
                      std::vector<double>* se) {
  const std::size_t m = static_cast<std::size_t>(queries.rows());
  tau->assign(m, 0.0);
  se->assign(m, 0.0);
  ParallelFor(m, threads, [&](std::size_t q) {
    const Eigen::RowVectorXd point = queries.row(static_cast<Index>(q));
    const Eigen::VectorXd w = stage.smoother.WeightsAt(point);
    (*tau)[q] = w.dot(stage.smoother.train_y());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      acc += w(i) * w(i) * stage.residuals(i) * stage.residuals(i);
    }
    (*se)[q] = std::sqrt(acc);
  });
}

struct MonotonicityCounter {
  bool strict = false;
  double tol = 0.0;
  int floored = 0;

  void Observe(const PointNuisanceValues& v) {
    if (v.p1 < v.p0) {
      if (strict && v.p0 - v.p1 > tol) {
        throw MonotonicityError(
            "selection scores violate p1 >= p0 at a data row: p1=" +
            std::to_string(v.p1) + ", p0=" + std::to_string(v.p0));
      }
      ++floored;
    }
  }
};

HajekScale ComputeHajek(const std::vector<double>& inv1,
                        const std::vector<double>& inv0) {
  if (inv1.empty() || inv0.empty()) {
    throw EmptyCellError("rescaled weighting requires rows in both arms");
  }
  double m1 = 0.0, m0 = 0.0;
  for (double f : inv1) m1 += f;
  for (double f : inv0) m0 += f;
  m1 /= static_cast<double>(inv1.size());
  m0 /= static_cast<double>(inv0.size());
  if (!(m1 > 0.0) || !(m0 > 0.0)) {
    throw OverlapError("mean inverse-probability factor is zero");
  }
  return HajekScale{1.0 / m1, 1.0 / m0};
}

struct FoldCurve {
  std::vector<double> tau;
  std::vector<double> se;
};

EstimateResult Aggregate(const std::vector<FoldCurve>& curves,
                         std::size_t n_queries, double ci_level) {
  EstimateResult result;
  result.points.resize(n_queries);
  const double z = NormalQuantile(0.5 + ci_level / 2.0);
  const double kf = static_cast<double>(curves.size());
  for (std::size_t q = 0; q < n_queries; ++q) {
    double mean = 0.0, var = 0.0;
    for (const auto& c : curves) {
      mean += c.tau[q];
      var += c.se[q] * c.se[q];
    }
    mean /= kf;
    const double se = std::sqrt(var) / kf;
    result.points[q] =
        PointEstimate{mean, se, mean - z * se, mean + z * se};
  }
  return result;
}

void FinishMeta(EstimateResult* result, const EstimatorConfig& cfg,
                Index n, Index n_pseudo, int folds_used, int floored,
                int truncated) {
  auto& meta = result->meta;
  meta.estimator = EstimatorLabel(cfg.kind);
  meta.stratum = StratumLabel(cfg.stratum);
  meta.n = n;
  meta.n_pseudo = n_pseudo;
  meta.folds_used = folds_used;
  meta.floored_scores = floored;
  meta.truncated_denominators = truncated;
  meta.hajek = cfg.hajek;
  meta.ci_level = cfg.ci_level;
  std::size_t informative = 0, excluding = 0;
  for (const auto& p : result->points) {
    if (std::isnan(p.se)) continue;
    ++informative;
    if (p.ci_lo > 0.0 || p.ci_hi < 0.0) ++excluding;
  }
  meta.fraction_ci_excluding_zero =
      informative == 0
          ? std::numeric_limits<double>::quiet_NaN()
          : static_cast<double>(excluding) / static_cast<double>(informative);
}

std::vector<Index> ComplementRows(const FoldPlan& plan, std::size_t skip) {
  std::vector<Index> rows;
  for (std::size_t j = 0; j < plan.folds.size(); ++j) {
    if (j == skip) continue;
    rows.insert(rows.end(), plan.folds[j].begin(), plan.folds[j].end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

NuisanceBundle BundleForRows(const SampleTable& table,
                             const std::vector<Index>& rows,
                             const EstimatorConfig& cfg) {
  if (cfg.oracle_nuisances) return *cfg.oracle_nuisances;
  return FitNuisances(table, rows, cfg.nuisance);
}

EstimateResult EstimateTLearner(const SampleTable& table,
                                const Eigen::MatrixXd& queries,
                                const EstimatorConfig& cfg) {
  std::vector<Index> all(static_cast<std::size_t>(table.n()));
  for (Index i = 0; i < table.n(); ++i) all[static_cast<std::size_t>(i)] = i;

  PointFn contrast;
  if (cfg.oracle_nuisances) {
    const NuisanceBundle b = *cfg.oracle_nuisances;
    const Stratum u = cfg.stratum;
    contrast = [b, u](const Eigen::RowVectorXd& x) {
      return PlugInContrast(u, EvalBundle(b, x));
    };
  } else {
    auto cells = std::make_shared<CellRegressions>(
        CellRegressions::Fit(table, all, cfg.nuisance.outcome));
    const Stratum u = cfg.stratum;
    contrast = [cells, u](const Eigen::RowVectorXd& x) {
      switch (u) {
        case Stratum::k00: return cells->MuAt(1, 0, x) - cells->MuAt(0, 0, x);
        case Stratum::k10: return cells->MuAt(1, 1, x) - cells->MuAt(0, 0, x);
        case Stratum::k11: return cells->MuAt(1, 1, x) - cells->MuAt(0, 1, x);
      }
      return 0.0;
    };
  }

  EstimateResult result;
  const std::size_t m = static_cast<std::size_t>(queries.rows());
  result.points.resize(m);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ParallelFor(m, cfg.threads, [&](std::size_t q) {
    const double tau = contrast(queries.row(static_cast<Index>(q)));
    result.points[q] = PointEstimate{tau, nan, nan, nan};
  });
  FinishMeta(&result, cfg, table.n(), table.n(), 1, 0, 0);
  return result;
}

EstimateResult EstimateCrossFit(const SampleTable& table,
                                const Eigen::MatrixXd& queries,
                                const EstimatorConfig& cfg) {
  const FoldPlan plan =
      MakeFoldPlan(table.n(), FoldScheme::kKFold, cfg.k, cfg.seed);
  const std::size_t n_queries = static_cast<std::size_t>(queries.rows());
  MonotonicityCounter mono{cfg.strict_monotonicity, cfg.monotonicity_tol, 0};
  int truncated = 0;
  Index n_pseudo = 0;
  std::vector<FoldCurve> curves;

  for (std::size_t j = 0; j < plan.folds.size(); ++j) {
    const NuisanceBundle bundle =
        BundleForRows(table, ComplementRows(plan, j), cfg);
    const std::vector<Index>& fold = plan.folds[j];

    // Evaluate nuisances once per fold row.
    std::vector<PointNuisanceValues> values(fold.size());
    for (std::size_t r = 0; r < fold.size(); ++r) {
      values[r] = EvalBundle(bundle, table.x.row(fold[r]));
      mono.Observe(values[r]);
    }

    std::vector<Index> stage_rows;
    Eigen::VectorXd pseudo;
    if (cfg.kind == EstimatorKind::kSubsetDr) {
      std::vector<std::size_t> members;
      std::vector<double> pi_s;
      std::vector<double> inv1, inv0;
      for (std::size_t r = 0; r < fold.size(); ++r) {
        const Index i = fold[r];
        if (!InSubset(cfg.stratum, table.z(i), table.s(i))) continue;
        members.push_back(r);
        const auto& v = values[r];
        const double ps = ClipProbability(
            SubsetPropensity(v.pi, v.p1, v.p0, cfg.stratum),
            bundle.clip_eps);
        pi_s.push_back(ps);
        if (cfg.hajek) {
          (table.z(i) == 1 ? inv1 : inv0)
              .push_back(table.z(i) == 1 ? 1.0 / ps : 1.0 / (1.0 - ps));
        }
      }
      if (members.empty()) {
        throw EmptyCellError("analysis subset for stratum " +
                             std::string(StratumLabel(cfg.stratum)) +
                             " is empty in a fold");
      }
      const HajekScale scale =
          cfg.hajek ? ComputeHajek(inv1, inv0) : HajekScale{};
      pseudo.resize(static_cast<Index>(members.size()));
      for (std::size_t k = 0; k < members.size(); ++k) {
        const std::size_t r = members[k];
        const Index i = fold[r];
        stage_rows.push_back(i);
        pseudo(static_cast<Index>(k)) = SubsetPseudoAt(
            cfg.stratum, values[r], pi_s[k], table.z(i), table.y(i), scale);
      }
    } else {  // one-step
      HajekScale scale;
      if (cfg.hajek) {
        std::vector<double> inv1, inv0;
        for (std::size_t r = 0; r < fold.size(); ++r) {
          const Index i = fold[r];
          if (table.z(i) == 1) {
            inv1.push_back(1.0 / values[r].pi);
          } else {
            inv0.push_back(1.0 / (1.0 - values[r].pi));
          }
        }
        scale = ComputeHajek(inv1, inv0);
      }
      PointFn prelim = cfg.oracle_prelim;
      if (!prelim) {
        const NuisanceBundle b = bundle;
        const Stratum u = cfg.stratum;
        prelim = [b, u](const Eigen::RowVectorXd& x) {
          return PlugInContrast(u, EvalBundle(b, x));
        };
      }
      pseudo.resize(static_cast<Index>(fold.size()));
      for (std::size_t r = 0; r < fold.size(); ++r) {
        const Index i = fold[r];
        stage_rows.push_back(i);
        pseudo(static_cast<Index>(r)) = OneStepPseudoAt(
            cfg.stratum, values[r], table.z(i), table.s(i), table.y(i),
            prelim(table.x.row(i)), cfg.denom_eps, scale, &truncated);
      }
    }

    n_pseudo += static_cast<Index>(stage_rows.size());
    const SecondStage stage = FitSecondStage(
        GatherRows(table.x, stage_rows), pseudo, cfg.second_stage);
    FoldCurve curve;
    QuerySecondStage(stage, queries, cfg.threads, &curve.tau, &curve.se);
    curves.push_back(std::move(curve));
  }

  EstimateResult result = Aggregate(curves, n_queries, cfg.ci_level);
  FinishMeta(&result, cfg, table.n(), n_pseudo,
             static_cast<int>(plan.folds.size()), mono.floored, truncated);
  return result;
}

EstimateResult EstimateEifRatio(const SampleTable& table,
                                const Eigen::MatrixXd& queries,
                                const EstimatorConfig& cfg) {
  const FoldPlan plan =
      MakeFoldPlan(table.n(), FoldScheme::kThreeWay, 3, cfg.seed);
  MonotonicityCounter mono{cfg.strict_monotonicity, cfg.monotonicity_tol, 0};
  int truncated = 0;

  const NuisanceBundle bundle = BundleForRows(table, plan.folds[0], cfg);

  // Part 1: regression of the denominator score on covariates.
  const std::vector<Index>& d2 = plan.folds[1];
  std::vector<PointNuisanceValues> v2(d2.size());
  for (std::size_t r = 0; r < d2.size(); ++r) {
    v2[r] = EvalBundle(bundle, table.x.row(d2[r]));
    mono.Observe(v2[r]);
  }
  HajekScale scale2;
  if (cfg.hajek) {
    std::vector<double> inv1, inv0;
    for (std::size_t r = 0; r < d2.size(); ++r) {
      const Index i = d2[r];
      (table.z(i) == 1 ? inv1 : inv0)
          .push_back(table.z(i) == 1 ? 1.0 / v2[r].pi
                                     : 1.0 / (1.0 - v2[r].pi));
    }
    scale2 = ComputeHajek(inv1, inv0);
  }
  Eigen::VectorXd gvals(static_cast<Index>(d2.size()));
  for (std::size_t r = 0; r < d2.size(); ++r) {
    const Index i = d2[r];
    gvals(static_cast<Index>(r)) =
        EifComponentsAt(cfg.stratum, v2[r], table.z(i), table.s(i),
                        table.y(i), scale2)
            .g;
  }
  const Smoother share_fit =
      FitSmoother(GatherRows(table.x, d2), gvals, cfg.second_stage);

  // Part 2: final regression of the ratio pseudo-outcome.
  const std::vector<Index>& d3 = plan.folds[2];
  std::vector<PointNuisanceValues> v3(d3.size());
  for (std::size_t r = 0; r < d3.size(); ++r) {
    v3[r] = EvalBundle(bundle, table.x.row(d3[r]));
    mono.Observe(v3[r]);
  }
  HajekScale scale3;
  if (cfg.hajek) {
    std::vector<double> inv1, inv0;
    for (std::size_t r = 0; r < d3.size(); ++r) {
      const Index i = d3[r];
      (table.z(i) == 1 ? inv1 : inv0)
          .push_back(table.z(i) == 1 ? 1.0 / v3[r].pi
                                     : 1.0 / (1.0 - v3[r].pi));
    }
    scale3 = ComputeHajek(inv1, inv0);
  }
  Eigen::VectorXd ratio(static_cast<Index>(d3.size()));
  for (std::size_t r = 0; r < d3.size(); ++r) {
    const Index i = d3[r];
    const EifParts parts = EifComponentsAt(
        cfg.stratum, v3[r], table.z(i), table.s(i), table.y(i), scale3);
    double share = share_fit.PredictAt(table.x.row(i));
    if (share < cfg.denom_eps) {
      share = cfg.denom_eps;
      ++truncated;
    }
    ratio(static_cast<Index>(r)) = (parts.phi1 - parts.phi0) / share;
  }
  const SecondStage stage =
      FitSecondStage(GatherRows(table.x, d3), ratio, cfg.second_stage);

  FoldCurve curve;
  QuerySecondStage(stage, queries, cfg.threads, &curve.tau, &curve.se);
  EstimateResult result = Aggregate(
      {curve}, static_cast<std::size_t>(queries.rows()), cfg.ci_level);
  FinishMeta(&result, cfg, table.n(), static_cast<Index>(d3.size()), 3,
             mono.floored, truncated);
  return result;
}

}  // namespace

EstimateResult Estimate(const SampleTable& table,
                        const Eigen::MatrixXd& queries,
                        const EstimatorConfig& cfg) {
  table.Validate();
  if (queries.rows() < 1) throw ConfigError("no query points given");
  if (queries.cols() != table.d()) {
    throw SchemaError("query dimension " + std::to_string(queries.cols()) +
                      " does not match data dimension " +
                      std::to_string(table.d()));
  }
  if (!queries.allFinite()) throw DataError("non-finite query point");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) {
    throw ConfigError("ci_level must lie in (0,1)");
  }
  if (!(cfg.denom_eps > 0.0)) throw ConfigError("denom_eps must be positive");

  switch (cfg.kind) {
    case EstimatorKind::kTLearner:
      return EstimateTLearner(table, queries, cfg);
    case EstimatorKind::kSubsetDr:
    case EstimatorKind::kOneStep:
      if (cfg.folds != FoldScheme::kKFold) {
        throw ConfigError(
            "subset and one-step estimators use k-fold cross-fitting");
      }
      return EstimateCrossFit(table, queries, cfg);
    case EstimatorKind::kEifRatio:
      if (cfg.folds != FoldScheme::kThreeWay) {
        throw ConfigError(
            "the ratio estimator requires the three-way split scheme");
      }
      return EstimateEifRatio(table, queries, cfg);
  }
  throw ConfigError("unknown estimator kind");
}

void WriteEstimateCsv(const std::string& path, const Eigen::MatrixXd& queries,
                      const EstimateResult& result,
                      const std::vector<std::string>& comments) {
  if (static_cast<std::size_t>(queries.rows()) != result.points.size()) {
    throw SchemaError("query count does not match estimate count");
  }
  std::vector<std::string> header;
  for (Index j = 0; j < queries.cols(); ++j) {
    header.push_back("x" + std::to_string(j + 1));
  }
  header.insert(header.end(), {"tau_hat", "se", "ci_lo", "ci_hi"});
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.points.size());
  for (std::size_t q = 0; q < result.points.size(); ++q) {
    std::vector<std::string> row;
    for (Index j = 0; j < queries.cols(); ++j) {
      row.push_back(FormatDouble(queries(static_cast<Index>(q), j)));
    }
    const auto& p = result.points[q];
    row.push_back(FormatDouble(p.tau_hat));
    row.push_back(FormatDouble(p.se));
    row.push_back(FormatDouble(p.ci_lo));
    row.push_back(FormatDouble(p.ci_hi));
    rows.push_back(std::move(row));
  }
  WriteCsv(path, comments, header, rows);
}

}  // namespace cpce
