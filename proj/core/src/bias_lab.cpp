#include "cpce/bias_lab.hpp"

#include <cmath>

#include "cpce/csv.hpp"
#include "cpce/math_util.hpp"
#include "cpce/parallel.hpp"
#include "cpce/rng.hpp"

namespace cpce {

const char* FamilyLabel(PseudoFamily family) {
  switch (family) {
    case PseudoFamily::kSubset: return "subset";
    case PseudoFamily::kOneStep: return "onestep";
    case PseudoFamily::kEifRatio: return "eif";
  }
  return "??";
}

PseudoFamily ParseFamily(const std::string& label) {
  if (label == "subset") return PseudoFamily::kSubset;
  if (label == "onestep") return PseudoFamily::kOneStep;
  if (label == "eif") return PseudoFamily::kEifRatio;
  throw ConfigError("unknown pseudo-outcome family '" + label + "'");
}

namespace {

void CheckProb(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError(std::string("perturbed ") + what +
                      " leaves (0,1): " + std::to_string(p));
  }
}

enum class FKind { kS, kOneMinusS, kYS, kYOneMinusS };

double CellMeanF(FKind f, int a, const PointNuisanceValues& v) {
  const double pa = a == 1 ? v.p1 : v.p0;
  switch (f) {
    case FKind::kS: return pa;
    case FKind::kOneMinusS: return 1.0 - pa;
    case FKind::kYS: return (a == 1 ? v.mu11 : v.mu01) * pa;
    case FKind::kYOneMinusS: return (a == 1 ? v.mu10 : v.mu00) * (1.0 - pa);
  }
  return 0.0;
}

// E over the true law of the plug-in arm-recentered score of f.
double EPsiMean(int a, FKind f, const PointNuisanceValues& truth,
                const PointNuisanceValues& tilde) {
  const double true_p = a == 1 ? truth.pi : 1.0 - truth.pi;
  const double tilde_p = a == 1 ? tilde.pi : 1.0 - tilde.pi;
  const double ef_true = CellMeanF(f, a, truth);
  const double ef_tilde = CellMeanF(f, a, tilde);
  return true_p / tilde_p * (ef_true - ef_tilde) + ef_tilde;
}

struct PhiMeans {
  double phi1;
  double phi0;
  double g;
};

// Mirrors the influence-piece formulas with expectation in place of the
// observation-level score.
PhiMeans EifMeans(Stratum u, const PointNuisanceValues& truth,
                  const PointNuisanceValues& tilde) {
  const auto psi = [&](int a, FKind f) {
    return EPsiMean(a, f, truth, tilde);
  };
  const double e00 = 1.0 - tilde.p1;
  const double e10 = tilde.p1 - tilde.p0;
  const double e11 = tilde.p0;
  PhiMeans m;
  switch (u) {
    case Stratum::k10:
      m.phi1 = (e10 / tilde.p1) * psi(1, FKind::kYS) -
               tilde.mu11 * (psi(0, FKind::kS) -
                             (tilde.p0 / tilde.p1) * psi(1, FKind::kS));
      m.phi0 = (e10 / (1.0 - tilde.p0)) * psi(0, FKind::kYOneMinusS) -
               tilde.mu00 * (psi(1, FKind::kOneMinusS) -
                             ((1.0 - tilde.p1) / (1.0 - tilde.p0)) *
                                 psi(0, FKind::kOneMinusS));
      m.g = psi(1, FKind::kS) - psi(0, FKind::kS);
      break;
    case Stratum::k11:
      m.phi1 = (e11 / tilde.p1) * psi(1, FKind::kYS) +
               tilde.mu11 * (psi(0, FKind::kS) -
                             (tilde.p0 / tilde.p1) * psi(1, FKind::kS));
      m.phi0 = psi(0, FKind::kYS);
      m.g = psi(0, FKind::kS);
      break;
    case Stratum::k00:
      m.phi1 = psi(1, FKind::kYOneMinusS);
      m.phi0 = (e00 / (1.0 - tilde.p0)) * psi(0, FKind::kYOneMinusS) +
               tilde.mu00 * (psi(1, FKind::kOneMinusS) -
                             ((1.0 - tilde.p1) / (1.0 - tilde.p0)) *
                                 psi(0, FKind::kOneMinusS));
      m.g = psi(1, FKind::kOneMinusS);
      break;
  }
  return m;
}

double TildeShare(const PointNuisanceValues& tilde, Stratum u) {
  switch (u) {
    case Stratum::k00: return 1.0 - tilde.p1;
    case Stratum::k10: return tilde.p1 - tilde.p0;
    case Stratum::k11: return tilde.p0;
  }
  return 0.0;
}

}  // namespace

PointNuisanceValues ApplyPerturbation(const PointNuisanceValues& truth,
                                      const PointPerturbation& pert) {
  PointNuisanceValues t = truth;
  t.pi += pert.dpi;
  t.p1 += pert.dp1;
  t.p0 += pert.dp0;
  t.mu11 += pert.dmu11;
  t.mu10 += pert.dmu10;
  t.mu01 += pert.dmu01;
  t.mu00 += pert.dmu00;
  CheckProb(t.pi, "assignment score");
  CheckProb(t.p1, "selection score p1");
  CheckProb(t.p0, "selection score p0");
  return t;
}

double SubsetPluginLimit(const PointNuisanceValues& truth,
                         const PointNuisanceValues& tilde, Stratum u,
                         std::optional<double> pi_s_tilde) {
  const double tps =
      pi_s_tilde.value_or(SubsetPropensity(tilde.pi, tilde.p1, tilde.p0, u));
  if (!(tps > 0.0 && tps < 1.0)) {
    throw ConfigError("subset propensity must lie in (0,1)");
  }
  struct Cell {
    int z, s;
  };
  Cell cells[2];
  switch (u) {
    case Stratum::k00: cells[0] = {1, 0}; cells[1] = {0, 0}; break;
    case Stratum::k10: cells[0] = {1, 1}; cells[1] = {0, 0}; break;
    case Stratum::k11: cells[0] = {1, 1}; cells[1] = {0, 1}; break;
  }
  double mass = 0.0, acc = 0.0;
  for (const Cell& c : cells) {
    const double pz = c.z == 1 ? truth.pi : 1.0 - truth.pi;
    const double ps_given =
        c.z == 1 ? (c.s == 1 ? truth.p1 : 1.0 - truth.p1)
                 : (c.s == 1 ? truth.p0 : 1.0 - truth.p0);
    const double prob = pz * ps_given;
    const double mu_cell = c.z == 1 ? (c.s == 1 ? truth.mu11 : truth.mu10)
                                    : (c.s == 1 ? truth.mu01 : truth.mu00);
    const double cond = SubsetPseudoAt(u, tilde, tps, c.z, mu_cell);
    mass += prob;
    acc += prob * cond;
  }
  if (!(mass > 0.0)) throw OverlapError("analysis subset has zero mass");
  return acc / mass;
}

double ShareScoreMean(const PointNuisanceValues& truth,
                      const PointNuisanceValues& tilde, Stratum u) {
  switch (u) {
    case Stratum::k00: return EPsiMean(1, FKind::kOneMinusS, truth, tilde);
    case Stratum::k10:
      return EPsiMean(1, FKind::kS, truth, tilde) -
             EPsiMean(0, FKind::kS, truth, tilde);
    case Stratum::k11: return EPsiMean(0, FKind::kS, truth, tilde);
  }
  return 0.0;
}

double EifPluginLimit(const PointNuisanceValues& truth,
                      const PointNuisanceValues& tilde, Stratum u) {
  const PhiMeans m = EifMeans(u, truth, tilde);
  const double eg = ShareScoreMean(truth, tilde, u);
  if (!(std::abs(eg) > 1e-12)) {
    throw OverlapError("denominator score mean is numerically zero");
  }
  return (m.phi1 - m.phi0) / eg;
}

double OneStepPluginLimit(const PointNuisanceValues& truth,
                          const PointNuisanceValues& tilde, Stratum u,
                          double tau_check) {
  const PhiMeans m = EifMeans(u, truth, tilde);
  const double eg = ShareScoreMean(truth, tilde, u);
  const double te = TildeShare(tilde, u);
  if (!(te > 0.0)) {
    throw ConfigError("plug-in stratum share must be positive");
  }
  return tau_check + (m.phi1 - m.phi0 - tau_check * eg) / te;
}

double SubsetBiasExpansion(const PointNuisanceValues& truth,
                           const PointNuisanceValues& tilde, Stratum u,
                           std::optional<double> pi_s_tilde) {
  const double tps =
      pi_s_tilde.value_or(SubsetPropensity(tilde.pi, tilde.p1, tilde.p0, u));
  const double ps =
      SubsetPropensity(truth.pi, truth.p1, truth.p0, u);
  double em_a = 0.0, em_b = 0.0;
  switch (u) {
    case Stratum::k00:
      em_a = tilde.mu10 - truth.mu10;
      em_b = tilde.mu00 - truth.mu00;
      break;
    case Stratum::k10:
      em_a = tilde.mu11 - truth.mu11;
      em_b = tilde.mu00 - truth.mu00;
      break;
    case Stratum::k11:
      em_a = tilde.mu11 - truth.mu11;
      em_b = tilde.mu01 - truth.mu01;
      break;
  }
  return (tps - ps) * (em_a / tps + em_b / (1.0 - tps));
}

double EifBiasExpansion(const PointNuisanceValues& truth,
                        const PointNuisanceValues& tilde, Stratum u) {
  const double tpi = tilde.pi, tp1 = tilde.p1, tp0 = tilde.p0;
  const double epi = tilde.pi - truth.pi;
  const double ep1 = tilde.p1 - truth.p1;
  const double ep0 = tilde.p0 - truth.p0;
  const double em11 = tilde.mu11 - truth.mu11;
  const double em10 = tilde.mu10 - truth.mu10;
  const double em01 = tilde.mu01 - truth.mu01;
  const double em00 = tilde.mu00 - truth.mu00;
  double num = 0.0;
  switch (u) {
    case Stratum::k00:
      num = epi * em10 * (1.0 - tp1) / tpi +
            epi * em00 * (1.0 - tp1) / (1.0 - tpi) - ep1 * em00 +
            ep0 * em00 * (1.0 - tp1) / (1.0 - tp0) +
            epi * ep1 * em00 / tpi +
            epi * ep0 * em00 * (1.0 - tp1) / ((1.0 - tp0) * (1.0 - tpi));
      break;
    case Stratum::k10:
      num = epi * em11 * (tp1 - tp0) / tpi +
            epi * em00 * (tp1 - tp0) / (1.0 - tpi) -
            ep1 * em11 * tp0 / tp1 + ep1 * em00 + ep0 * em11 -
            ep0 * em00 * (1.0 - tp1) / (1.0 - tp0) +
            epi * ep1 * em11 * tp0 / (tp1 * tpi) - epi * ep1 * em00 / tpi +
            epi * ep0 * em11 / (1.0 - tpi) -
            epi * ep0 * em00 * (1.0 - tp1) / ((1.0 - tp0) * (1.0 - tpi));
      break;
    case Stratum::k11:
      num = epi * em11 * tp0 / tpi + epi * em01 * tp0 / (1.0 - tpi) +
            ep1 * em11 * tp0 / tp1 - ep0 * em11 -
            epi * ep1 * em11 * tp0 / (tp1 * tpi) -
            epi * ep0 * em11 / (1.0 - tpi);
      break;
  }
  const double eg = ShareScoreMean(truth, tilde, u);
  if (!(std::abs(eg) > 1e-12)) {
    throw OverlapError("denominator score mean is numerically zero");
  }
  return num / eg;
}

double OneStepBiasExpansion(const PointNuisanceValues& truth,
                            const PointNuisanceValues& tilde, Stratum u,
                            double prelim_error) {
  const double tpi = tilde.pi, tp1 = tilde.p1, tp0 = tilde.p0;
  const double epi = tilde.pi - truth.pi;
  const double ep1 = tilde.p1 - truth.p1;
  const double ep0 = tilde.p0 - truth.p0;
  const double em11 = tilde.mu11 - truth.mu11;
  const double em10 = tilde.mu10 - truth.mu10;
  const double em01 = tilde.mu01 - truth.mu01;
  const double em00 = tilde.mu00 - truth.mu00;
  const double etau = prelim_error;
  switch (u) {
    case Stratum::k00:
      return epi * em10 / tpi + epi * em00 / (1.0 - tpi) -
             ep1 * em00 / (1.0 - tp1) + ep0 * em00 / (1.0 - tp0) -
             etau * ep1 / (1.0 - tp1) +
             epi * ep1 * em00 / (tpi * (1.0 - tp1)) +
             epi * ep0 * em00 / ((1.0 - tp0) * (1.0 - tpi)) +
             epi * ep1 * etau / (tpi * (1.0 - tp1));
    case Stratum::k10: {
      const double d = tp1 - tp0;
      if (!(std::abs(d) > 1e-12)) {
        throw ConfigError("plug-in share p1 - p0 is numerically zero");
      }
      return epi * em11 / tpi + epi * em00 / (1.0 - tpi) -
             ep1 * em11 * tp0 / (tp1 * d) -
             ep0 * em00 * (1.0 - tp1) / ((1.0 - tp0) * d) + ep0 * em11 / d +
             ep1 * em00 / d + etau * (ep1 - ep0) / d +
             epi * ep1 * em11 * tp0 / (tp1 * tpi * d) -
             epi * ep1 * em00 / (tpi * d) +
             epi * ep0 * em11 / (d * (1.0 - tpi)) -
             epi * ep0 * em00 * (1.0 - tp1) / ((1.0 - tp0) * d * (1.0 - tpi)) -
             epi * ep1 * etau / (tpi * d) -
             epi * ep0 * etau / (d * (1.0 - tpi));
    }
    case Stratum::k11:
      return epi * em11 / tpi + epi * em01 / (1.0 - tpi) +
             ep1 * em11 / tp1 - ep0 * em11 / tp0 + etau * ep0 / tp0 -
             epi * ep1 * em11 / (tp1 * tpi) -
             epi * ep0 * em11 / (tp0 * (1.0 - tpi)) +
             epi * ep0 * etau / (tp0 * (1.0 - tpi));
  }
  throw ConfigError("unknown stratum");
}

McEstimate PluginLimitMc(const PointNuisanceValues& truth,
                         const PointNuisanceValues& tilde, Stratum u,
                         PseudoFamily family, Index n_mc, std::uint64_t seed,
                         double noise_sd, double tau_check,
                         std::optional<double> pi_s_tilde) {
  if (n_mc < 2) throw ConfigError("n_mc must be at least 2");
  if (family != PseudoFamily::kSubset && pi_s_tilde.has_value()) {
    throw ConfigError(
        "a direct subset-propensity override only applies to the subset "
        "family");
  }
  double tps = 0.0;
  if (family == PseudoFamily::kSubset) {
    tps =
        pi_s_tilde.value_or(SubsetPropensity(tilde.pi, tilde.p1, tilde.p0, u));
  }
  Rng rng(MixSeed(seed, 0xB1A5ULL));

  // Accumulators: subset/one-step need one stream; the ratio family needs
  // the joint second moments of numerator and denominator scores.
  double sum = 0.0, sumsq = 0.0;
  double sum_n = 0.0, sum_d = 0.0, sum_nn = 0.0, sum_dd = 0.0, sum_nd = 0.0;
  Index used = 0;

  for (Index i = 0; i < n_mc; ++i) {
    const int z = rng.Bernoulli(truth.pi) ? 1 : 0;
    const double pz = z == 1 ? truth.p1 : truth.p0;
    const int s = rng.Bernoulli(pz) ? 1 : 0;
    const double mu = z == 1 ? (s == 1 ? truth.mu11 : truth.mu10)
                             : (s == 1 ? truth.mu01 : truth.mu00);
    const double y = mu + noise_sd * rng.Normal();

    switch (family) {
      case PseudoFamily::kSubset: {
        if (!InSubset(u, z, s)) break;
        const double v = SubsetPseudoAt(u, tilde, tps, z, y);
        sum += v;
        sumsq += v * v;
        ++used;
        break;
      }
      case PseudoFamily::kOneStep: {
        const double v = OneStepPseudoAt(u, tilde, z, s, y, tau_check, 1e-12);
        sum += v;
        sumsq += v * v;
        ++used;
        break;
      }
      case PseudoFamily::kEifRatio: {
        const EifParts parts = EifComponentsAt(u, tilde, z, s, y);
        const double num = parts.phi1 - parts.phi0;
        sum_n += num;
        sum_d += parts.g;
        sum_nn += num * num;
        sum_dd += parts.g * parts.g;
        sum_nd += num * parts.g;
        ++used;
        break;
      }
    }
  }

  McEstimate out;
  if (family == PseudoFamily::kEifRatio) {
    const double n = static_cast<double>(used);
    const double mn = sum_n / n, md = sum_d / n;
    if (!(std::abs(md) > 1e-12)) {
      throw OverlapError("Monte-Carlo denominator mean is zero");
    }
    const double vn = (sum_nn - n * mn * mn) / (n - 1.0);
    const double vd = (sum_dd - n * md * md) / (n - 1.0);
    const double cnd = (sum_nd - n * mn * md) / (n - 1.0);
    out.mean = mn / md;
    const double var = vn / (md * md) + mn * mn * vd / (md * md * md * md) -
                       2.0 * mn * cnd / (md * md * md);
    out.se = std::sqrt(std::max(var, 0.0) / n);
    out.n_used = used;
    return out;
  }
  if (used < 2) {
    throw EmptyCellError("too few Monte-Carlo draws in the analysis subset");
  }
  const double n = static_cast<double>(used);
  out.mean = sum / n;
  const double var = (sumsq - n * out.mean * out.mean) / (n - 1.0);
  out.se = std::sqrt(std::max(var, 0.0) / n);
  out.n_used = used;
  return out;
}

PointPerturbation BasePerturbation(double m) {
  PointPerturbation p;
  p.dpi = m;
  p.dp1 = -0.8 * m;
  p.dp0 = 0.6 * m;
  p.dmu11 = 2.0 * m;
  p.dmu10 = -1.6 * m;
  p.dmu01 = 1.2 * m;
  p.dmu00 = -2.0 * m;
  p.dprelim = 1.4 * m;
  return p;
}

std::vector<std::string> RegimesFor(PseudoFamily family) {
  switch (family) {
    case PseudoFamily::kSubset:
    case PseudoFamily::kEifRatio:
      return {"all-exact", "scores-exact", "outcome-exact", "all-perturbed"};
    case PseudoFamily::kOneStep:
      return {"all-exact", "scores-exact", "selection-outcome-exact",
              "outcome-prelim-exact", "all-perturbed"};
  }
  return {};
}

bool RegimeIsProtected(const std::string& regime) {
  return regime != "all-perturbed";
}

PointPerturbation MaskPerturbation(const PointPerturbation& base,
                                   const std::string& regime) {
  PointPerturbation p = base;
  if (regime == "all-exact") return PointPerturbation{};
  if (regime == "all-perturbed") return p;
  if (regime == "scores-exact") {
    p.dpi = p.dp1 = p.dp0 = 0.0;
    return p;
  }
  if (regime == "outcome-exact") {
    p.dmu11 = p.dmu10 = p.dmu01 = p.dmu00 = 0.0;
    return p;
  }
  if (regime == "selection-outcome-exact") {
    p.dp1 = p.dp0 = 0.0;
    p.dmu11 = p.dmu10 = p.dmu01 = p.dmu00 = 0.0;
    return p;
  }
  if (regime == "outcome-prelim-exact") {
    p.dmu11 = p.dmu10 = p.dmu01 = p.dmu00 = 0.0;
    p.dprelim = 0.0;
    return p;
  }
  throw ConfigError("unknown perturbation regime '" + regime + "'");
}

std::vector<RobustnessCase> RobustnessSweep(const RobustnessConfig& cfg) {
  const TruthBundle truth = MakeTruth(cfg.dgp, cfg.scenario);
  Eigen::MatrixXd points = cfg.points;
  if (points.rows() == 0) {
    points = SampleCovariates(cfg.dgp, 5, MixSeed(cfg.seed, 0x9017ULL));
  }
  if (points.cols() != truth.dim) {
    throw SchemaError("robustness points have wrong dimension");
  }
  const PointPerturbation base = BasePerturbation(cfg.magnitude);

  struct Job {
    PseudoFamily family;
    Stratum stratum;
    std::string regime;
    Index point;
  };
  std::vector<PseudoFamily> families = cfg.families;
  if (families.empty()) {
    families = {PseudoFamily::kSubset, PseudoFamily::kOneStep,
                PseudoFamily::kEifRatio};
  }
  std::vector<bool> regime_seen(cfg.regimes.size(), false);
  std::vector<Job> jobs;
  for (PseudoFamily family : families) {
    for (const std::string& regime : RegimesFor(family)) {
      bool wanted = cfg.regimes.empty();
      for (std::size_t r = 0; r < cfg.regimes.size(); ++r) {
        if (cfg.regimes[r] == regime) {
          wanted = true;
          regime_seen[r] = true;
        }
      }
      if (!wanted) continue;
      for (Stratum u : {Stratum::k00, Stratum::k10, Stratum::k11}) {
        for (Index p = 0; p < points.rows(); ++p) {
          jobs.push_back(Job{family, u, regime, p});
        }
      }
    }
  }
  for (std::size_t r = 0; r < cfg.regimes.size(); ++r) {
    if (!regime_seen[r]) {
      throw ConfigError("regime '" + cfg.regimes[r] +
                        "' does not apply to any swept family");
    }
  }

  std::vector<RobustnessCase> cases(jobs.size());
  ParallelFor(jobs.size(), cfg.threads, [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const Eigen::RowVectorXd x = points.row(job.point);
    PointNuisanceValues tv;
    tv.pi = truth.pi(x);
    tv.p1 = truth.p1(x);
    tv.p0 = truth.p0(x);
    tv.mu11 = truth.mu11(x);
    tv.mu10 = truth.mu10(x);
    tv.mu01 = truth.mu01(x);
    tv.mu00 = truth.mu00(x);
    const double tau = truth.Tau(job.stratum)(x);

    const PointPerturbation pert = MaskPerturbation(base, job.regime);
    const PointNuisanceValues tilde = ApplyPerturbation(tv, pert);

    RobustnessCase c;
    c.family = job.family;
    c.stratum = job.stratum;
    c.regime = job.regime;
    c.x = x;
    c.tau_true = tau;
    c.protected_regime = RegimeIsProtected(job.regime);

    const std::uint64_t mc_seed =
        MixSeed(cfg.seed, idx, 0x5EEDULL);
    switch (job.family) {
      case PseudoFamily::kSubset: {
        c.limit_bias = SubsetPluginLimit(tv, tilde, job.stratum) - tau;
        c.expansion_bias = SubsetBiasExpansion(tv, tilde, job.stratum);
        const McEstimate mc =
            PluginLimitMc(tv, tilde, job.stratum, job.family, cfg.n_mc,
                          mc_seed, cfg.noise_sd);
        c.mc_bias = mc.mean - tau;
        c.mc_se = mc.se;
        break;
      }
      case PseudoFamily::kOneStep: {
        const double tau_check = tau + pert.dprelim;
        c.limit_bias =
            OneStepPluginLimit(tv, tilde, job.stratum, tau_check) - tau;
        c.expansion_bias =
            OneStepBiasExpansion(tv, tilde, job.stratum, pert.dprelim);
        const McEstimate mc =
            PluginLimitMc(tv, tilde, job.stratum, job.family, cfg.n_mc,
                          mc_seed, cfg.noise_sd, tau_check);
        c.mc_bias = mc.mean - tau;
        c.mc_se = mc.se;
        break;
      }
      case PseudoFamily::kEifRatio: {
        c.limit_bias = EifPluginLimit(tv, tilde, job.stratum) - tau;
        c.expansion_bias = EifBiasExpansion(tv, tilde, job.stratum);
        const McEstimate mc =
            PluginLimitMc(tv, tilde, job.stratum, job.family, cfg.n_mc,
                          mc_seed, cfg.noise_sd);
        c.mc_bias = mc.mean - tau;
        c.mc_se = mc.se;
        break;
      }
    }
    cases[idx] = std::move(c);
  });
  return cases;
}

void WriteRobustnessCsv(const std::string& path,
                        const std::vector<RobustnessCase>& cases,
                        const std::vector<std::string>& comments) {
  std::vector<std::string> header = {"family", "stratum", "regime"};
  const Index d = cases.empty() ? 0 : cases.front().x.size();
  for (Index j = 0; j < d; ++j) header.push_back("x" + std::to_string(j + 1));
  for (const char* name :
       {"tau_true", "limit_bias", "expansion_bias", "mc_bias", "mc_se",
        "protected", "z_score"}) {
    header.push_back(name);
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(cases.size());
  for (const auto& c : cases) {
    std::vector<std::string> row = {FamilyLabel(c.family),
                                    StratumLabel(c.stratum), c.regime};
    for (Index j = 0; j < c.x.size(); ++j) {
      row.push_back(FormatDouble(c.x(j)));
    }
    row.push_back(FormatDouble(c.tau_true));
    row.push_back(FormatDouble(c.limit_bias));
    row.push_back(FormatDouble(c.expansion_bias));
    row.push_back(FormatDouble(c.mc_bias));
    row.push_back(FormatDouble(c.mc_se));
    row.push_back(c.protected_regime ? "1" : "0");
    row.push_back(FormatDouble(c.mc_se > 0.0 ? c.mc_bias / c.mc_se : 0.0));
    rows.push_back(std::move(row));
  }
  WriteCsv(path, comments, header, rows);
}

}  // namespace cpce
