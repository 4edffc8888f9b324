#include "cpce/identification.hpp"

#include <cmath>

#include "cpce/errors.hpp"

namespace cpce {

PrincipalScores PrincipalScore(double p1, double p0, double tol, bool strict) {
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p0 >= 0.0 && p0 <= 1.0)) {
    throw DataError("PrincipalScore: selection scores must lie in [0,1]");
  }
  if (tol < 0.0) throw ConfigError("PrincipalScore: tol must be >= 0");
  PrincipalScores out;
  out.floored = false;
  if (p1 >= p0) {
    out.e00 = 1.0 - p1;
    out.e10 = p1 - p0;
    out.e11 = p0;
    return out;
  }
  if (strict && p0 - p1 > tol) {
    throw MonotonicityError(
        "selection scores violate p1 >= p0: p1=" + std::to_string(p1) +
        ", p0=" + std::to_string(p0));
  }
  // Floor the responsive-stratum share at zero and renormalize the other
  // two so the shares remain a distribution.
  const double total = (1.0 - p1) + p0;
  out.e00 = (1.0 - p1) / total;
  out.e10 = 0.0;
  out.e11 = p0 / total;
  out.floored = true;
  return out;
}

double SubsetPropensity(double pi, double p1, double p0, Stratum u) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw DataError("SubsetPropensity: pi must lie in (0,1)");
  }
  double num = 0.0, other = 0.0;
  switch (u) {
    case Stratum::k10:
      num = pi * p1;
      other = (1.0 - pi) * (1.0 - p0);
      break;
    case Stratum::k00:
      num = pi * (1.0 - p1);
      other = (1.0 - pi) * (1.0 - p0);
      break;
    case Stratum::k11:
      num = pi * p1;
      other = (1.0 - pi) * p0;
      break;
  }
  const double denom = num + other;
  if (!(denom > 0.0)) {
    throw OverlapError("SubsetPropensity: subset has zero probability");
  }
  return num / denom;
}

bool InSubset(Stratum u, int z, int s) {
  switch (u) {
    case Stratum::k00: return s == 0;
    case Stratum::k10: return z == s;
    case Stratum::k11: return s == 1;
  }
  return false;
}

double PsiScore(int z, int a, double f_obs, double prob_a,
                double cond_mean_a) {
  if (a != 0 && a != 1) throw ConfigError("PsiScore: arm must be 0 or 1");
  if (z != a) return cond_mean_a;
  if (!(prob_a > 0.0)) {
    throw OverlapError("PsiScore: arm probability must be positive");
  }
  return (f_obs - cond_mean_a) / prob_a + cond_mean_a;
}

std::vector<double> HajekNormalize(const std::vector<double>& factors) {
  if (factors.empty()) return {};
  double mean_abs = 0.0;
  for (double f : factors) mean_abs += std::abs(f);
  mean_abs /= static_cast<double>(factors.size());
  if (!(mean_abs > 0.0)) {
    throw OverlapError("HajekNormalize: mean absolute factor is zero");
  }
  std::vector<double> out;
  out.reserve(factors.size());
  for (double f : factors) out.push_back(f / mean_abs);
  return out;
}

namespace {

// Plug-in conditional mean of f within assignment arm a, for the four
// transformations used by the influence pieces.
enum class FKind { kS, kOneMinusS, kYS, kYOneMinusS };

double PlugInCellMean(FKind f, int a, const PointNuisanceValues& v) {
  const double pa = a == 1 ? v.p1 : v.p0;
  switch (f) {
    case FKind::kS: return pa;
    case FKind::kOneMinusS: return 1.0 - pa;
    case FKind::kYS: return (a == 1 ? v.mu11 : v.mu01) * pa;
    case FKind::kYOneMinusS: return (a == 1 ? v.mu10 : v.mu00) * (1.0 - pa);
  }
  return 0.0;
}

double ObservedF(FKind f, int s, double y) {
  switch (f) {
    case FKind::kS: return s;
    case FKind::kOneMinusS: return 1 - s;
    case FKind::kYS: return y * s;
    case FKind::kYOneMinusS: return y * (1 - s);
  }
  return 0.0;
}

struct PsiEvaluator {
  const PointNuisanceValues& v;
  int z;
  int s;
  double y;
  HajekScale hajek;

  double operator()(int a, FKind f) const {
    const double prob_a = a == 1 ? v.pi : 1.0 - v.pi;
    const double scale = a == 1 ? hajek.c1 : hajek.c0;
    const double m = PlugInCellMean(f, a, v);
    if (z != a) return m;
    if (!(prob_a > 0.0)) {
      throw OverlapError("arm probability must be positive");
    }
    return scale * (ObservedF(f, s, y) - m) / prob_a + m;
  }
};

}  // namespace

EifParts EifComponentsAt(Stratum u, const PointNuisanceValues& v, int z, int s,
                         double y, const HajekScale& hajek) {
  const PsiEvaluator psi{v, z, s, y, hajek};
  const double e00 = 1.0 - v.p1;
  const double e10 = v.p1 - v.p0;
  const double e11 = v.p0;
  EifParts parts;
  switch (u) {
    case Stratum::k10: {
      parts.phi1 = (e10 / v.p1) * psi(1, FKind::kYS) -
                   v.mu11 * (psi(0, FKind::kS) -
                             (v.p0 / v.p1) * psi(1, FKind::kS));
      parts.phi0 =
          (e10 / (1.0 - v.p0)) * psi(0, FKind::kYOneMinusS) -
          v.mu00 * (psi(1, FKind::kOneMinusS) -
                    ((1.0 - v.p1) / (1.0 - v.p0)) * psi(0, FKind::kOneMinusS));
      parts.g = psi(1, FKind::kS) - psi(0, FKind::kS);
      break;
    }
    case Stratum::k11: {
      parts.phi1 = (e11 / v.p1) * psi(1, FKind::kYS) +
                   v.mu11 * (psi(0, FKind::kS) -
                             (v.p0 / v.p1) * psi(1, FKind::kS));
      parts.phi0 = psi(0, FKind::kYS);
      parts.g = psi(0, FKind::kS);
      break;
    }
    case Stratum::k00: {
      parts.phi1 = psi(1, FKind::kYOneMinusS);
      parts.phi0 =
          (e00 / (1.0 - v.p0)) * psi(0, FKind::kYOneMinusS) +
          v.mu00 * (psi(1, FKind::kOneMinusS) -
                    ((1.0 - v.p1) / (1.0 - v.p0)) * psi(0, FKind::kOneMinusS));
      parts.g = psi(1, FKind::kOneMinusS);
      break;
    }
  }
  return parts;
}

namespace {

// Outcome model used inside the subset pseudo-outcome: the (z, s) cell
// the subset member necessarily occupies under monotonicity.
double SubsetMuSelected(Stratum u, const PointNuisanceValues& v, int z) {
  switch (u) {
    case Stratum::k00: return z == 1 ? v.mu10 : v.mu00;
    case Stratum::k10: return z == 1 ? v.mu11 : v.mu00;
    case Stratum::k11: return z == 1 ? v.mu11 : v.mu01;
  }
  return 0.0;
}

double SubsetContrast(Stratum u, const PointNuisanceValues& v) {
  switch (u) {
    case Stratum::k00: return v.mu10 - v.mu00;
    case Stratum::k10: return v.mu11 - v.mu00;
    case Stratum::k11: return v.mu11 - v.mu01;
  }
  return 0.0;
}

}  // namespace

double SubsetPseudoAt(Stratum u, const PointNuisanceValues& v, double pi_s,
                      int z, double y, const HajekScale& hajek) {
  if (!(pi_s > 0.0 && pi_s < 1.0)) {
    throw OverlapError("SubsetPseudoAt: subset propensity must lie in (0,1)");
  }
  const double mu_sel = SubsetMuSelected(u, v, z);
  const double factor = z == 1 ? hajek.c1 / pi_s : -hajek.c0 / (1.0 - pi_s);
  return factor * (y - mu_sel) + SubsetContrast(u, v);
}

double StratumShareFloored(Stratum u, const PointNuisanceValues& v,
                           double denom_eps, int* truncated) {
  switch (u) {
    case Stratum::k00: return 1.0 - v.p1;
    case Stratum::k11: return v.p0;
    case Stratum::k10: {
      const double raw = v.p1 - v.p0;
      if (raw < denom_eps) {
        if (truncated != nullptr) ++*truncated;
        return denom_eps;
      }
      return raw;
    }
  }
  throw ConfigError("StratumShareFloored: unknown stratum");
}

double OneStepPseudoAt(Stratum u, const PointNuisanceValues& v, int z, int s,
                       double y, double tau_check, double denom_eps,
                       const HajekScale& hajek, int* truncated) {
  const EifParts parts = EifComponentsAt(u, v, z, s, y, hajek);
  const double e = StratumShareFloored(u, v, denom_eps, truncated);
  if (!(e > 0.0)) {
    throw OverlapError("OneStepPseudoAt: stratum share must be positive");
  }
  return tau_check + (parts.phi1 - parts.phi0 - tau_check * parts.g) / e;
}

}  // namespace cpce
