#pragma once

#include <Eigen/Core>
#include <vector>

#include "cpce/sample_table.hpp"

namespace cpce {

// Plug-in nuisance values at a single covariate point.
struct PointNuisanceValues {
  double pi;    // P(Z=1 | x)
  double p1;    // P(S=1 | Z=1, x)
  double p0;    // P(S=1 | Z=0, x)
  double mu11;  // E[Y | Z=1, S=1, x]
  double mu10;  // E[Y | Z=1, S=0, x]
  double mu01;  // E[Y | Z=0, S=1, x]
  double mu00;  // E[Y | Z=0, S=0, x]
};

// Stratum shares implied by the selection scores. When p1 < p0 the share
// of the assignment-responsive stratum is negative; strict mode rejects a
// violation beyond `tol`, otherwise the share is floored at zero and the
// remaining shares renormalized to sum to one.
struct PrincipalScores {
  double e00;
  double e10;
  double e11;
  bool floored;
};

PrincipalScores PrincipalScore(double p1, double p0, double tol, bool strict);

// P(Z=1 | x, membership in the stratum-specific analysis subset):
//   00 -> {S=0},  10 -> {Z=S},  11 -> {S=1}.
double SubsetPropensity(double pi, double p1, double p0, Stratum u);

bool InSubset(Stratum u, int z, int s);

// Arm-recentered score: 1{z==a} / prob_a * (f_obs - cond_mean_a) +
// cond_mean_a, where prob_a = P(Z=a | x) under the plug-in law.
double PsiScore(int z, int a, double f_obs, double prob_a, double cond_mean_a);

// Optional rescaling of inverse-probability factors; c1 (c0) multiplies
// the 1/P(Z=1|x) (1/P(Z=0|x)) factor. Identity when both are 1.
struct HajekScale {
  double c1 = 1.0;
  double c0 = 1.0;
};

// Rescales signed inverse-probability factors so the mean absolute factor
// is one, preserving signs. Throws OverlapError when the mean is zero.
std::vector<double> HajekNormalize(const std::vector<double>& factors);

// Influence pieces for the ratio representation of the stratum effect:
// numerator scores phi1/phi0 and denominator score g with E[g | x] equal
// to the stratum share.
struct EifParts {
  double phi1;
  double phi0;
  double g;
};

EifParts EifComponentsAt(Stratum u, const PointNuisanceValues& v, int z, int s,
                         double y, const HajekScale& hajek = {});

// Doubly robust pseudo-outcome for rows inside the stratum's analysis
// subset; pi_s must already be clipped by the caller if desired.
double SubsetPseudoAt(Stratum u, const PointNuisanceValues& v, double pi_s,
                      int z, double y, const HajekScale& hajek = {});

// Plug-in stratum share e^u(x); for the assignment-responsive stratum the
// difference p1 - p0 is floored at `denom_eps` (counted via truncated).
double StratumShareFloored(Stratum u, const PointNuisanceValues& v,
                           double denom_eps, int* truncated);

// One-step pseudo-outcome: tau_check + (phi1 - phi0 - tau_check * g) / e.
double OneStepPseudoAt(Stratum u, const PointNuisanceValues& v, int z, int s,
                       double y, double tau_check, double denom_eps,
                       const HajekScale& hajek = {}, int* truncated = nullptr);

}  // namespace cpce
