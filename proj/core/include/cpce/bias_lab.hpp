#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpce/identification.hpp"
#include "cpce/sim.hpp"

namespace cpce {

enum class PseudoFamily { kSubset, kOneStep, kEifRatio };

const char* FamilyLabel(PseudoFamily family);
PseudoFamily ParseFamily(const std::string& label);

// Additive errors applied to the true nuisance values at a point.
struct PointPerturbation {
  double dpi = 0.0;
  double dp1 = 0.0;
  double dp0 = 0.0;
  double dmu11 = 0.0;
  double dmu10 = 0.0;
  double dmu01 = 0.0;
  double dmu00 = 0.0;
  double dprelim = 0.0;  // preliminary-effect error (one-step family)
  // When set, the subset family uses this error on the subset propensity
  // directly instead of composing it from the perturbed scores.
  std::optional<double> dpi_subset;
};

// Returns the perturbed values; throws ConfigError if a perturbed
// probability leaves (0, 1).
PointNuisanceValues ApplyPerturbation(const PointNuisanceValues& truth,
                                      const PointPerturbation& pert);

// ---------------------------------------------------------------------------
// Population limits of the plug-in pseudo-outcome means at a point, under
// the true observation law, computed by closed-form expectation algebra.
// ---------------------------------------------------------------------------

double SubsetPluginLimit(const PointNuisanceValues& truth,
                         const PointNuisanceValues& tilde, Stratum u,
                         std::optional<double> pi_s_tilde = {});
double EifPluginLimit(const PointNuisanceValues& truth,
                      const PointNuisanceValues& tilde, Stratum u);
double OneStepPluginLimit(const PointNuisanceValues& truth,
                          const PointNuisanceValues& tilde, Stratum u,
                          double tau_check);

// Closed-form mean of the denominator score under the true law.
double ShareScoreMean(const PointNuisanceValues& truth,
                      const PointNuisanceValues& tilde, Stratum u);

// ---------------------------------------------------------------------------
// Bias expansions: the same limits minus the true effect, written as
// polynomials in the nuisance errors. These are algebraically exact (no
// remainder truncation), so they must agree with the limit route to
// machine precision.
// ---------------------------------------------------------------------------

double SubsetBiasExpansion(const PointNuisanceValues& truth,
                           const PointNuisanceValues& tilde, Stratum u,
                           std::optional<double> pi_s_tilde = {});
double EifBiasExpansion(const PointNuisanceValues& truth,
                        const PointNuisanceValues& tilde, Stratum u);
double OneStepBiasExpansion(const PointNuisanceValues& truth,
                            const PointNuisanceValues& tilde, Stratum u,
                            double prelim_error);

// ---------------------------------------------------------------------------
// Monte-Carlo route: simulate (z, s, y) at the point from the true values
// and average the family's plug-in pseudo-outcome.
// ---------------------------------------------------------------------------

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  Index n_used = 0;
};

McEstimate PluginLimitMc(const PointNuisanceValues& truth,
                         const PointNuisanceValues& tilde, Stratum u,
                         PseudoFamily family, Index n_mc, std::uint64_t seed,
                         double noise_sd, double tau_check = 0.0,
                         std::optional<double> pi_s_tilde = {});

// ---------------------------------------------------------------------------
// Robustness sweep: for each family / stratum / perturbation regime at a
// set of covariate points, compare the closed-form bias, the expansion,
// and a Monte-Carlo estimate.
// ---------------------------------------------------------------------------

struct RobustnessCase {
  PseudoFamily family;
  Stratum stratum;
  std::string regime;
  Eigen::RowVectorXd x;
  double tau_true = 0.0;
  double limit_bias = 0.0;      // closed-form limit minus truth
  double expansion_bias = 0.0;  // error-polynomial route
  double mc_bias = 0.0;
  double mc_se = 0.0;
  bool protected_regime = false;
};

struct RobustnessConfig {
  DgpName dgp = DgpName::kStudy1;
  int scenario = 1;
  Eigen::MatrixXd points;  // rows are covariate points; empty: default grid
  double magnitude = 0.05;
  Index n_mc = 400000;
  std::uint64_t seed = 1;
  double noise_sd = 0.2;
  int threads = 1;
  // Empty: sweep all families / every regime of each swept family. A
  // named regime must belong to at least one swept family (ConfigError).
  std::vector<PseudoFamily> families;
  std::vector<std::string> regimes;
};

// The base perturbation pattern at scale m; regimes zero out subsets.
PointPerturbation BasePerturbation(double m);

std::vector<std::string> RegimesFor(PseudoFamily family);
bool RegimeIsProtected(const std::string& regime);
PointPerturbation MaskPerturbation(const PointPerturbation& base,
                                   const std::string& regime);

std::vector<RobustnessCase> RobustnessSweep(const RobustnessConfig& cfg);

void WriteRobustnessCsv(const std::string& path,
                        const std::vector<RobustnessCase>& cases,
                        const std::vector<std::string>& comments);

}  // namespace cpce
