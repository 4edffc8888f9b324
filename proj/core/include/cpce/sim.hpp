#pragma once

#include <cstdint>
#include <string>

#include "cpce/nuisance.hpp"
#include "cpce/sample_table.hpp"

namespace cpce {

// Synthetic data-generating processes. "study1" has four variants chosen
// by `scenario` that toggle whether the score functions and the outcome
// baseline are inside the span of linear working models.
enum class DgpName {
  kToy,
  kStudy1,
  kStudy2,
  kStudy2NonlinearTau,
  kStudy3
};

const char* DgpLabel(DgpName name);
DgpName ParseDgpName(const std::string& label);

struct DgpSpec {
  DgpName name = DgpName::kStudy1;
  int scenario = 1;        // study1 only, 1..4
  Index n = 1000;
  std::uint64_t seed = 0;
  double noise_sd = 0.2;
};

// True nuisance functions and stratum effect curves for a DGP.
struct TruthBundle {
  int dim = 4;
  PointFn pi, p1, p0;
  PointFn mu11, mu10, mu01, mu00;
  PointFn tau00, tau10, tau11;

  PointFn Tau(Stratum u) const {
    switch (u) {
      case Stratum::k00: return tau00;
      case Stratum::k10: return tau10;
      case Stratum::k11: return tau11;
    }
    return tau00;
  }

  // View of the true nuisances in the estimator-facing bundle type.
  NuisanceBundle AsNuisanceBundle() const;
};

TruthBundle MakeTruth(DgpName name, int scenario = 1);

// Draws covariates from the DGP's covariate law.
Eigen::MatrixXd SampleCovariates(DgpName name, Index m, std::uint64_t seed);

// Generates a full synthetic sample: covariates, assignment z ~ pi(x),
// selection s ~ p_z(x), outcome y = mu_zs(x) + noise_sd * N(0,1).
SampleTable Generate(const DgpSpec& spec);

}  // namespace cpce
