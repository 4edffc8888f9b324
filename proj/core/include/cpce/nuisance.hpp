#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cpce/learners.hpp"
#include "cpce/sample_table.hpp"

namespace cpce {

using PointFn = std::function<double(const Eigen::RowVectorXd&)>;

// Point-evaluable nuisance functions. Probabilities are already clipped to
// [clip_eps, 1 - clip_eps]; cell means are unconstrained.
struct NuisanceBundle {
  PointFn pi;                       // P(Z=1 | x)
  PointFn p1, p0;                   // P(S=1 | Z=z, x)
  PointFn mu11, mu10, mu01, mu00;   // E[Y | Z=z, S=s, x], indexed mu{z}{s}
  double clip_eps = 0.01;

  double Mu(int z, int s, const Eigen::RowVectorXd& x) const {
    if (z == 1) return s == 1 ? mu11(x) : mu10(x);
    return s == 1 ? mu01(x) : mu00(x);
  }
};

// Per-(z, s)-cell outcome regressions fit on a row subset.
class CellRegressions {
 public:
  // Throws EmptyCellError if any of the four cells has no rows.
  static CellRegressions Fit(const SampleTable& table,
                             const std::vector<Index>& rows,
                             const SmootherConfig& cfg);

  double MuAt(int z, int s, const Eigen::RowVectorXd& x) const;
  const Smoother& cell(int z, int s) const;

 private:
  std::array<std::shared_ptr<Smoother>, 4> cells_;
};

struct NuisanceConfig {
  ProbModelConfig prob;     // assignment and selection scores
  SmootherConfig outcome;   // cell outcome regressions
  double clip_eps = 0.01;
};

// Fits all nuisances on the given rows: assignment score on every row,
// selection scores on the z=1 / z=0 rows, outcome means per (z, s) cell.
NuisanceBundle FitNuisances(const SampleTable& table,
                            const std::vector<Index>& rows,
                            const NuisanceConfig& cfg);

}  // namespace cpce
