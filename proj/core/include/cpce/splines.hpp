#pragma once

#include <Eigen/Core>
#include <vector>

namespace cpce {

// Cubic B-spline basis on [lo, hi] with clamped (repeated) boundary knots.
// Queries outside the range are clamped to the boundary, so extrapolation
// is constant at the boundary value of the fitted function.
class CubicBSplineBasis {
 public:
  // Places `interior_knots` knots at empirical quantiles of x. Duplicate
  // quantiles (ties in x) are spread uniformly instead.
  static CubicBSplineBasis FromQuantiles(const Eigen::VectorXd& x,
                                         int interior_knots);

  int size() const { return static_cast<int>(knots_.size()) - 4; }

  // Values of all basis functions at x (length size()).
  Eigen::VectorXd Evaluate(double x) const;

  // P = D2' D2 where D2 takes second differences of coefficients.
  Eigen::MatrixXd SecondDifferencePenalty() const;

 private:
  std::vector<double> knots_;  // padded knot vector, length size() + 4
  double lo_ = 0.0, hi_ = 1.0;
};

// Additive design over d coordinates: an intercept column followed by one
// centered B-spline block per coordinate. Centering offsets are the
// training-column means and are reapplied to query rows, which keeps the
// blocks orthogonal to the intercept.
class AdditiveSplineDesign {
 public:
  AdditiveSplineDesign() = default;
  AdditiveSplineDesign(const Eigen::MatrixXd& train_x, int interior_knots);

  Eigen::Index cols() const { return total_cols_; }
  Eigen::RowVectorXd Row(const Eigen::RowVectorXd& x) const;
  Eigen::MatrixXd Rows(const Eigen::MatrixXd& x) const;

  // Block-diagonal second-difference penalty; zero block for intercept.
  Eigen::MatrixXd Penalty() const;

 private:
  std::vector<CubicBSplineBasis> bases_;
  Eigen::RowVectorXd col_means_;  // over non-intercept columns
  Eigen::Index total_cols_ = 0;
};

}  // namespace cpce
