#include "cpce/splines.hpp"

#include <algorithm>
#include <cmath>

#include "cpce/errors.hpp"

namespace cpce {

CubicBSplineBasis CubicBSplineBasis::FromQuantiles(const Eigen::VectorXd& x,
                                                   int interior_knots) {
  if (x.size() < 2) {
    throw ConfigError("spline basis needs at least 2 observations");
  }
  if (interior_knots < 0) {
    throw ConfigError("interior_knots must be non-negative");
  }
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  double lo = sorted.front();
  double hi = sorted.back();
  if (!(hi > lo)) {
    // Degenerate support: widen artificially so the basis is well defined.
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> interior;
  interior.reserve(static_cast<std::size_t>(interior_knots));
  const std::size_t n = sorted.size();
  for (int k = 1; k <= interior_knots; ++k) {
    const double q = static_cast<double>(k) /
                     static_cast<double>(interior_knots + 1);
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t i0 = static_cast<std::size_t>(std::floor(pos));
    const std::size_t i1 = std::min(i0 + 1, n - 1);
    const double frac = pos - static_cast<double>(i0);
    interior.push_back((1.0 - frac) * sorted[i0] + frac * sorted[i1]);
  }
  // Ties in the data can collapse quantile knots; fall back to a uniform
  // grid in that case so the basis stays non-degenerate.
  bool collapsed = false;
  for (std::size_t i = 0; i + 1 < interior.size(); ++i) {
    if (!(interior[i + 1] > interior[i])) collapsed = true;
  }
  if (!interior.empty() &&
      (collapsed || interior.front() <= lo || interior.back() >= hi)) {
    for (int k = 1; k <= interior_knots; ++k) {
      interior[static_cast<std::size_t>(k - 1)] =
          lo + (hi - lo) * static_cast<double>(k) /
                   static_cast<double>(interior_knots + 1);
    }
  }

  CubicBSplineBasis basis;
  basis.lo_ = lo;
  basis.hi_ = hi;
  basis.knots_.assign(4, lo);
  basis.knots_.insert(basis.knots_.end(), interior.begin(), interior.end());
  basis.knots_.insert(basis.knots_.end(), 4, hi);
  return basis;
}

Eigen::VectorXd CubicBSplineBasis::Evaluate(double x) const {
  const int p = size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  const double xc = std::min(std::max(x, lo_), hi_);

  // Locate the non-empty knot span [t_span, t_span+1) containing xc. At
  // the right boundary take the last non-empty span so the basis is
  // right-continuous at hi.
  const auto& t = knots_;
  const int m = static_cast<int>(t.size());
  int span = -1;
  if (xc >= t[static_cast<std::size_t>(m - 1)]) {
    for (int j = m - 2; j >= 0; --j) {
      if (t[static_cast<std::size_t>(j)] < t[static_cast<std::size_t>(j + 1)]) {
        span = j;
        break;
      }
    }
  } else {
    for (int j = 3; j <= m - 5; ++j) {
      if (xc >= t[static_cast<std::size_t>(j)] &&
          xc < t[static_cast<std::size_t>(j + 1)]) {
        span = j;
        break;
      }
    }
  }
  if (span < 0) throw ConfigError("spline evaluation failed to locate span");

  // Classic basis-function recurrence: after pass j, N[r] holds
  // B_{span-j+r, j}(xc) for r = 0..j. All denominators are positive
  // because they span the non-empty interval [t_span, t_span+1].
  double N[4] = {1.0, 0.0, 0.0, 0.0};
  double left[4] = {0.0, 0.0, 0.0, 0.0};
  double right[4] = {0.0, 0.0, 0.0, 0.0};
  for (int j = 1; j <= 3; ++j) {
    left[j] = xc - t[static_cast<std::size_t>(span + 1 - j)];
    right[j] = t[static_cast<std::size_t>(span + j)] - xc;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[r + 1] + left[j - r];
      const double temp = N[r] / den;
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
  for (int k = 0; k <= 3; ++k) {
    const int idx = span - 3 + k;
    if (idx >= 0 && idx < p) out(idx) = N[k];
  }
  return out;
}

Eigen::MatrixXd CubicBSplineBasis::SecondDifferencePenalty() const {
  const int p = size();
  if (p < 3) return Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(p - 2, p);
  for (int r = 0; r < p - 2; ++r) {
    d2(r, r) = 1.0;
    d2(r, r + 1) = -2.0;
    d2(r, r + 2) = 1.0;
  }
  return d2.transpose() * d2;
}

AdditiveSplineDesign::AdditiveSplineDesign(const Eigen::MatrixXd& train_x,
                                           int interior_knots) {
  const Eigen::Index d = train_x.cols();
  bases_.reserve(static_cast<std::size_t>(d));
  Eigen::Index cols = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    bases_.push_back(
        CubicBSplineBasis::FromQuantiles(train_x.col(j), interior_knots));
    cols += bases_.back().size();
  }
  total_cols_ = cols + 1;

  // First pass with zero offsets to measure the training column means.
  col_means_ = Eigen::RowVectorXd::Zero(cols);
  Eigen::RowVectorXd sums = Eigen::RowVectorXd::Zero(cols);
  for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
    Eigen::Index off = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::VectorXd b =
          bases_[static_cast<std::size_t>(j)].Evaluate(train_x(i, j));
      sums.segment(off, b.size()) += b.transpose();
      off += b.size();
    }
  }
  col_means_ = sums / static_cast<double>(train_x.rows());
}

Eigen::RowVectorXd AdditiveSplineDesign::Row(
    const Eigen::RowVectorXd& x) const {
  Eigen::RowVectorXd row(total_cols_);
  row(0) = 1.0;
  Eigen::Index off = 1;
  for (std::size_t j = 0; j < bases_.size(); ++j) {
    const Eigen::VectorXd b = bases_[j].Evaluate(x(static_cast<Eigen::Index>(j)));
    row.segment(off, b.size()) =
        b.transpose() - col_means_.segment(off - 1, b.size());
    off += b.size();
  }
  return row;
}

Eigen::MatrixXd AdditiveSplineDesign::Rows(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), total_cols_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.row(i) = Row(x.row(i));
  }
  return out;
}

Eigen::MatrixXd AdditiveSplineDesign::Penalty() const {
  Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(total_cols_, total_cols_);
  Eigen::Index off = 1;
  for (const auto& basis : bases_) {
    const Eigen::MatrixXd block = basis.SecondDifferencePenalty();
    pen.block(off, off, block.rows(), block.cols()) = block;
    off += basis.size();
  }
  return pen;
}

}  // namespace cpce
