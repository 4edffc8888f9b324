#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <optional>
#include <vector>

#include "cpce/errors.hpp"
#include "cpce/splines.hpp"

namespace cpce {

// ---------------------------------------------------------------------------
// Probability models P(label = 1 | x).
// ---------------------------------------------------------------------------

enum class ProbModelKind { kLogisticLinear, kLogisticAdditiveSpline };

struct ProbModelConfig {
  ProbModelKind kind = ProbModelKind::kLogisticLinear;
  double clip_eps = 0.01;   // predictions clamped to [eps, 1-eps]
  int max_iter = 100;
  double tol = 1e-8;        // on max |score| / n
  int spline_interior_knots = 8;
  // Fixed roughness penalty for the spline logit, used only when
  // spline_lambda_grid is empty.
  double spline_lambda = 1.0;
  // Candidate roughness penalties; the fit keeps the minimizer of a
  // working-model generalized cross-validation score.
  std::vector<double> spline_lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1,
                                            1.0,  10.0, 100.0, 1000.0};
};

class ProbModel {
 public:
  double ProbAt(const Eigen::RowVectorXd& x) const;

  // Linear predictor coefficients in the model's own design basis.
  const Eigen::VectorXd& coefficients() const { return beta_; }

 private:
  friend ProbModel FitLogistic(const Eigen::MatrixXd&, const Eigen::VectorXi&,
                               const ProbModelConfig&);
  ProbModelKind kind_ = ProbModelKind::kLogisticLinear;
  double clip_eps_ = 0.01;
  Eigen::VectorXd beta_;
  AdditiveSplineDesign design_;  // spline kind only
};

// Fits a logistic model by iteratively reweighted least squares. Throws
// DegenerateLabelsError when all labels agree and ConvergenceError when
// the score does not reach tolerance within the iteration budget.
ProbModel FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                      const ProbModelConfig& cfg);

// ---------------------------------------------------------------------------
// Regression smoothers. Every kind is a linear smoother: the prediction at
// any query point is an inner product of retrievable weights with the
// training responses.
// ---------------------------------------------------------------------------

enum class SmootherKind {
  kNadarayaWatson,
  kLocalLinear,
  kOlsLinear,
  kAdditiveSpline
};

struct SmootherConfig {
  SmootherKind kind = SmootherKind::kLocalLinear;
  // Per-coordinate kernel bandwidths; defaults to the Silverman rule.
  std::optional<Eigen::VectorXd> bandwidths;
  // Leave-one-out bandwidth selection over multiplicative factors applied
  // to the base bandwidth (kernel kinds only).
  bool cv_bandwidth = false;
  std::vector<double> cv_factors = {0.5, 0.75, 1.0, 1.5, 2.0};
  int spline_interior_knots = 8;
  std::vector<double> spline_lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1,
                                            1.0,  10.0, 100.0, 1000.0};
};

struct WeightDiagnostics {
  double abs_weight_sum = 0.0;  // sum_i |w_i(x)|
  double tail_mass = 0.0;       // sum of |w_i(x)| over ||x_i - x|| > delta
};

class Smoother {
 public:
  double PredictAt(const Eigen::RowVectorXd& x) const;

  // Weights w(x) with PredictAt(x) == w(x) . train_y, length n_train.
  Eigen::VectorXd WeightsAt(const Eigen::RowVectorXd& x) const;

  WeightDiagnostics DiagnosticsAt(const Eigen::RowVectorXd& x,
                                  double delta) const;

  SmootherKind kind() const { return kind_; }
  const Eigen::MatrixXd& train_x() const { return train_x_; }
  const Eigen::VectorXd& train_y() const { return train_y_; }
  const Eigen::VectorXd& bandwidths() const { return bandwidths_; }

 private:
  friend Smoother FitSmoother(const Eigen::MatrixXd&, const Eigen::VectorXd&,
                              const SmootherConfig&);
  SmootherKind kind_ = SmootherKind::kLocalLinear;
  bool constant_fallback_ = false;  // single training row: predict its mean
  Eigen::MatrixXd train_x_;
  Eigen::VectorXd train_y_;
  Eigen::VectorXd bandwidths_;

  // OLS state.
  Eigen::VectorXd ols_beta_;
  Eigen::LDLT<Eigen::MatrixXd> ols_factor_;

  // Additive-spline state.
  AdditiveSplineDesign design_;
  Eigen::VectorXd spline_beta_;
  Eigen::LDLT<Eigen::MatrixXd> spline_factor_;
  Eigen::MatrixXd spline_design_rows_;

  Eigen::VectorXd KernelWeightsAt(const Eigen::RowVectorXd& x) const;
};

Smoother FitSmoother(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const SmootherConfig& cfg);

// Rule-of-thumb product-kernel bandwidths:
// h_j = sd_j * (4 / (d + 2))^(1/(d+4)) * n^(-1/(d+4)); coordinates with
// zero spread get bandwidth 1 (they contribute zero distance anyway).
Eigen::VectorXd SilvermanBandwidths(const Eigen::MatrixXd& x);

}  // namespace cpce
