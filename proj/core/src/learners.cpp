#include "cpce/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpce/math_util.hpp"

namespace cpce {
namespace {

void CheckTrainingData(const Eigen::MatrixXd& x, Eigen::Index ny) {
  if (x.rows() < 1) throw SchemaError("fit requires at least one row");
  if (x.cols() < 1) throw SchemaError("fit requires at least one covariate");
  if (ny != x.rows()) {
    throw SchemaError("response length " + std::to_string(ny) +
                      " does not match design rows " +
                      std::to_string(x.rows()));
  }
  if (!x.allFinite()) throw DataError("non-finite covariate in training data");
}

// Caps the interior-knot count so the additive design keeps strictly fewer
// columns than half the training rows (one intercept plus d blocks of
// k + 4 cubic B-splines). Without the cap, generalized cross-validation on
// small cells can drift into near-interpolation.
int CappedInteriorKnots(int requested, Eigen::Index n, Eigen::Index d) {
  const double budget =
      (0.5 * static_cast<double>(n) - 1.0) / static_cast<double>(d) - 4.0;
  const int cap = budget > 0.0 ? static_cast<int>(budget) : 0;
  return std::max(0, std::min(requested, cap));
}

Eigen::MatrixXd WithIntercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g(x.rows(), x.cols() + 1);
  g.col(0).setOnes();
  g.rightCols(x.cols()) = x;
  return g;
}

// Penalized IRLS for logistic regression on an arbitrary design matrix.
Eigen::VectorXd IrlsLogit(const Eigen::MatrixXd& g, const Eigen::VectorXd& y,
                          const Eigen::MatrixXd& penalty, int max_iter,
                          double tol) {
  const Eigen::Index n = g.rows(), p = g.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const double ridge = 1e-10 * (g.squaredNorm() / static_cast<double>(p) + 1.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd eta = g * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      eta(i) = std::min(30.0, std::max(-30.0, eta(i)));
    }
    Eigen::VectorXd prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = Expit(eta(i));
      w(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-10);
    }
    Eigen::VectorXd grad = g.transpose() * (y - prob) - penalty * beta;
    if (grad.cwiseAbs().maxCoeff() / static_cast<double>(n) <= tol) {
      return beta;
    }
    Eigen::MatrixXd h = g.transpose() * w.asDiagonal() * g + penalty;
    h.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) {
      throw ConvergenceError("logistic fit: normal matrix factorization failed");
    }
    beta += ldlt.solve(grad);
    if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > 1e6) {
      throw ConvergenceError(
          "logistic fit diverged (possibly separable labels)");
    }
  }
  throw ConvergenceError("logistic fit did not converge in " +
                         std::to_string(max_iter) + " iterations");
}

// Roughness selection for the spline logit by K-fold cross-validated
// Bernoulli deviance: rows are assigned to folds round-robin, each candidate
// penalty is refit with every fold held out in turn, and the candidate with
// the smallest held-out deviance is refit on all rows. Candidates that
// diverge or produce a single-class training part are dropped; if every
// candidate drops, the heaviest penalty is fit on all rows as a fallback.
Eigen::VectorXd CvSplineLogit(const Eigen::MatrixXd& g,
                              const Eigen::VectorXd& y,
                              const Eigen::MatrixXd& penalty,
                              const ProbModelConfig& cfg) {
  const Eigen::Index n = g.rows();
  const int folds = static_cast<int>(std::min<Eigen::Index>(5, n));
  std::vector<std::vector<Eigen::Index>> hold(
      static_cast<std::size_t>(folds));
  for (Eigen::Index i = 0; i < n; ++i) {
    hold[static_cast<std::size_t>(i % folds)].push_back(i);
  }

  double best_dev = std::numeric_limits<double>::infinity();
  double best_lambda = std::numeric_limits<double>::quiet_NaN();
  for (double lambda : cfg.spline_lambda_grid) {
    if (!(lambda >= 0.0)) throw ConfigError("spline lambda must be >= 0");
    double dev = 0.0;
    bool ok = true;
    for (int f = 0; f < folds && ok; ++f) {
      const std::size_t n_out = hold[static_cast<std::size_t>(f)].size();
      Eigen::MatrixXd g_in(n - static_cast<Eigen::Index>(n_out), g.cols());
      Eigen::VectorXd y_in(g_in.rows());
      Eigen::Index r = 0;
      double ones = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i % folds == f) continue;
        g_in.row(r) = g.row(i);
        y_in(r) = y(i);
        ones += y(i);
        ++r;
      }
      if (ones == 0.0 || ones == static_cast<double>(r)) {
        ok = false;
        break;
      }
      Eigen::VectorXd beta;
      try {
        beta = IrlsLogit(g_in, y_in, lambda * penalty, cfg.max_iter, cfg.tol);
      } catch (const ConvergenceError&) {
        ok = false;
        break;
      }
      for (Eigen::Index i : hold[static_cast<std::size_t>(f)]) {
        const double eta =
            std::min(30.0, std::max(-30.0, g.row(i).dot(beta)));
        const double prob = Expit(eta);
        dev -= 2.0 * (y(i) * std::log(std::max(prob, 1e-12)) +
                      (1.0 - y(i)) * std::log(std::max(1.0 - prob, 1e-12)));
      }
    }
    if (ok && dev < best_dev) {
      best_dev = dev;
      best_lambda = lambda;
    }
  }
  if (!(best_lambda >= 0.0)) {
    best_lambda = *std::max_element(cfg.spline_lambda_grid.begin(),
                                    cfg.spline_lambda_grid.end());
  }
  return IrlsLogit(g, y, best_lambda * penalty, cfg.max_iter, cfg.tol);
}

}  // namespace

double ProbModel::ProbAt(const Eigen::RowVectorXd& x) const {
  double eta = 0.0;
  if (kind_ == ProbModelKind::kLogisticLinear) {
    if (x.size() + 1 != beta_.size()) {
      throw SchemaError("ProbAt: query dimension mismatch");
    }
    eta = beta_(0) + x * beta_.tail(beta_.size() - 1);
  } else {
    eta = design_.Row(x) * beta_;
  }
  return ClipProbability(Expit(eta), clip_eps_);
}

ProbModel FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                      const ProbModelConfig& cfg) {
  CheckTrainingData(x, labels.size());
  Eigen::Index ones = 0;
  Eigen::VectorXd y(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0 && labels(i) != 1) {
      throw DataError("logistic fit: labels must be 0 or 1");
    }
    y(i) = labels(i);
    ones += labels(i);
  }
  if (ones == 0 || ones == labels.size()) {
    throw DegenerateLabelsError(
        "logistic fit: all labels are " +
        std::to_string(ones == 0 ? 0 : 1));
  }

  ProbModel model;
  model.kind_ = cfg.kind;
  model.clip_eps_ = cfg.clip_eps;
  if (cfg.kind == ProbModelKind::kLogisticLinear) {
    const Eigen::MatrixXd g = WithIntercept(x);
    const Eigen::MatrixXd no_penalty =
        Eigen::MatrixXd::Zero(g.cols(), g.cols());
    model.beta_ = IrlsLogit(g, y, no_penalty, cfg.max_iter, cfg.tol);
  } else {
    model.design_ = AdditiveSplineDesign(
        x, CappedInteriorKnots(cfg.spline_interior_knots, x.rows(), x.cols()));
    const Eigen::MatrixXd g = model.design_.Rows(x);
    const Eigen::MatrixXd penalty = model.design_.Penalty();
    if (cfg.spline_lambda_grid.empty()) {
      model.beta_ = IrlsLogit(g, y, cfg.spline_lambda * penalty,
                              cfg.max_iter, cfg.tol);
    } else {
      model.beta_ = CvSplineLogit(g, y, penalty, cfg);
    }
  }
  return model;
}

Eigen::VectorXd SilvermanBandwidths(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd h(d);
  const double expo = 1.0 / (static_cast<double>(d) + 4.0);
  const double factor = std::pow(4.0 / (static_cast<double>(d) + 2.0), expo) *
                        std::pow(static_cast<double>(n), -expo);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = x.col(j).mean();
    const double var =
        (x.col(j).array() - mean).square().sum() /
        std::max<double>(1.0, static_cast<double>(n - 1));
    const double sd = std::sqrt(var);
    h(j) = sd > 0.0 ? sd * factor : 1.0;
  }
  return h;
}

Eigen::VectorXd Smoother::KernelWeightsAt(const Eigen::RowVectorXd& q) const {
  const Eigen::Index n = train_x_.rows(), d = train_x_.cols();
  Eigen::VectorXd sqdist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double u = (train_x_(i, j) - q(j)) / bandwidths_(j);
      acc += u * u;
    }
    sqdist(i) = acc;
  }
  // Shift by the minimum before exponentiating so at least one kernel
  // value is exactly 1 regardless of distance scale.
  const double m = sqdist.minCoeff();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i) = std::exp(-0.5 * (sqdist(i) - m));
  }
  return k;
}

double Smoother::PredictAt(const Eigen::RowVectorXd& x) const {
  if (x.size() != train_x_.cols()) {
    throw SchemaError("PredictAt: query dimension mismatch");
  }
  if (constant_fallback_) return train_y_.mean();
  switch (kind_) {
    case SmootherKind::kNadarayaWatson:
    case SmootherKind::kLocalLinear:
      return WeightsAt(x).dot(train_y_);
    case SmootherKind::kOlsLinear: {
      Eigen::RowVectorXd row(x.size() + 1);
      row(0) = 1.0;
      row.tail(x.size()) = x;
      return row * ols_beta_;
    }
    case SmootherKind::kAdditiveSpline:
      return design_.Row(x) * spline_beta_;
  }
  throw UnsupportedError("unknown smoother kind");
}

Eigen::VectorXd Smoother::WeightsAt(const Eigen::RowVectorXd& x) const {
  if (x.size() != train_x_.cols()) {
    throw SchemaError("WeightsAt: query dimension mismatch");
  }
  const Eigen::Index n = train_x_.rows();
  if (constant_fallback_) {
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  }
  switch (kind_) {
    case SmootherKind::kNadarayaWatson: {
      Eigen::VectorXd k = KernelWeightsAt(x);
      const double total = k.sum();
      if (!(total > 0.0)) {
        throw OverlapError("kernel weights sum to zero at query point");
      }
      return k / total;
    }
    case SmootherKind::kLocalLinear: {
      const Eigen::Index d = train_x_.cols();
      const Eigen::VectorXd k = KernelWeightsAt(x);
      Eigen::MatrixXd centered(n, d + 1);
      centered.col(0).setOnes();
      for (Eigen::Index i = 0; i < n; ++i) {
        centered.row(i).tail(d) = train_x_.row(i) - x;
      }
      Eigen::MatrixXd xtw = centered.transpose() * k.asDiagonal();
      Eigen::MatrixXd m = xtw * centered;
      m.diagonal().array() += 1e-10 * (m.trace() / (double)(d + 1) + 1.0);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
      Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d + 1);
      e1(0) = 1.0;
      return xtw.transpose() * ldlt.solve(e1);
    }
    case SmootherKind::kOlsLinear: {
      Eigen::RowVectorXd row(x.size() + 1);
      row(0) = 1.0;
      row.tail(x.size()) = x;
      const Eigen::VectorXd v = ols_factor_.solve(row.transpose());
      Eigen::MatrixXd g = WithIntercept(train_x_);
      return g * v;
    }
    case SmootherKind::kAdditiveSpline: {
      const Eigen::RowVectorXd row = design_.Row(x);
      const Eigen::VectorXd v = spline_factor_.solve(row.transpose());
      return spline_design_rows_ * v;
    }
  }
  throw UnsupportedError("unknown smoother kind");
}

WeightDiagnostics Smoother::DiagnosticsAt(const Eigen::RowVectorXd& x,
                                          double delta) const {
  const Eigen::VectorXd w = WeightsAt(x);
  WeightDiagnostics diag;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double aw = std::abs(w(i));
    diag.abs_weight_sum += aw;
    if ((train_x_.row(i) - x).norm() > delta) diag.tail_mass += aw;
  }
  return diag;
}

namespace {

// Leave-one-out mean squared error for a fitted linear smoother using the
// hat-diagonal shortcut (y_i - yhat_i) / (1 - h_ii).
double LeaveOneOutMse(const Smoother& s) {
  const Eigen::MatrixXd& x = s.train_x();
  const Eigen::VectorXd& y = s.train_y();
  const Eigen::Index n = x.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd w = s.WeightsAt(x.row(i));
    const double pred = w.dot(y);
    const double hii = std::min(w(i), 1.0 - 1e-12);
    const double loo = (y(i) - pred) / (1.0 - hii);
    acc += loo * loo;
  }
  return acc / static_cast<double>(n);
}

}  // namespace

Smoother FitSmoother(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const SmootherConfig& cfg) {
  CheckTrainingData(x, y.size());
  if (!y.allFinite()) throw DataError("non-finite response in training data");

  Smoother s;
  s.kind_ = cfg.kind;
  s.train_x_ = x;
  s.train_y_ = y;
  if (x.rows() == 1) {
    s.constant_fallback_ = true;
    s.bandwidths_ = Eigen::VectorXd::Ones(x.cols());
    return s;
  }

  const bool kernel_kind = cfg.kind == SmootherKind::kNadarayaWatson ||
                           cfg.kind == SmootherKind::kLocalLinear;
  if (kernel_kind) {
    Eigen::VectorXd base =
        cfg.bandwidths ? *cfg.bandwidths : SilvermanBandwidths(x);
    if (base.size() != x.cols()) {
      throw ConfigError("bandwidth vector length must equal covariate count");
    }
    for (Eigen::Index j = 0; j < base.size(); ++j) {
      if (!(base(j) > 0.0)) {
        throw ConfigError("bandwidths must be positive");
      }
    }
    s.bandwidths_ = base;
    if (cfg.cv_bandwidth) {
      if (cfg.cv_factors.empty()) {
        throw ConfigError("cv_bandwidth requires a non-empty factor grid");
      }
      double best_mse = std::numeric_limits<double>::infinity();
      Eigen::VectorXd best = base;
      for (double f : cfg.cv_factors) {
        if (!(f > 0.0)) throw ConfigError("cv factors must be positive");
        s.bandwidths_ = base * f;
        const double mse = LeaveOneOutMse(s);
        if (mse < best_mse) {
          best_mse = mse;
          best = s.bandwidths_;
        }
      }
      s.bandwidths_ = best;
    }
    return s;
  }

  s.bandwidths_ = Eigen::VectorXd::Ones(x.cols());
  if (cfg.kind == SmootherKind::kOlsLinear) {
    const Eigen::MatrixXd g = WithIntercept(x);
    Eigen::MatrixXd m = g.transpose() * g;
    m.diagonal().array() += 1e-10 * (m.trace() / (double)g.cols() + 1.0);
    s.ols_factor_ = Eigen::LDLT<Eigen::MatrixXd>(m);
    s.ols_beta_ = s.ols_factor_.solve(g.transpose() * y);
    return s;
  }

  if (cfg.kind != SmootherKind::kAdditiveSpline) {
    throw UnsupportedError("unknown smoother kind");
  }
  if (cfg.spline_lambda_grid.empty()) {
    throw ConfigError("spline lambda grid must be non-empty");
  }
  s.design_ = AdditiveSplineDesign(
      x, CappedInteriorKnots(cfg.spline_interior_knots, x.rows(), x.cols()));
  const Eigen::MatrixXd g = s.design_.Rows(x);
  const Eigen::MatrixXd penalty = s.design_.Penalty();
  const Eigen::MatrixXd gtg = g.transpose() * g;
  const Eigen::VectorXd gty = g.transpose() * y;
  const double ridge =
      1e-8 * (gtg.trace() / static_cast<double>(g.cols()) + 1.0);
  const double n = static_cast<double>(x.rows());

  double best_gcv = std::numeric_limits<double>::infinity();
  double best_lambda = *std::max_element(cfg.spline_lambda_grid.begin(),
                                         cfg.spline_lambda_grid.end());
  for (double lambda : cfg.spline_lambda_grid) {
    if (!(lambda >= 0.0)) throw ConfigError("spline lambda must be >= 0");
    Eigen::MatrixXd a = gtg + lambda * penalty;
    a.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) continue;
    const Eigen::VectorXd beta = ldlt.solve(gty);
    const double rss = (y - g * beta).squaredNorm();
    const double df = ldlt.solve(gtg).trace();
    if (df > 0.9 * n) continue;  // degenerate fit
    const double denom = std::max(n - df, 1.0);
    const double gcv = n * rss / (denom * denom);
    if (gcv < best_gcv) {
      best_gcv = gcv;
      best_lambda = lambda;
    }
  }
  Eigen::MatrixXd a = gtg + best_lambda * penalty;
  a.diagonal().array() += ridge;
  s.spline_factor_ = Eigen::LDLT<Eigen::MatrixXd>(a);
  s.spline_beta_ = s.spline_factor_.solve(gty);
  s.spline_design_rows_ = g;
  return s;
}

}  // namespace cpce
