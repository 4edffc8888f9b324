#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "cpce/errors.hpp"

namespace cpce {

inline double Expit(double eta) {
  if (eta >= 0.0) {
    const double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double Logit(double p) { return std::log(p / (1.0 - p)); }

// Clamps a probability into [eps, 1 - eps]. Values may come from models
// that overshoot [0, 1]; clipping keeps inverse weights bounded.
inline double ClipProbability(double p, double eps) {
  if (!(eps > 0.0) || !(eps < 0.5)) {
    throw ConfigError("ClipProbability: eps must lie in (0, 0.5), got " +
                      std::to_string(eps));
  }
  if (std::isnan(p)) throw DataError("ClipProbability: probability is NaN");
  if (p < eps) return eps;
  if (p > 1.0 - eps) return 1.0 - eps;
  return p;
}

// Inverse standard-normal CDF via the Acklam rational approximation
// (relative error below 1.2e-9 on (0, 1)).
inline double NormalQuantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw ConfigError("NormalQuantile: p must lie in (0,1), got " +
                      std::to_string(p));
  }
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  const double phigh = 1.0 - plow;
  double x = 0.0;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement step tightens the approximation near the tails.
  const double e =
      0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) *
                   std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

// Formats a double with enough digits to round-trip exactly (%.17g).
inline std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace cpce
