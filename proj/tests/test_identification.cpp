// Tests for the identification layer: stratum shares, subset membership
// and propensities, arm-recentered scores, and the three pseudo-outcome
// constructions. Monte Carlo checks verify the defining conditional-mean
// identities at a fixed covariate point with exact plug-in values.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "cpce/errors.hpp"
#include "cpce/identification.hpp"
#include "cpce/rng.hpp"

using namespace cpce;

namespace {

// A generic interior point: no symmetry, all cells reachable.
PointNuisanceValues GenericPoint() {
  PointNuisanceValues v;
  v.pi = 0.55;
  v.p1 = 0.7;
  v.p0 = 0.35;
  v.mu11 = 1.8;
  v.mu10 = -0.6;
  v.mu01 = 0.9;
  v.mu00 = 0.4;
  return v;
}

double TrueShare(Stratum u, const PointNuisanceValues& v) {
  switch (u) {
    case Stratum::k00: return 1.0 - v.p1;
    case Stratum::k10: return v.p1 - v.p0;
    case Stratum::k11: return v.p0;
  }
  return 0.0;
}

double TrueContrast(Stratum u, const PointNuisanceValues& v) {
  switch (u) {
    case Stratum::k00: return v.mu10 - v.mu00;
    case Stratum::k10: return v.mu11 - v.mu00;
    case Stratum::k11: return v.mu11 - v.mu01;
  }
  return 0.0;
}

struct Draw {
  int z;
  int s;
  double y;
};

Draw SampleAt(const PointNuisanceValues& v, Rng& rng, double noise_sd) {
  Draw d;
  d.z = rng.Bernoulli(v.pi) ? 1 : 0;
  const double ps = d.z == 1 ? v.p1 : v.p0;
  d.s = rng.Bernoulli(ps) ? 1 : 0;
  const double mu = d.z == 1 ? (d.s == 1 ? v.mu11 : v.mu10)
                             : (d.s == 1 ? v.mu01 : v.mu00);
  d.y = mu + noise_sd * rng.Normal();
  return d;
}

struct Running {
  double sum = 0.0;
  double sumsq = 0.0;
  long n = 0;
  void Add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double Mean() const { return sum / static_cast<double>(n); }
  double Se() const {
    const double m = Mean();
    const double var = sumsq / static_cast<double>(n) - m * m;
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

}  // namespace

TEST_CASE("stratum shares from selection scores, with flooring semantics") {
  const PrincipalScores a = PrincipalScore(0.6, 0.2, 0.0, false);
  CHECK(a.e00 == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(a.e10 == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(a.e11 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_FALSE(a.floored);

  const PrincipalScores b = PrincipalScore(0.5, 0.5, 0.0, true);
  CHECK(b.e10 == 0.0);
  CHECK_FALSE(b.floored);

  // Strict mode rejects a violation beyond tolerance...
  CHECK_THROWS_AS(PrincipalScore(0.3, 0.6, 0.0, true), MonotonicityError);
  // ...but tolerates one inside it (the share is still floored).
  const PrincipalScores c = PrincipalScore(0.58, 0.6, 0.05, true);
  CHECK(c.floored);
  CHECK(c.e10 == 0.0);
  const double total = (1.0 - 0.58) + 0.6;
  CHECK(c.e00 == doctest::Approx((1.0 - 0.58) / total).epsilon(1e-15));
  CHECK(c.e11 == doctest::Approx(0.6 / total).epsilon(1e-15));
  CHECK(c.e00 + c.e10 + c.e11 == doctest::Approx(1.0).epsilon(1e-15));

  // Non-strict mode floors silently however large the violation.
  const PrincipalScores d = PrincipalScore(0.3, 0.6, 0.0, false);
  CHECK(d.floored);
  CHECK(d.e10 == 0.0);
  CHECK(d.e00 + d.e11 == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(PrincipalScore(1.2, 0.5, 0.0, false), DataError);
  CHECK_THROWS_AS(PrincipalScore(0.5, -0.1, 0.0, false), DataError);
  CHECK_THROWS_AS(PrincipalScore(0.5, 0.4, -1.0, false), ConfigError);
}

TEST_CASE("subset propensities match hand-computed values") {
  CHECK(SubsetPropensity(0.5, 0.6, 0.4, Stratum::k10) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(SubsetPropensity(0.5, 0.6, 0.2, Stratum::k10) ==
        doctest::Approx(0.4285714285714286).epsilon(1e-15));
  CHECK(SubsetPropensity(0.5, 0.6, 0.2, Stratum::k11) ==
        doctest::Approx(0.75).epsilon(1e-14));
  // 0.5*0.4 / (0.5*0.4 + 0.5*0.8) = 1/3.
  CHECK(SubsetPropensity(0.5, 0.6, 0.2, Stratum::k00) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(SubsetPropensity(0.0, 0.6, 0.2, Stratum::k10), DataError);
  CHECK_THROWS_AS(SubsetPropensity(1.0, 0.6, 0.2, Stratum::k10), DataError);
  // Zero-probability subset: pi*p1 = 0 and (1-pi)*p0 = 0.
  CHECK_THROWS_AS(SubsetPropensity(0.5, 0.0, 0.0, Stratum::k11),
                  OverlapError);
}

TEST_CASE("subset membership implements the three analysis subsets") {
  // 00-subset: unselected rows only.
  CHECK(InSubset(Stratum::k00, 0, 0));
  CHECK(InSubset(Stratum::k00, 1, 0));
  CHECK_FALSE(InSubset(Stratum::k00, 0, 1));
  CHECK_FALSE(InSubset(Stratum::k00, 1, 1));
  // responsive subset: rows with z == s.
  CHECK(InSubset(Stratum::k10, 0, 0));
  CHECK(InSubset(Stratum::k10, 1, 1));
  CHECK_FALSE(InSubset(Stratum::k10, 1, 0));
  CHECK_FALSE(InSubset(Stratum::k10, 0, 1));
  // 11-subset: selected rows only.
  CHECK(InSubset(Stratum::k11, 0, 1));
  CHECK(InSubset(Stratum::k11, 1, 1));
  CHECK_FALSE(InSubset(Stratum::k11, 0, 0));
  CHECK_FALSE(InSubset(Stratum::k11, 1, 0));
}

TEST_CASE("arm-recentered score: frozen values and the complement identity") {
  // Off-arm rows evaluate to the plug-in mean.
  CHECK(PsiScore(1, 0, 2.0, 0.5, 0.7) == 0.7);
  // On-arm rows add the inverse-probability-weighted residual.
  CHECK(PsiScore(1, 1, 2.0, 0.5, 0.7) ==
        doctest::Approx(0.7 + (2.0 - 0.7) / 0.5).epsilon(1e-15));
  CHECK_THROWS_AS(PsiScore(1, 1, 2.0, 0.0, 0.7), OverlapError);
  CHECK_THROWS_AS(PsiScore(1, 2, 2.0, 0.5, 0.7), ConfigError);

  // psi_{a, 1-S} == 1 - psi_{a, S} for every data configuration.
  Rng rng(55);
  for (int rep = 0; rep < 50; ++rep) {
    const int z = rng.Bernoulli(0.5) ? 1 : 0;
    const int a = rng.Bernoulli(0.5) ? 1 : 0;
    const int s = rng.Bernoulli(0.5) ? 1 : 0;
    const double prob_a = rng.Uniform(0.05, 0.95);
    const double ps = rng.Uniform(0.05, 0.95);
    const double direct = PsiScore(z, a, 1 - s, prob_a, 1.0 - ps);
    const double complement = 1.0 - PsiScore(z, a, s, prob_a, ps);
    CHECK(direct == doctest::Approx(complement).epsilon(1e-12));
  }
}

TEST_CASE("arm-recentered score has the stated mean under the sampling law") {
  const PointNuisanceValues v = GenericPoint();
  Rng rng(77001);
  const long n = 400000;
  Running exact, tilted;
  // Perturbed plug-ins for the tilted version.
  const double prob_tilde = 0.62;        // true arm-1 probability is 0.55
  const double cond_tilde = 1.1;         // plug-in mean of Y*S in arm 1
  const double cond_true = v.mu11 * v.p1;
  for (long i = 0; i < n; ++i) {
    const Draw d = SampleAt(v, rng, 0.5);
    const double f = d.y * d.s;
    exact.Add(PsiScore(d.z, 1, f, v.pi, cond_true));
    tilted.Add(PsiScore(d.z, 1, f, prob_tilde, cond_tilde));
  }
  // Exact plug-ins: the score is unbiased for E[f | arm 1].
  CHECK(std::abs(exact.Mean() - cond_true) < 4.0 * exact.Se());
  // Perturbed plug-ins: mean follows the tilt formula
  // P(a)/P~(a) * (E[f|a] - E~[f|a]) + E~[f|a].
  const double expected =
      v.pi / prob_tilde * (cond_true - cond_tilde) + cond_tilde;
  CHECK(std::abs(tilted.Mean() - expected) < 4.0 * tilted.Se());
}

TEST_CASE("influence pieces have the defining conditional means") {
  const PointNuisanceValues v = GenericPoint();
  Rng rng(77002);
  const long n = 600000;
  Running num[3], den[3];
  for (long i = 0; i < n; ++i) {
    const Draw d = SampleAt(v, rng, 0.5);
    for (int ui = 0; ui < 3; ++ui) {
      const Stratum u = static_cast<Stratum>(ui);
      const EifParts parts = EifComponentsAt(u, v, d.z, d.s, d.y);
      num[ui].Add(parts.phi1 - parts.phi0);
      den[ui].Add(parts.g);
    }
  }
  for (int ui = 0; ui < 3; ++ui) {
    const Stratum u = static_cast<Stratum>(ui);
    CAPTURE(StratumLabel(u));
    const double share = TrueShare(u, v);
    const double target = share * TrueContrast(u, v);
    CHECK(std::abs(num[ui].Mean() - target) < 4.0 * num[ui].Se());
    CHECK(std::abs(den[ui].Mean() - share) < 4.0 * den[ui].Se());
  }
}

TEST_CASE("subset pseudo-outcome is conditionally unbiased on its subset") {
  const PointNuisanceValues v = GenericPoint();
  Rng rng(77003);
  const long n = 600000;
  Running mean[3];
  for (long i = 0; i < n; ++i) {
    const Draw d = SampleAt(v, rng, 0.5);
    for (int ui = 0; ui < 3; ++ui) {
      const Stratum u = static_cast<Stratum>(ui);
      if (!InSubset(u, d.z, d.s)) continue;
      const double pi_s = SubsetPropensity(v.pi, v.p1, v.p0, u);
      mean[ui].Add(SubsetPseudoAt(u, v, pi_s, d.z, d.y));
    }
  }
  for (int ui = 0; ui < 3; ++ui) {
    const Stratum u = static_cast<Stratum>(ui);
    CAPTURE(StratumLabel(u));
    CHECK(mean[ui].n > 100000);
    CHECK(std::abs(mean[ui].Mean() - TrueContrast(u, v)) <
          4.0 * mean[ui].Se());
  }
  CHECK_THROWS_AS(SubsetPseudoAt(Stratum::k10, v, 0.0, 1, 1.0), OverlapError);
  CHECK_THROWS_AS(SubsetPseudoAt(Stratum::k10, v, 1.0, 1, 1.0), OverlapError);
}

TEST_CASE("one-step pseudo-outcome is unbiased for any pilot value") {
  const PointNuisanceValues v = GenericPoint();
  for (double tau_check : {0.0, 5.0, -2.5}) {
    CAPTURE(tau_check);
    Rng rng(77004);
    const long n = 400000;
    Running mean[3];
    for (long i = 0; i < n; ++i) {
      const Draw d = SampleAt(v, rng, 0.5);
      for (int ui = 0; ui < 3; ++ui) {
        const Stratum u = static_cast<Stratum>(ui);
        mean[ui].Add(OneStepPseudoAt(u, v, d.z, d.s, d.y, tau_check, 0.01));
      }
    }
    for (int ui = 0; ui < 3; ++ui) {
      const Stratum u = static_cast<Stratum>(ui);
      CAPTURE(StratumLabel(u));
      CHECK(std::abs(mean[ui].Mean() - TrueContrast(u, v)) <
            4.0 * mean[ui].Se());
    }
  }
}

TEST_CASE("stratum share flooring counts truncations") {
  PointNuisanceValues v = GenericPoint();
  int truncated = 0;
  CHECK(StratumShareFloored(Stratum::k00, v, 0.01, &truncated) ==
        doctest::Approx(1.0 - v.p1).epsilon(1e-15));
  CHECK(StratumShareFloored(Stratum::k11, v, 0.01, &truncated) ==
        doctest::Approx(v.p0).epsilon(1e-15));
  CHECK(StratumShareFloored(Stratum::k10, v, 0.01, &truncated) ==
        doctest::Approx(v.p1 - v.p0).epsilon(1e-15));
  CHECK(truncated == 0);

  v.p1 = 0.4;
  v.p0 = 0.398;  // raw share 0.002 below the floor
  CHECK(StratumShareFloored(Stratum::k10, v, 0.01, &truncated) == 0.01);
  CHECK(truncated == 1);
  v.p0 = 0.5;  // negative raw share also floors
  CHECK(StratumShareFloored(Stratum::k10, v, 0.01, &truncated) == 0.01);
  CHECK(truncated == 2);
  // Null counter is allowed.
  CHECK(StratumShareFloored(Stratum::k10, v, 0.01, nullptr) == 0.01);
}

TEST_CASE("factor normalization fixes the mean absolute factor at one") {
  const std::vector<double> a = HajekNormalize({1.0, 3.0});
  REQUIRE(a.size() == 2);
  CHECK(a[0] == 0.5);
  CHECK(a[1] == 1.5);

  const std::vector<double> b = HajekNormalize({-1.0, 3.0});
  CHECK(b[0] == -0.5);
  CHECK(b[1] == 1.5);

  const std::vector<double> c = HajekNormalize({-2.0, -6.0});
  CHECK(c[0] == -0.5);
  CHECK(c[1] == -1.5);

  CHECK(HajekNormalize({}).empty());
  CHECK_THROWS_AS(HajekNormalize({0.0, 0.0}), OverlapError);

  // Post-normalization the mean absolute factor is exactly one.
  const std::vector<double> d = HajekNormalize({0.2, -1.7, 3.1, -0.4});
  double mean_abs = 0.0;
  for (double f : d) mean_abs += std::abs(f);
  CHECK(mean_abs / 4.0 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("influence-piece scaling honors the factor rescalers") {
  const PointNuisanceValues v = GenericPoint();
  const HajekScale scale{0.7, 1.3};
  // On-arm z=1 rows scale the arm-1 residual by c1; plug-in part is fixed.
  const EifParts base = EifComponentsAt(Stratum::k11, v, 0, 1, 2.0);
  const EifParts scaled = EifComponentsAt(Stratum::k11, v, 0, 1, 2.0, scale);
  // phi0 for stratum 11 is psi_{0, YS}: the z=0 on-arm residual scales by c0.
  const double m = v.mu01 * v.p0;
  const double expect_base = (2.0 * 1 - m) / (1.0 - v.pi) + m;
  const double expect_scaled = 1.3 * (2.0 * 1 - m) / (1.0 - v.pi) + m;
  CHECK(base.phi0 == doctest::Approx(expect_base).epsilon(1e-14));
  CHECK(scaled.phi0 == doctest::Approx(expect_scaled).epsilon(1e-14));

  // The subset pseudo-outcome scales its inverse-probability factor too.
  const double pi_s = SubsetPropensity(v.pi, v.p1, v.p0, Stratum::k10);
  const double plain = SubsetPseudoAt(Stratum::k10, v, pi_s, 1, 2.0);
  const double adjusted = SubsetPseudoAt(Stratum::k10, v, pi_s, 1, 2.0, scale);
  const double contrast = v.mu11 - v.mu00;
  CHECK(plain == doctest::Approx((2.0 - v.mu11) / pi_s + contrast)
                     .epsilon(1e-14));
  CHECK(adjusted == doctest::Approx(0.7 * (2.0 - v.mu11) / pi_s + contrast)
                        .epsilon(1e-14));
}
