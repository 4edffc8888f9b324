#include "cpce/sim.hpp"

#include <cmath>

#include "cpce/math_util.hpp"
#include "cpce/rng.hpp"

namespace cpce {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// --- study1 ingredients -----------------------------------------------------

double S1PiLinear(const Eigen::RowVectorXd& x) {
  return Expit(-0.4 + 0.4 * x(0) + 0.4 * x(1) + 0.4 * x(2));
}
double S1EtaLinear(const Eigen::RowVectorXd& x) {
  return 0.4 * x(0) - 0.4 * x(1) + 0.4 * x(3) + 0.8;
}
double S1PiNonlinear(const Eigen::RowVectorXd& x) {
  return Expit(0.5 * std::sin(kTwoPi * x(0) * x(1)) +
               0.5 * (x(2) - 0.5) * (x(2) - 0.5));
}
double S1EtaNonlinear(const Eigen::RowVectorXd& x) {
  return 0.8 + (x(0) - 0.5) * (x(0) - 0.5) +
         0.6 * std::sin(kTwoPi * x(2) * x(3));
}
double BaselineLinear(const Eigen::RowVectorXd& x) {
  return x(0) - 0.4 * x(1) + x(2) + 0.5 * x(3);
}
double BaselineNonlinear(const Eigen::RowVectorXd& x) {
  return std::sin(kTwoPi * x(0) * x(1)) + (x(2) - 0.5) * (x(2) - 0.5) +
         (x(3) - 0.5) * (x(3) - 0.5);
}

// --- study2 ingredients -----------------------------------------------------

double S2Pi(const Eigen::RowVectorXd& x) {
  return Expit(std::sin(kTwoPi * x(0)) + (x(1) - 0.5));
}
double S2Eta(const Eigen::RowVectorXd& x) {
  return 0.8 + 0.3 * std::log1p(x(0)) + 0.3 * (x(1) - 0.5) -
         0.25 * (x(2) - 0.5) * (x(2) - 0.5);
}
double S2Baseline(const Eigen::RowVectorXd& x) {
  return std::sin(kTwoPi * x(0)) + 0.8 * std::log1p(3.0 * x(1)) +
         1.5 * std::max(x(2) - 0.3, 0.0) + (x(3) - 0.5) * (x(3) - 0.5);
}

// --- study3 ingredients -----------------------------------------------------

double S3PiRaw(const Eigen::RowVectorXd& x) {
  return Expit(3.2 * std::sin(kTwoPi * x(0) * x(1)) +
               2.6 * (x(2) - 0.5) * (x(2) - 0.5));
}

struct Study3Scores {
  double pi, p1, p0;
};

// Selection scores depend on the assignment score itself; the raw pair can
// violate p1 >= p0, so the difference is floored at zero symmetrically
// around the midpoint before clipping everything to [0.01, 0.99].
Study3Scores Study3At(const Eigen::RowVectorXd& x) {
  const double piv = S3PiRaw(x);
  const double base = 1.2 * (x(0) - 0.5) * (x(0) - 0.5) +
                      0.9 * std::sin(kTwoPi * x(2) * x(3));
  const double p1t = Expit(0.8 + base - 0.6 * (piv - 0.5));
  const double p0t = Expit(-0.8 - base - 1.5 * (piv - 0.5));
  const double mid = 0.5 * (p1t + p0t);
  const double gap = std::max(p1t - p0t, 0.0);
  Study3Scores out;
  out.pi = ClipProbability(piv, 0.01);
  out.p1 = ClipProbability(mid + 0.5 * gap, 0.01);
  out.p0 = ClipProbability(mid - 0.5 * gap, 0.01);
  return out;
}

// --- toy ingredients --------------------------------------------------------

double GyorfiCurve(double x) {
  if (x <= -0.5) return (x + 2.0) * (x + 2.0) / 2.0;
  if (x < 0.0) return x / 2.0 + 0.875;
  if (x <= 0.5) return -5.0 * (x - 0.2) * (x - 0.2) + 1.075;
  return x + 0.125;
}

PointFn Constant(double c) {
  return [c](const Eigen::RowVectorXd&) { return c; };
}

// Builds the four cell means from a baseline and the three stratum effect
// curves so that mu11 - mu00 is the responsive-stratum effect, mu10 - mu00
// the never-selected effect and mu11 - mu01 the always-selected effect.
void AttachOutcomes(TruthBundle* t, const PointFn& baseline) {
  const PointFn b = baseline;
  const PointFn t00 = t->tau00, t10 = t->tau10, t11 = t->tau11;
  t->mu00 = b;
  t->mu10 = [b, t00](const Eigen::RowVectorXd& x) { return b(x) + t00(x); };
  t->mu11 = [b, t10](const Eigen::RowVectorXd& x) { return b(x) + t10(x); };
  t->mu01 = [b, t10, t11](const Eigen::RowVectorXd& x) {
    return b(x) + t10(x) - t11(x);
  };
}

}  // namespace

const char* DgpLabel(DgpName name) {
  switch (name) {
    case DgpName::kToy: return "toy";
    case DgpName::kStudy1: return "study1";
    case DgpName::kStudy2: return "study2";
    case DgpName::kStudy2NonlinearTau: return "study2_nonlinear_tau";
    case DgpName::kStudy3: return "study3";
  }
  return "??";
}

DgpName ParseDgpName(const std::string& label) {
  if (label == "toy") return DgpName::kToy;
  if (label == "study1") return DgpName::kStudy1;
  if (label == "study2") return DgpName::kStudy2;
  if (label == "study2_nonlinear_tau") return DgpName::kStudy2NonlinearTau;
  if (label == "study3") return DgpName::kStudy3;
  throw ConfigError("unknown DGP '" + label +
                    "' (expected toy, study1, study2, study2_nonlinear_tau, "
                    "or study3)");
}

NuisanceBundle TruthBundle::AsNuisanceBundle() const {
  NuisanceBundle b;
  b.pi = pi;
  b.p1 = p1;
  b.p0 = p0;
  b.mu11 = mu11;
  b.mu10 = mu10;
  b.mu01 = mu01;
  b.mu00 = mu00;
  // True probabilities are already interior; keep the guard a no-op.
  b.clip_eps = 1e-12;
  return b;
}

TruthBundle MakeTruth(DgpName name, int scenario) {
  TruthBundle t;
  switch (name) {
    case DgpName::kToy: {
      t.dim = 1;
      t.pi = [](const Eigen::RowVectorXd& x) {
        return x(0) > 0.0 ? 0.75 : 0.25;
      };
      t.p1 = [](const Eigen::RowVectorXd& x) {
        return x(0) > 0.0 ? 0.55 : 0.35;
      };
      t.p0 = [](const Eigen::RowVectorXd& x) {
        return x(0) > 0.0 ? 0.45 : 0.65;
      };
      t.tau00 = Constant(0.0);
      t.tau10 = Constant(0.0);
      t.tau11 = Constant(0.0);
      const PointFn g = [](const Eigen::RowVectorXd& x) {
        return GyorfiCurve(x(0));
      };
      AttachOutcomes(&t, g);
      return t;
    }
    case DgpName::kStudy1: {
      if (scenario < 1 || scenario > 4) {
        throw ConfigError("study1 scenario must be 1..4, got " +
                          std::to_string(scenario));
      }
      t.dim = 4;
      const bool linear_scores = scenario == 1 || scenario == 2;
      const bool linear_baseline = scenario == 1 || scenario == 3;
      if (linear_scores) {
        t.pi = S1PiLinear;
        t.p1 = [](const Eigen::RowVectorXd& x) { return Expit(S1EtaLinear(x)); };
        t.p0 = [](const Eigen::RowVectorXd& x) {
          return Expit(-S1EtaLinear(x));
        };
      } else {
        t.pi = S1PiNonlinear;
        t.p1 = [](const Eigen::RowVectorXd& x) {
          return Expit(S1EtaNonlinear(x));
        };
        t.p0 = [](const Eigen::RowVectorXd& x) {
          return Expit(-S1EtaNonlinear(x));
        };
      }
      const PointFn tau = [](const Eigen::RowVectorXd& x) {
        return 0.5 * x(0);
      };
      t.tau00 = tau;
      t.tau10 = tau;
      t.tau11 = tau;
      AttachOutcomes(&t,
                     linear_baseline ? PointFn(BaselineLinear)
                                     : PointFn(BaselineNonlinear));
      return t;
    }
    case DgpName::kStudy2:
    case DgpName::kStudy2NonlinearTau: {
      t.dim = 4;
      t.pi = S2Pi;
      t.p1 = [](const Eigen::RowVectorXd& x) { return Expit(S2Eta(x)); };
      t.p0 = [](const Eigen::RowVectorXd& x) { return Expit(-S2Eta(x)); };
      if (name == DgpName::kStudy2) {
        const PointFn tau = [](const Eigen::RowVectorXd& x) {
          return 0.5 * x(0);
        };
        t.tau00 = tau;
        t.tau10 = tau;
        t.tau11 = tau;
      } else {
        t.tau00 = [](const Eigen::RowVectorXd& x) {
          return 0.5 * std::sin(kTwoPi * x(0)) +
                 0.3 * (x(1) - 0.5) * (x(1) - 0.5);
        };
        t.tau10 = [](const Eigen::RowVectorXd& x) {
          return 0.4 * (x(0) - 0.5) * (x(0) - 0.5) +
                 0.6 * std::cos(kTwoPi * x(1));
        };
        t.tau11 = [](const Eigen::RowVectorXd& x) {
          return -0.5 * std::sin(kTwoPi * x(0)) +
                 0.5 * (x(2) - 0.5) * (x(2) - 0.5);
        };
      }
      AttachOutcomes(&t, S2Baseline);
      return t;
    }
    case DgpName::kStudy3: {
      t.dim = 4;
      t.pi = [](const Eigen::RowVectorXd& x) { return Study3At(x).pi; };
      t.p1 = [](const Eigen::RowVectorXd& x) { return Study3At(x).p1; };
      t.p0 = [](const Eigen::RowVectorXd& x) { return Study3At(x).p0; };
      const PointFn tau = [](const Eigen::RowVectorXd& x) {
        return 0.5 * x(0);
      };
      t.tau00 = tau;
      t.tau10 = tau;
      t.tau11 = tau;
      AttachOutcomes(&t, BaselineLinear);
      return t;
    }
  }
  throw ConfigError("unknown DGP");
}

Eigen::MatrixXd SampleCovariates(DgpName name, Index m, std::uint64_t seed) {
  if (m < 1) throw ConfigError("covariate sample size must be positive");
  Rng gen(MixSeed(seed, 0xC0FAULL));
  if (name == DgpName::kToy) {
    Eigen::MatrixXd x(m, 1);
    for (Index i = 0; i < m; ++i) x(i, 0) = gen.Uniform(-1.0, 1.0);
    return x;
  }
  Eigen::MatrixXd x(m, 4);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = gen.Uniform();
  }
  return x;
}

SampleTable Generate(const DgpSpec& spec) {
  if (spec.n < 1) throw ConfigError("sample size must be positive");
  if (spec.noise_sd < 0.0) throw ConfigError("noise_sd must be >= 0");
  const TruthBundle truth = MakeTruth(spec.name, spec.scenario);

  SampleTable t;
  t.x = SampleCovariates(spec.name, spec.n, spec.seed);
  t.y.resize(spec.n);
  t.s.resize(spec.n);
  t.z.resize(spec.n);
  Rng assign(MixSeed(spec.seed, 2));
  Rng select(MixSeed(spec.seed, 3));
  Rng noise(MixSeed(spec.seed, 4));
  for (Index i = 0; i < spec.n; ++i) {
    const Eigen::RowVectorXd xi = t.x.row(i);
    const int z = assign.Bernoulli(truth.pi(xi)) ? 1 : 0;
    const double pz = z == 1 ? truth.p1(xi) : truth.p0(xi);
    const int s = select.Bernoulli(pz) ? 1 : 0;
    const double mu = z == 1 ? (s == 1 ? truth.mu11(xi) : truth.mu10(xi))
                             : (s == 1 ? truth.mu01(xi) : truth.mu00(xi));
    t.z(i) = z;
    t.s(i) = s;
    t.y(i) = mu + spec.noise_sd * noise.Normal();
  }
  return t;
}

}  // namespace cpce
