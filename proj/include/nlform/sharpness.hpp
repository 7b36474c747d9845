#pragma once

// Negative results and rates: radial ramp families whose variance/energy
// ratio grows when an inequality fails, log-log slope fits against the
// analytic exponents, the super-Poincare rate function beta(r), and
// exponential/stretched moment scans.

#include <Eigen/Dense>

#include "nlform/discretization.hpp"
#include "nlform/spectral.hpp"

namespace nlform {

struct FamilyExceedsGrid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct WeightNotDiverging : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RampKind {
  InnerRamp,  // 0 on |x| <= n, 1 on |x| > 2n
  OuterRamp,  // 0 on |x| <= 3n, 1 on |x| > 4n
};

inline const char* to_string(RampKind k) {
  return k == RampKind::InnerRamp ? "inner_ramp" : "outer_ramp";
}

inline double ramp_value(RampKind kind, int n, double r) {
  double lo = kind == RampKind::InnerRamp ? double(n) : 3.0 * n;
  double hi = kind == RampKind::InnerRamp ? 2.0 * double(n) : 4.0 * n;
  if (r <= lo) return 0.0;
  if (r >= hi) return 1.0;
  double t = (r - lo) / (hi - lo);
  return t * t * (3.0 - 2.0 * t);  // cubic smoothstep, |grad| <= 1.5/(hi-lo)
}

struct TestFunctionFamily {
  RampKind kind;
  int n;
  double gradientBound;  // 2/n for both families
  Eigen::VectorXd values;
};

inline TestFunctionFamily build_family(RampKind kind, int n, const Grid& grid) {
  if (n < 1) throw BadParameter("ramp index n must be >= 1");
  double outer = kind == RampKind::InnerRamp ? 2.0 * n : 4.0 * n;
  if (outer >= grid.radius)
    throw FamilyExceedsGrid("ramp transition extends beyond the grid radius");
  TestFunctionFamily fam;
  fam.kind = kind;
  fam.n = n;
  fam.gradientBound = 2.0 / n;
  fam.values.resize(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    fam.values[i] = ramp_value(kind, n, norm(grid.nodes[i], grid.dimension));
  return fam;
}

struct SlopePoint {
  int n;
  double ratio;
  double variance;
  double formValue;
};

struct SlopeFit {
  std::vector<SlopePoint> pairs;
  double slope = 0.0;
  double intercept = 0.0;
  double rSquared = 0.0;
};

namespace detail {

inline void fit_loglog(SlopeFit& fit) {
  int m = static_cast<int>(fit.pairs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : fit.pairs) {
    double x = std::log(double(p.n)), y = std::log(p.ratio);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double den = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ssTot = syy - sy * sy / m;
  double ssRes = 0.0;
  for (const auto& p : fit.pairs) {
    double x = std::log(double(p.n)), y = std::log(p.ratio);
    double e = y - (fit.slope * x + fit.intercept);
    ssRes += e * e;
  }
  fit.rSquared = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
}

}  // namespace detail

struct GridPolicy {
  double spacing = 0.25;
  double radiusFactor = 8.0;  // grid radius = radiusFactor * n
  int threads = 1;
};

// ratio(n) = weighted_variance(f_n) / form_value(f_n) over a geometric n
// sequence, each on an auto-enlarged grid of fixed spacing; the fitted
// log-log slope is the measured failure exponent (positive slope = the
// weighted inequality fails on the proxy).
inline SlopeFit failure_slope(const PotentialSpec& V, const KernelProfile& kernel,
                              const WeightFunction& weight, RampKind kind,
                              const std::vector<int>& nSequence, const GridPolicy& policy = {},
                              KernelKind formKind = KernelKind::RhoForm) {
  if (nSequence.size() < 4) throw BadParameter("slope fit needs at least 4 ramp indices");
  SlopeFit fit;
  for (int n : nSequence) {
    double R = policy.radiusFactor * n;
    int npa = static_cast<int>(std::lround(2.0 * R / policy.spacing)) + 1;
    Grid grid = make_grid(V.dimension(), R, npa);
    DiscreteForm form =
        assemble(V, kernel, weight, grid, formKind, {1e-8, policy.threads});
    TestFunctionFamily fam = build_family(kind, n, grid);
    double var = weighted_variance(form, fam.values);
    double fv = form_value(form, fam.values);
    fit.pairs.push_back({n, var / fv, var, fv});
  }
  detail::fit_loglog(fit);
  return fit;
}

enum class OptimalityVerdict { Fails, DoesNotFail };

inline const char* to_string(OptimalityVerdict v) {
  return v == OptimalityVerdict::Fails ? "fails" : "does_not_fail";
}

struct OptimalityProbe {
  SlopeFit fit;
  OptimalityVerdict verdict;
};

// Replace the implied weight by omega*; ratios that grow (slope above
// slopeTol) reproduce the optimality statement on the proxy.
inline OptimalityProbe weight_optimality_probe(const PotentialSpec& V,
                                               const KernelProfile& kernel,
                                               const WeightFunction& omegaStar,
                                               const std::vector<int>& nSequence,
                                               const GridPolicy& policy = {},
                                               double slopeTol = 0.1) {
  SlopeFit fit = failure_slope(V, kernel, omegaStar, RampKind::InnerRamp, nSequence, policy);
  return {fit, fit.slope > slopeTol ? OptimalityVerdict::Fails : OptimalityVerdict::DoesNotFail};
}

struct BetaSample {
  double r;
  double beta;           // nested (t,s) grid search
  double betaClosedForm; // t = kappa(4 C0 / r), s = r/2
};

struct SuperPoincareProfile {
  std::function<double(double)> hLower;        // h(t) = inf_{|x|<=t} e^V
  std::function<double(double)> HUpper;        // H(t) = sup_{|x|<=t} e^V
  std::function<double(double)> kappaInverse;  // kappa(r)
  std::vector<BetaSample> betaSamples;
  double c0 = 1.0;
};

namespace detail {

// inf_{|x| >= t} omega on a geometric sample grid (omega tends to infinity,
// so the infimum is attained early)
inline double tail_inf_weight(const WeightFunction& w, double t, double tMax) {
  double best = w.log_value(t);
  double r = std::max(t, 1e-9);
  while (r < tMax) {
    best = std::min(best, w.log_value(r));
    r *= 1.05;
  }
  return std::exp(best);
}

}  // namespace detail

// Super-Poincare rate from a weighted inequality with constant C0:
//   beta(r) = inf { H(t)^{2+d/a} h(t)^{-1-d/a} (1 + s^{-d/a}) :
//             2 C0 / inf_{|x|>=t} omega + s <= r, t > 1, s > 0 }.
// The closed-form route substitutes t = kappa(4 C0 / r), s = r/2; that point
// is always injected into the search so the nested infimum can only improve
// on it.
inline SuperPoincareProfile beta_rate(const PotentialSpec& V, double alpha,
                                      const WeightFunction& omega, double C0,
                                      const std::vector<double>& rGrid) {
  if (!(C0 > 0)) throw BadParameter("beta_rate: C0 must be positive");
  const int d = V.dimension();
  const double tMax = 1e9;
  // omega must diverge for the constraint region to be nonempty at small r
  {
    double w1 = omega.log_value(1e3), w2 = omega.log_value(1e6), w3 = omega.log_value(1e8);
    if (!(w2 > w1 && w3 > w2 && w3 > std::log(1e4)))
      throw WeightNotDiverging("beta_rate: omega does not tend to infinity on samples");
  }
  SuperPoincareProfile prof;
  prof.c0 = C0;
  prof.hLower = [V](double t) {
    if (V.radially_nondecreasing()) return std::exp(V.value(0.0));
    double m = V.value(0.0);
    for (double r = 1e-3; r <= t; r *= 1.05) m = std::min(m, V.value(std::min(r, t)));
    return std::exp(m);
  };
  prof.HUpper = [V](double t) {
    if (V.radially_nondecreasing()) return std::exp(V.value(t));
    double m = V.value(t);
    for (double r = 1e-3; r <= t; r *= 1.05) m = std::max(m, V.value(std::min(r, t)));
    return std::exp(m);
  };
  prof.kappaInverse = [omega, tMax](double r) {
    // kappa(r) = inf{ s > 0 : inf_{|x|>=s} omega >= r }; 0 when even the
    // global infimum already clears r
    if (detail::tail_inf_weight(omega, 1e-9, tMax) >= r) return 0.0;
    double lo = 1e-9, hi = 1e-9;
    while (hi < tMax && detail::tail_inf_weight(omega, hi, tMax) < r) hi *= 2.0;
    lo = hi * 0.5;
    for (int it = 0; it < 64; ++it) {
      double mid = std::sqrt(lo * hi);
      if (detail::tail_inf_weight(omega, mid, tMax) >= r)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  };

  const double da = d / alpha;
  auto F = [&](double t, double s) {
    double H = prof.HUpper(t), h = prof.hLower(t);
    return std::exp((2.0 + da) * std::log(H) - (1.0 + da) * std::log(h)) *
           (1.0 + std::pow(s, -da));
  };
  for (double r : rGrid) {
    double best = quad::kInf;
    // closed-form candidate first
    double tCf = std::max(prof.kappaInverse(4.0 * C0 / r), 1.0 + 1e-9);
    double sCf = 0.5 * r;
    if (2.0 * C0 / detail::tail_inf_weight(omega, tCf, tMax) + sCf <= r * (1.0 + 1e-9))
      best = F(tCf, sCf);
    double betaCf = best;
    // nested geometric search over (t, s), t in (1, tMax]
    const int nt = 160, ns = 60;
    for (int i = 0; i <= nt; ++i) {
      double t = std::max(std::pow(10.0, i * std::log10(tMax) / nt), 1.0 + 1e-9);
      double slack = r - 2.0 * C0 / detail::tail_inf_weight(omega, t, tMax);
      if (slack <= 0) continue;
      for (int j = 0; j <= ns; ++j) {
        double s = std::exp(std::log(1e-6) + j * (std::log(slack) - std::log(1e-6)) / ns);
        if (s > slack) continue;
        best = std::min(best, F(t, s));
      }
    }
    prof.betaSamples.push_back({r, best, betaCf});
  }
  return prof;
}

struct MomentPoint {
  double lambda;
  double value;  // NaN unless convergent
  Verdict verdict;
};

struct StretchedCheck {
  double c2 = 1.0;
  double c3 = 1.0;
  Verdict verdict = Verdict::Inconclusive;
};

struct ConcentrationReport {
  double lambdaStar = 0.0;  // largest tested lambda with a finite moment
  std::vector<MomentPoint> momentCurve;
  std::function<double(double)> qFunction;  // q(r) = sup_{|x|>r} e^{-V}
  std::function<double(double)> qInverse;   // inf{ s : q(s) <= r }, 0 if r > q(0)
  StretchedCheck stretched;
};

// integral (1/q(C2 |x|))^{C3 |x|} dmu_V as a verdict
inline IntegralVerdict stretched_moment_check(const MeasureHandle& mu, double C2, double C3,
                                              double quadTol = 1e-8) {
  const PotentialSpec& V = mu.potential;
  int s = scale_factor(mu.scale);
  int d = V.dimension();
  auto logf = [&V, C2, C3, s, d](double r) {
    double logq = -V.tail_inf(C2 * r);
    return -C3 * r * logq - s * V.value(r) + (d - 1) * std::log(r);
  };
  double logHead = quad::log_gauss_panel(logf, 0.0, 1.0);
  quad::LogIntegral tail = quad::integrate_tail_log(logf, {1.0, quadTol, 12});
  IntegralVerdict out;
  out.verdict = tail.verdict;
  out.tailRatio = tail.tailRatio;
  out.refinementLevels = tail.levels;
  if (tail.verdict == Verdict::Convergent) {
    out.logValue = quad::log_add(logHead, tail.logValue) +
                   std::log(sphere_area(d) * mu.normalizer);
    out.value = std::exp(out.logValue);
  }
  return out;
}

inline ConcentrationReport concentration_scan(const MeasureHandle& mu,
                                              const std::vector<double>& lambdaGrid,
                                              double stretchedC2 = 1.0, double stretchedC3 = 1.0,
                                              double quadTol = 1e-8) {
  for (size_t i = 0; i < lambdaGrid.size(); ++i) {
    if (!(lambdaGrid[i] > 0)) throw BadParameter("lambda grid must be positive");
    if (i > 0 && !(lambdaGrid[i] > lambdaGrid[i - 1]))
      throw BadParameter("lambda grid must increase");
  }
  ConcentrationReport rep;
  const PotentialSpec V = mu.potential;
  for (double lam : lambdaGrid) {
    quad::LogIntegral m = exp_moment(mu, lam, quadTol);
    MomentPoint p{lam, quad::kNaN, m.verdict};
    if (m.verdict == Verdict::Convergent) {
      p.value = std::exp(m.logValue);
      rep.lambdaStar = lam;
    }
    rep.momentCurve.push_back(p);
  }
  rep.qFunction = [V](double r) { return r <= 0 ? V.exp_neg_bound() : std::exp(-V.tail_inf(r)); };
  auto q = rep.qFunction;
  rep.qInverse = [q](double y) {
    if (y >= q(0.0)) return 0.0;
    double hi = 1.0;
    while (q(hi) > y && hi < 1e12) hi *= 2.0;
    double lo = hi * 0.5;
    for (int it = 0; it < 64; ++it) {
      double mid = std::sqrt(lo * hi);
      if (q(mid) <= y)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  };
  rep.stretched.c2 = stretchedC2;
  rep.stretched.c3 = stretchedC3;
  rep.stretched.verdict = stretched_moment_check(mu, stretchedC2, stretchedC3, quadTol).verdict;
  return rep;
}

}  // namespace nlform
