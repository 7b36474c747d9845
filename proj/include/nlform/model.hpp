#pragma once

// Confining potentials V, radial jump intensities rho/psi, the probability
// measures mu_V / mu_2V they generate, and the scalar functions derived from
// them: normalizers, kernel envelopes, tail suprema, exponential moments and
// ball masses. Everything is radial; densities and weights expose log-space
// evaluation so criteria can be checked far beyond linear double range.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlform/quad.hpp"

namespace nlform {

using quad::Verdict;

struct BadParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NonIntegrable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

using Point = std::array<double, 2>;

inline double norm(const Point& p, int dim) {
  return dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

// surface area of the unit sphere in R^d
inline double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    default: throw BadParameter("sphere_area: dimension must be 1, 2 or 3");
  }
}

enum class PotentialFamily { Linear, Quadratic, LogPolynomial, StretchedExp, Custom };

inline const char* to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::Linear: return "linear";
    case PotentialFamily::Quadratic: return "quadratic";
    case PotentialFamily::LogPolynomial: return "log_polynomial";
    case PotentialFamily::StretchedExp: return "stretched_exp";
    default: return "custom";
  }
}

// V as a radial profile r -> V(r), r = |x|.
class PotentialSpec {
 public:
  static PotentialSpec linear(double eps, int dim) {
    require(eps > 0, "linear potential needs eps > 0");
    PotentialSpec p(PotentialFamily::Linear, dim,
                    [eps](double r) { return eps * std::sqrt(1.0 + r * r); }, true);
    p.params_["eps"] = eps;
    return p;
  }
  static PotentialSpec quadratic(int dim) {
    return PotentialSpec(PotentialFamily::Quadratic, dim,
                         [](double r) { return 1.0 + r * r; }, true);
  }
  static PotentialSpec log_polynomial(double eps, int dim) {
    require(eps > 0, "log_polynomial potential needs eps > 0");
    double c = 0.5 * (dim + eps);
    PotentialSpec p(PotentialFamily::LogPolynomial, dim,
                    [c](double r) { return c * std::log1p(r * r); }, true);
    p.params_["eps"] = eps;
    return p;
  }
  static PotentialSpec stretched_exp(double beta, int dim) {
    require(beta > 0, "stretched_exp potential needs beta > 0");
    PotentialSpec p(PotentialFamily::StretchedExp, dim,
                    [beta](double r) { return 1.0 + std::pow(r, beta); }, true);
    p.params_["beta"] = beta;
    return p;
  }
  static PotentialSpec custom(std::function<double(double)> profile, int dim,
                              bool radiallyNondecreasing) {
    return PotentialSpec(PotentialFamily::Custom, dim, std::move(profile),
                         radiallyNondecreasing);
  }

  PotentialFamily family() const { return family_; }
  int dimension() const { return dim_; }
  bool radially_nondecreasing() const { return nondecreasing_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& k) const { return params_.at(k); }

  double value(double r) const { return profile_(r); }
  double operator()(const Point& x) const { return profile_(norm(x, dim_)); }

  // sup of e^{-V}, recorded at construction
  double exp_neg_bound() const { return expNegBound_; }

  // inf_{|z| >= r} V(z); closed form for radially nondecreasing profiles,
  // refined geometric sampling otherwise
  double tail_inf(double r) const {
    if (nondecreasing_) return profile_(r);
    return sampled_min(profile_, r, 1e6 * std::max(r, 1.0));
  }

 private:
  PotentialSpec(PotentialFamily fam, int dim, std::function<double(double)> profile,
                bool nondecreasing)
      : family_(fam), dim_(dim), profile_(std::move(profile)), nondecreasing_(nondecreasing) {
    if (dim < 1 || dim > 3) throw BadParameter("potential dimension must be 1, 2 or 3");
    double minV = quad::kInf;
    for (double r : sample_radii()) {
      double v = profile_(r);
      if (!std::isfinite(v)) throw BadParameter("potential not finite at sampled radius");
      minV = std::min(minV, v);
    }
    expNegBound_ = std::exp(-minV);
    if (!std::isfinite(expNegBound_)) throw BadParameter("e^{-V} unbounded on samples");
  }

  static void require(bool ok, const char* msg) {
    if (!ok) throw BadParameter(msg);
  }

  static std::vector<double> sample_radii() {
    std::vector<double> rs{0.0};
    for (double r = 1e-6; r <= 1.1e6; r *= 2.0) rs.push_back(r);
    return rs;
  }

  // min over a geometric grid of [lo, hi], locally refined around the best
  // sample down to ~1e-6 relative bracket width
  static double sampled_min(const std::function<double(double)>& f, double lo, double hi) {
    lo = std::max(lo, 1e-12);
    const int n = 512;
    double best = f(lo), bestR = lo;
    double ratio = std::pow(hi / lo, 1.0 / n);
    double r = lo;
    for (int i = 0; i <= n; ++i, r *= ratio) {
      double v = f(r);
      if (v < best) {
        best = v;
        bestR = r;
      }
    }
    double a = std::max(bestR / ratio, lo), b = bestR * ratio;
    for (int it = 0; it < 40; ++it) {
      double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      if (f(m1) < f(m2))
        b = m2;
      else
        a = m1;
    }
    return std::min(best, f(0.5 * (a + b)));
  }

  PotentialFamily family_;
  int dim_;
  std::function<double(double)> profile_;
  bool nondecreasing_;
  double expNegBound_ = 0.0;
  std::map<std::string, double> params_;
};

enum class KernelFamily { Fractional, FractionalTempered, Custom };

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Fractional: return "fractional";
    case KernelFamily::FractionalTempered: return "fractional_tempered";
    default: return "custom";
  }
}

// Radial jump intensity rho(r) (or psi(r)); gamma(r) = inf_{0<s<=r+1} rho(s)
// is the lower envelope entering the implied weight e^V gamma(|x|).
class KernelProfile {
 public:
  static KernelProfile fractional(double alpha, int dim) {
    check_alpha(alpha);
    KernelProfile k(KernelFamily::Fractional, dim, alpha, 0.0, nullptr, true);
    return k;
  }
  static KernelProfile fractional_tempered(double alpha, double delta, int dim) {
    check_alpha(alpha);
    if (delta < 0) throw BadParameter("tempering delta must be >= 0");
    KernelProfile k(KernelFamily::FractionalTempered, dim, alpha, delta, nullptr, true);
    return k;
  }
  // Custom kernels may vanish on part of the axis (truncated kernels); the
  // built-in families are strictly positive.
  static KernelProfile custom(std::function<double(double)> rho, int dim,
                              bool monotoneNonincreasing, double alphaHint = 1.0) {
    return KernelProfile(KernelFamily::Custom, dim, alphaHint, 0.0, std::move(rho),
                         monotoneNonincreasing);
  }

  KernelFamily family() const { return family_; }
  int dimension() const { return dim_; }
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  bool monotone_nonincreasing() const { return monotone_; }

  double rho(double r) const {
    if (family_ == KernelFamily::Custom) return custom_(r);
    return std::exp(log_rho(r));
  }

  double log_rho(double r) const {
    switch (family_) {
      case KernelFamily::Fractional:
        return -(dim_ + alpha_) * std::log(r);
      case KernelFamily::FractionalTempered:
        return -delta_ * r - (dim_ + alpha_) * std::log(r);
      default: {
        double v = custom_(r);
        return v > 0 ? std::log(v) : quad::kNegInf;
      }
    }
  }

  // gamma(r) = inf over (0, r+1]; monotone families give rho(r+1) exactly
  double log_gamma(double r) const {
    if (monotone_) return log_rho(r + 1.0);
    return std::log(std::max(sampled_inf(r + 1.0), 0.0));
  }
  double gamma(double r) const { return std::exp(log_gamma(r)); }

 private:
  KernelProfile(KernelFamily fam, int dim, double alpha, double delta,
                std::function<double(double)> rho, bool monotone)
      : family_(fam), dim_(dim), alpha_(alpha), delta_(delta), custom_(std::move(rho)),
        monotone_(monotone) {
    if (dim < 1 || dim > 3) throw BadParameter("kernel dimension must be 1, 2 or 3");
  }

  static void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw BadParameter("kernel alpha must lie in (0,2)");
  }

  double sampled_inf(double upper) const {
    const int n = 4096;
    double lo = 1e-9 * upper;
    double ratio = std::pow(upper / lo, 1.0 / n);
    double best = quad::kInf, bestR = lo, r = lo;
    for (int i = 0; i <= n; ++i, r *= ratio) {
      double v = custom_(std::min(r, upper));
      if (v < best) {
        best = v;
        bestR = r;
      }
    }
    double a = bestR / ratio, b = std::min(bestR * ratio, upper);
    for (int it = 0; it < 40; ++it) {
      double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      if (custom_(m1) < custom_(m2))
        b = m2;
      else
        a = m1;
    }
    return std::min(best, custom_(0.5 * (a + b)));
  }

  KernelFamily family_;
  int dim_;
  double alpha_;
  double delta_;
  std::function<double(double)> custom_;
  bool monotone_;
};

enum class MeasureScale { V, TwoV };

inline int scale_factor(MeasureScale s) { return s == MeasureScale::V ? 1 : 2; }

// 1 / integral e^{-sV} dx with relative accuracy quadTol. Doubling radial
// truncation, capped; NonIntegrable when the tail never starts decaying.
inline double truncated_inverse_normalizer(const PotentialSpec& V, MeasureScale scale,
                                           double R) {
  int s = scale_factor(scale);
  int d = V.dimension();
  auto logf = [&](double r) { return -s * V.value(r) + (d - 1) * std::log(r); };
  double logI = quad::log_gauss_panel(logf, 0.0, std::min(1.0, R));
  if (R > 1.0) {
    // fixed doubling ladder up to R
    double lo = 1.0;
    while (lo < R) {
      double hi = std::min(2.0 * lo, R);
      logI = quad::log_add(logI, quad::log_gauss_panel(logf, lo, hi));
      lo = hi;
    }
  }
  return std::exp(-(std::log(sphere_area(d)) + logI));
}

inline quad::LogIntegral log_total_mass_unnormalized(const PotentialSpec& V, MeasureScale scale,
                                                     double quadTol) {
  int s = scale_factor(scale);
  int d = V.dimension();
  auto logf = [&, s, d](double r) { return -s * V.value(r) + (d - 1) * std::log(r); };
  double logHead = quad::log_gauss_panel(logf, 0.0, 1.0);
  quad::LogIntegral tail = quad::integrate_tail_log(logf, {1.0, quadTol, 12});
  quad::LogIntegral out = tail;
  out.logValue = quad::log_add(logHead, tail.logValue) + std::log(sphere_area(d));
  return out;
}

inline double normalizer(const PotentialSpec& V, MeasureScale scale, double quadTol = 1e-8) {
  quad::LogIntegral m = log_total_mass_unnormalized(V, scale, quadTol);
  if (m.verdict != Verdict::Convergent)
    throw NonIntegrable("normalizer: e^{-sV} tail failed to decay under doubling truncation");
  return std::exp(-m.logValue);
}

struct MeasureHandle {
  PotentialSpec potential;
  MeasureScale scale;
  double normalizer;       // C_V or C_2V
  double truncationRadius; // radius reached by the doubling sweep
  double quadTol;

  double log_density(double r) const {
    return std::log(normalizer) - scale_factor(scale) * potential.value(r);
  }
};

inline MeasureHandle measure(const PotentialSpec& V, MeasureScale scale, double quadTol = 1e-8) {
  quad::LogIntegral m = log_total_mass_unnormalized(V, scale, quadTol);
  if (m.verdict != Verdict::Convergent)
    throw NonIntegrable("measure: e^{-sV} is not integrable at requested tolerance");
  // push the recorded truncation radius until raw truncation is stable
  // under doubling at the requested tolerance
  double R = std::ldexp(1.0, m.levels);
  double c = truncated_inverse_normalizer(V, scale, R);
  for (int extra = 0; extra < 24; ++extra) {
    double c2 = truncated_inverse_normalizer(V, scale, 2.0 * R);
    if (std::abs(c - c2) <= quadTol * c2) break;
    R *= 2.0;
    c = c2;
  }
  return MeasureHandle{V, scale, std::exp(-m.logValue), R, quadTol};
}

// sup_{|z| >= r} e^{-V(z)}
inline double tail_sup_exp_negV(const PotentialSpec& V, double r) {
  if (r <= 0.0) return V.exp_neg_bound();
  return std::exp(-V.tail_inf(r));
}

// gamma envelope as a plain value (log form lives on KernelProfile)
inline double gamma_envelope(const KernelProfile& k, double r) {
  if (r < 0.0) throw BadParameter("gamma_envelope: r must be >= 0");
  return k.gamma(r);
}

// integral e^{lambda |x|} d mu; Divergent is a legitimate verdict
inline quad::LogIntegral exp_moment(const MeasureHandle& mu, double lambda,
                                    double quadTol = 1e-8) {
  int s = scale_factor(mu.scale);
  int d = mu.potential.dimension();
  const PotentialSpec& V = mu.potential;
  auto logf = [&V, lambda, s, d](double r) {
    return lambda * r - s * V.value(r) + (d - 1) * std::log(r);
  };
  double logHead = quad::log_gauss_panel(logf, 0.0, 1.0);
  quad::LogIntegral tail = quad::integrate_tail_log(logf, {1.0, quadTol, 12});
  quad::LogIntegral out = tail;
  if (tail.verdict == Verdict::Convergent) {
    out.logValue =
        quad::log_add(logHead, tail.logValue) + std::log(sphere_area(d) * mu.normalizer);
  }
  return out;
}

// mu(B(0,r)), monotone nondecreasing in r
inline double ball_mass(const MeasureHandle& mu, double r) {
  if (!(r > 0.0)) throw BadParameter("ball_mass: r must be > 0");
  int s = scale_factor(mu.scale);
  int d = mu.potential.dimension();
  const PotentialSpec& V = mu.potential;
  auto logf = [&V, s, d](double rr) { return -s * V.value(rr) + (d - 1) * std::log(rr); };
  double logI = quad::kNegInf;
  double lo = 0.0, hi = std::min(r, 1.0);
  logI = quad::log_gauss_panel(logf, lo, hi);
  lo = hi;
  while (lo < r) {
    hi = std::min(2.0 * std::max(lo, 1.0), r);
    logI = quad::log_add(logI, quad::log_gauss_panel(logf, lo, hi));
    lo = hi;
  }
  double m = std::exp(logI + std::log(sphere_area(d) * mu.normalizer));
  return std::min(m, 1.0);
}

enum class WeightKind { Paper, Polynomial, Power, Gamma, Constant, Custom };

inline const char* to_string(WeightKind k) {
  switch (k) {
    case WeightKind::Paper: return "paper";
    case WeightKind::Polynomial: return "polynomial";
    case WeightKind::Power: return "power";
    case WeightKind::Gamma: return "gamma";
    case WeightKind::Constant: return "constant";
    default: return "custom";
  }
}

// Strictly positive radial weight entering the variance side of the
// inequality. Evaluated in log space: the paper weight e^{V - delta|x|} /
// (1+|x|)^{d+alpha} outruns double range long before the criteria stop
// sampling it.
class WeightFunction {
 public:
  // e^{V(x) - delta |x|} / (1+|x|)^{d+alpha}
  static WeightFunction paper(const PotentialSpec& V, double delta, double alpha) {
    int d = V.dimension();
    WeightFunction w(WeightKind::Paper, [V, delta, alpha, d](double r) {
      return V.value(r) - delta * r - (d + alpha) * std::log1p(r);
    });
    w.params_["delta"] = delta;
    w.params_["alpha"] = alpha;
    return w;
  }
  // 1 + |x|^beta
  static WeightFunction polynomial(double beta) {
    WeightFunction w(WeightKind::Polynomial,
                     [beta](double r) { return std::log1p(std::pow(r, beta)); });
    w.params_["beta"] = beta;
    return w;
  }
  // (1 + |x|)^p
  static WeightFunction power(double p) {
    WeightFunction w(WeightKind::Power, [p](double r) { return p * std::log1p(r); });
    w.params_["exponent"] = p;
    return w;
  }
  // e^{V(x)} gamma(|x|)
  static WeightFunction gamma(const PotentialSpec& V, const KernelProfile& k) {
    return WeightFunction(WeightKind::Gamma,
                          [V, k](double r) { return V.value(r) + k.log_gamma(r); });
  }
  static WeightFunction constant() {
    return WeightFunction(WeightKind::Constant, [](double) { return 0.0; });
  }
  static WeightFunction custom(std::function<double(double)> logProfile) {
    return WeightFunction(WeightKind::Custom, std::move(logProfile));
  }

  WeightKind kind() const { return kind_; }
  const std::map<std::string, double>& params() const { return params_; }

  double log_value(double r) const { return logProfile_(r); }
  double value(double r) const { return std::exp(logProfile_(r)); }
  double operator()(const Point& x, int dim) const { return value(norm(x, dim)); }

 private:
  WeightFunction(WeightKind kind, std::function<double(double)> logProfile)
      : kind_(kind), logProfile_(std::move(logProfile)) {
    for (double r : {0.0, 0.5, 1.0, 7.0, 123.0}) {
      double lv = logProfile_(r);
      if (std::isnan(lv) || lv == quad::kInf)
        throw BadParameter("weight must be positive and finite at sampled radii");
    }
  }

  WeightKind kind_;
  std::function<double(double)> logProfile_;
  std::map<std::string, double> params_;
};

// mean of e^{-V(x + s u)} over directions u; exact two-point sum in d=1,
// periodic trapezoid (spectrally accurate) in d=2
inline double angular_mean_exp_negV(const PotentialSpec& V, const Point& x, double s) {
  int d = V.dimension();
  if (d == 1) {
    double r1 = std::abs(x[0] + s), r2 = std::abs(x[0] - s);
    return 0.5 * (std::exp(-V.value(r1)) + std::exp(-V.value(r2)));
  }
  const int m = 48;
  double acc = 0.0;
  double xn = norm(x, 2);
  for (int i = 0; i < m; ++i) {
    double th = 2.0 * M_PI * (i + 0.5) / m;
    double rr = std::sqrt(std::max(0.0, xn * xn + s * s + 2.0 * xn * s * std::cos(th)));
    acc += std::exp(-V.value(rr));
  }
  return acc / m;
}

}  // namespace nlform
