#pragma once

// Hypothesis checks for the weighted Poincare criteria. Each check samples
// the relevant tail product on geometric radii (log domain), aggregates the
// integral conditions from quadrature.hpp, and returns the implied weight
// when every condition passes. Reports assert "hypotheses numerically
// verified", never "inequality proved".

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlform/quadrature.hpp"

namespace nlform {

enum class Criterion {
  TemperedTail,        // tempered kernel e^{-delta r} r^{-(d+alpha)} on mu_V
  FractionalTail,      // pure fractional kernel on mu_V
  GeneralKernel,       // general rho with envelope gamma on mu_V
  GirsanovKernel,      // general psi form on mu_2V
  GirsanovTempered,    // tempered psi on mu_2V
  GirsanovFractional,  // fractional psi on mu_2V
  WeightInsideForm,    // weight may sit inside the form instead
};

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::TemperedTail: return "tempered_tail";
    case Criterion::FractionalTail: return "fractional_tail";
    case Criterion::GeneralKernel: return "general_kernel";
    case Criterion::GirsanovKernel: return "girsanov_kernel";
    case Criterion::GirsanovTempered: return "girsanov_tempered";
    case Criterion::GirsanovFractional: return "girsanov_fractional";
    default: return "weight_inside_form";
  }
}

enum class LimitKind { LimitZero, BoundedAwayFromZero, Unbounded, Inconclusive };

inline const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::LimitZero: return "limit_zero";
    case LimitKind::BoundedAwayFromZero: return "bounded_away_from_zero";
    case LimitKind::Unbounded: return "unbounded";
    default: return "inconclusive";
  }
}

// Carrier for limsup conditions: the product is sampled at radii 2^k,
// k = 0..20. Values are kept in log scale next to the (possibly
// under/overflowed) linear ones.
struct LimitVerdict {
  LimitKind kind = LimitKind::Inconclusive;
  std::vector<double> radii;
  std::vector<double> values;     // linear scale, may be 0 or inf
  std::vector<double> logValues;
  double windowSlope = quad::kNaN;  // d log(value) / d log(r) over the last window
};

namespace detail {

// Classify the sampled log-products. The absolute floor (1e-8 of the first
// sample) decides fast exponential decay; slow polynomial decay cannot reach
// it within the sampled radii, so a fitted log-log window slope decides the
// rest.
inline LimitVerdict classify_limit(const std::function<double(double)>& logProduct) {
  LimitVerdict lv;
  constexpr int kMax = 20;
  for (int k = 0; k <= kMax; ++k) {
    double r = std::ldexp(1.0, k);
    double l = logProduct(r);
    lv.radii.push_back(r);
    lv.logValues.push_back(l);
    lv.values.push_back(std::exp(l));
  }
  const auto& L = lv.logValues;
  int n = static_cast<int>(L.size());
  bool decreasing = true, increasing = true;
  for (int i = n - 3; i < n; ++i) {
    if (!(L[i] < L[i - 1])) decreasing = false;
    if (!(L[i] > L[i - 1])) increasing = false;
  }
  lv.windowSlope = (L[n - 1] - L[n - 4]) / (3.0 * std::log(2.0));
  const double floorLog = L[0] + std::log(1e-8);
  const double ceilLog = L[0] - std::log(1e-8);
  constexpr double slopeTol = 0.02;
  if (L[n - 1] == quad::kNegInf ||
      (decreasing && (L[n - 1] <= floorLog || lv.windowSlope <= -slopeTol))) {
    lv.kind = LimitKind::LimitZero;
  } else if (increasing && (L[n - 1] >= ceilLog || lv.windowSlope >= slopeTol)) {
    lv.kind = LimitKind::Unbounded;
  } else {
    double mx = quad::kNegInf, mn = quad::kInf;
    for (int i = n - 4; i < n; ++i) {
      mx = std::max(mx, L[i]);
      mn = std::min(mn, L[i]);
    }
    lv.kind = (mx - mn <= std::log(10.0)) ? LimitKind::BoundedAwayFromZero
                                          : LimitKind::Inconclusive;
  }
  return lv;
}

}  // namespace detail

enum class TriState { Yes, No, Unknown };

inline const char* to_string(TriState t) {
  switch (t) {
    case TriState::Yes: return "yes";
    case TriState::No: return "no";
    default: return "unknown";
  }
}

struct ConditionResult {
  std::string name;
  std::variant<IntegralVerdict, LimitVerdict> result;
  TriState pass = TriState::Unknown;

  static ConditionResult integral(std::string name, IntegralVerdict v) {
    ConditionResult c{std::move(name), v, TriState::Unknown};
    c.pass = v.verdict == Verdict::Convergent
                 ? TriState::Yes
                 : (v.verdict == Verdict::Divergent ? TriState::No : TriState::Unknown);
    return c;
  }
  static ConditionResult limit(std::string name, LimitVerdict v, LimitKind wanted) {
    ConditionResult c{std::move(name), v, TriState::Unknown};
    if (v.kind == LimitKind::Inconclusive)
      c.pass = TriState::Unknown;
    else
      c.pass = v.kind == wanted ? TriState::Yes : TriState::No;
    return c;
  }
};

struct CriterionReport {
  Criterion criterion;
  double alpha0 = quad::kNaN;
  std::vector<ConditionResult> conditions;
  TriState satisfied = TriState::Unknown;
  std::optional<WeightFunction> impliedWeight;  // populated iff satisfied

  const ConditionResult* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline TriState aggregate(const std::vector<ConditionResult>& cs) {
  bool unknown = false;
  for (const auto& c : cs) {
    if (c.pass == TriState::No) return TriState::No;
    if (c.pass == TriState::Unknown) unknown = true;
  }
  return unknown ? TriState::Unknown : TriState::Yes;
}

inline void finalize(CriterionReport& rep, const WeightFunction& weight) {
  rep.satisfied = aggregate(rep.conditions);
  if (rep.satisfied == TriState::Yes) rep.impliedWeight = weight;
}

}  // namespace detail

// Tempered-kernel criterion: the tail product
// (sup_{|z|>=|x|} e^{-V(z)}) e^{delta |x|} |x|^{d+alpha-alpha0} must vanish.
// Implied weight: e^{V - delta|x|} / (1+|x|)^{d+alpha}.
inline CriterionReport check_tempered_tail(const PotentialSpec& V, const KernelProfile& k,
                                           double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw BadParameter("alpha0 must lie in (0,1)");
  if (!(k.delta() > 0.0)) throw BadParameter("tempered criterion needs delta > 0");
  double delta = k.delta(), alpha = k.alpha();
  int d = V.dimension();
  CriterionReport rep{Criterion::TemperedTail, alpha0, {}, TriState::Unknown, std::nullopt};
  auto logProduct = [&V, delta, alpha, alpha0, d](double r) {
    return -V.tail_inf(r) + delta * r + (d + alpha - alpha0) * std::log(r);
  };
  rep.conditions.push_back(ConditionResult::limit(
      "tempered_tail_product", detail::classify_limit(logProduct), LimitKind::LimitZero));
  detail::finalize(rep, WeightFunction::paper(V, delta, alpha));
  return rep;
}

// Fractional-kernel criterion: (sup_{|z|>=|x|} e^{-V(z)}) |x|^{d+alpha-alpha0}
// with alpha0 in (0, alpha/2); implied weight e^V / (1+|x|)^{d+alpha}.
inline CriterionReport check_fractional_tail(const PotentialSpec& V, const KernelProfile& k,
                                             double alpha0) {
  double alpha = k.alpha();
  if (!(alpha0 > 0.0 && alpha0 < 0.5 * alpha))
    throw BadParameter("alpha0 must lie in (0, alpha/2)");
  int d = V.dimension();
  CriterionReport rep{Criterion::FractionalTail, alpha0, {}, TriState::Unknown, std::nullopt};
  auto logProduct = [&V, alpha, alpha0, d](double r) {
    return -V.tail_inf(r) + (d + alpha - alpha0) * std::log(r);
  };
  rep.conditions.push_back(ConditionResult::limit(
      "fractional_tail_product", detail::classify_limit(logProduct), LimitKind::LimitZero));
  detail::finalize(rep, WeightFunction::paper(V, 0.0, alpha));
  return rep;
}

namespace detail {

// Shared body of the general-kernel criteria: Levy integrability, inverse
// ball integral, e^{-sV}/gamma integrability, tail moment with alpha0, and
// the vanishing of sup e^{-V} / (gamma(|x|) |x|^{alpha0}).
inline CriterionReport general_kernel_body(Criterion which, const PotentialSpec& V,
                                           const KernelProfile& k, double alpha0,
                                           DensityScale scale, double quadTol) {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw BadParameter("alpha0 must lie in (0,1)");
  CriterionReport rep{which, alpha0, {}, TriState::Unknown, std::nullopt};
  rep.conditions.push_back(
      ConditionResult::integral("levy_integrability", levy_integral(k, quadTol)));
  rep.conditions.push_back(ConditionResult::integral(
      "inverse_kernel_ball", inverse_kernel_ball_integral(k, quadTol)));
  rep.conditions.push_back(ConditionResult::integral(
      scale == DensityScale::TwoV ? "weighted_density_2V" : "weighted_density_3V",
      weighted_density_integral(V, k, scale, quadTol)));
  rep.conditions.push_back(ConditionResult::integral(
      "tail_moment_alpha0", tail_moment_integral(k, alpha0, quadTol)));
  auto logProduct = [&V, &k, alpha0](double r) {
    return -V.tail_inf(r) - k.log_gamma(r) - alpha0 * std::log(r);
  };
  rep.conditions.push_back(ConditionResult::limit(
      "tail_sup_vs_gamma", detail::classify_limit(logProduct), LimitKind::LimitZero));
  detail::finalize(rep, WeightFunction::gamma(V, k));
  return rep;
}

}  // namespace detail

// General rho-kernel criterion on mu_V; implied weight e^V gamma(|x|).
inline CriterionReport check_general_kernel(const PotentialSpec& V, const KernelProfile& k,
                                            double alpha0, double quadTol = 1e-8) {
  return detail::general_kernel_body(Criterion::GeneralKernel, V, k, alpha0,
                                     DensityScale::TwoV, quadTol);
}

// Same machinery for the psi form on mu_2V: the density integral runs at
// e^{-3V} and the implied weight acts against mu_2V.
inline CriterionReport check_girsanov_kernel(const PotentialSpec& V, const KernelProfile& psi,
                                             double alpha0, double quadTol = 1e-8) {
  return detail::general_kernel_body(Criterion::GirsanovKernel, V, psi, alpha0,
                                     DensityScale::ThreeV, quadTol);
}

inline CriterionReport check_girsanov_tempered(const PotentialSpec& V, const KernelProfile& psi,
                                               double alpha0) {
  CriterionReport rep = check_tempered_tail(V, psi, alpha0);
  rep.criterion = Criterion::GirsanovTempered;
  return rep;
}

inline CriterionReport check_girsanov_fractional(const PotentialSpec& V,
                                                 const KernelProfile& psi, double alpha0) {
  double alpha = psi.alpha();
  if (!(alpha0 > 0.0 && alpha0 < std::min(alpha, 1.0)))
    throw BadParameter("alpha0 must lie in (0, alpha ^ 1)");
  int d = V.dimension();
  CriterionReport rep{Criterion::GirsanovFractional, alpha0, {}, TriState::Unknown,
                      std::nullopt};
  auto logProduct = [&V, alpha, alpha0, d](double r) {
    return -V.tail_inf(r) + (d + alpha - alpha0) * std::log(r);
  };
  rep.conditions.push_back(ConditionResult::limit(
      "fractional_tail_product", detail::classify_limit(logProduct), LimitKind::LimitZero));
  detail::finalize(rep, WeightFunction::paper(V, 0.0, alpha));
  return rep;
}

// liminf e^V / |x|^{d+alpha} > 0, i.e. limsup e^{-V} |x|^{d+alpha} < infinity:
// then any continuous positive weight may be moved inside the form. Only the
// hypothesis is verified; the constant is non-constructive.
inline CriterionReport check_weight_inside_form(const PotentialSpec& V, double alpha) {
  int d = V.dimension();
  CriterionReport rep{Criterion::WeightInsideForm, quad::kNaN, {}, TriState::Unknown,
                      std::nullopt};
  auto logProduct = [&V, alpha, d](double r) {
    return -V.tail_inf(r) + (d + alpha) * std::log(r);
  };
  LimitVerdict lv = detail::classify_limit(logProduct);
  ConditionResult c{"density_vs_power_tail", lv, TriState::Unknown};
  // bounded above is enough: LimitZero or BoundedAwayFromZero both pass
  if (lv.kind == LimitKind::Inconclusive)
    c.pass = TriState::Unknown;
  else
    c.pass = lv.kind == LimitKind::Unbounded ? TriState::No : TriState::Yes;
  rep.conditions.push_back(std::move(c));
  detail::finalize(rep, WeightFunction::paper(V, 0.0, alpha));
  return rep;
}

// "for some alpha0": makes the existential executable by sweeping
// alpha0 = f * bound over f in {0.1, ..., 0.9} and reporting the first
// success (or the last failing report).
template <typename CheckFn>
CriterionReport sweep_alpha0(CheckFn&& check, double bound) {
  CriterionReport last{};
  for (int i = 1; i <= 9; ++i) {
    double a0 = 0.1 * i * bound;
    last = check(a0);
    if (last.satisfied == TriState::Yes) return last;
  }
  return last;
}

// Pointwise I1(x), I2(x) for the symmetrized kernel
// j(x,y) = rho(|x-y|)(e^{V(x)} + e^{V(y)}) / (2 C_V):
//   I1(x) = 1/2 integral (1 ^ |z|^2) rho(|z|)(e^{V(x)-V(x+z)} + 1) dz
//   I2(x) = 1/(2 C_V) integral_{|z|<=1} |z| rho(|z|)
//             |e^{V(x)-V(x+z)} - e^{V(x)-V(x-z)}| dz
// Used to sanity-check local boundedness on a grid.
struct ConditionFunctions {
  double I1;
  double I2;
};

inline ConditionFunctions condition_functions(const PotentialSpec& V, const KernelProfile& k,
                                              const Point& x, double CV,
                                              double quadTol = 1e-8) {
  int d = V.dimension();
  double area = sphere_area(d);
  double eVx = std::exp(V(x));

  // I1 splits into the pure-kernel part (slow 1/rho-tail handled by the
  // extrapolating log-domain integrators) and the e^{V(x)-V(y)} part whose
  // tail dies with e^{-V}
  double logHalfArea = std::log(0.5 * area);
  auto logNear = [&](double s) { return k.log_rho(s) + (d + 1) * std::log(s); };
  auto logFar = [&](double s) { return k.log_rho(s) + (d - 1) * std::log(s); };
  double i1Kernel =
      std::exp(quad::log_add(quad::integrate_singular_log(logNear, {1.0, quadTol, 48}).logValue,
                             quad::integrate_tail_log(logFar, {1.0, quadTol, 12}).logValue) +
               logHalfArea);
  auto i1Density = [&](double s) {
    double cap = std::min(1.0, s * s);
    double mean = angular_mean_exp_negV(V, x, s);
    return 0.5 * cap * k.rho(s) * eVx * mean * area * std::pow(s, d - 1);
  };
  double i1Head = 0.0;
  for (double b = 1.0; b > 1e-12; b *= 0.5)
    i1Head += quad::signed_gauss_panel(i1Density, 0.5 * b, b);
  quad::SignedTail i1Tail = quad::integrate_tail_signed(
      i1Density, 1.0, quadTol, {norm(x, d) - 1.0, norm(x, d), norm(x, d) + 1.0});

  auto i2Integrand = [&](double s) {
    double diff;
    if (d == 1) {
      double a = std::exp(-V.value(std::abs(x[0] + s)));
      double b = std::exp(-V.value(std::abs(x[0] - s)));
      diff = std::abs(a - b);
    } else {
      const int m = 48;
      double acc = 0.0;
      double xn = norm(x, 2);
      for (int i = 0; i < m; ++i) {
        double th = 2.0 * M_PI * (i + 0.5) / m;
        double rp = std::sqrt(std::max(0.0, xn * xn + s * s + 2.0 * xn * s * std::cos(th)));
        double rm = std::sqrt(std::max(0.0, xn * xn + s * s - 2.0 * xn * s * std::cos(th)));
        acc += std::abs(std::exp(-V.value(rp)) - std::exp(-V.value(rm)));
      }
      diff = acc / m;
    }
    return 0.5 / CV * s * k.rho(s) * eVx * diff * area * std::pow(s, d - 1);
  };
  double i2 = quad::signed_gauss_panel(i2Integrand, 0.125, 1.0);
  for (double b = 0.125; b > 1e-12; b *= 0.5) i2 += quad::signed_gauss_panel(i2Integrand, 0.5 * b, b);

  return {i1Kernel + i1Head + i1Tail.value, i2};
}

}  // namespace nlform
