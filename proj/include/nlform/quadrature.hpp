#pragma once

// The singular/tail integrals behind every integrability condition:
// Levy integrability of the kernel, inverse-kernel ball integrability,
// polynomial tail moments, and the weighted density integrals
// e^{-sV}/gamma. Each returns an explicit convergent/divergent/inconclusive
// verdict; numerics cannot prove divergence, so Inconclusive is a
// first-class outcome.

#include "nlform/model.hpp"
#include "nlform/quad.hpp"

namespace nlform {

struct IntegralVerdict {
  double value = quad::kNaN;   // valid when convergent
  double logValue = quad::kNegInf;
  Verdict verdict = Verdict::Inconclusive;
  double tailRatio = quad::kNaN;
  int refinementLevels = 0;

  bool convergent() const { return verdict == Verdict::Convergent; }
};

namespace detail {

inline IntegralVerdict from_log(const quad::LogIntegral& li) {
  IntegralVerdict v;
  v.verdict = li.verdict;
  v.tailRatio = li.tailRatio;
  v.refinementLevels = li.levels;
  if (li.verdict == Verdict::Convergent) {
    v.logValue = li.logValue;
    v.value = std::exp(li.logValue);
  }
  return v;
}

// combine head (0,1] and tail [1,inf) pieces of one integral
inline IntegralVerdict combine(const quad::LogIntegral& head, const quad::LogIntegral& tail) {
  IntegralVerdict v;
  v.refinementLevels = head.levels + tail.levels;
  if (head.verdict == Verdict::Divergent || tail.verdict == Verdict::Divergent) {
    v.verdict = Verdict::Divergent;
    v.tailRatio = head.verdict == Verdict::Divergent ? head.tailRatio : tail.tailRatio;
    return v;
  }
  if (head.verdict == Verdict::Inconclusive || tail.verdict == Verdict::Inconclusive) {
    v.verdict = Verdict::Inconclusive;
    v.tailRatio = head.verdict == Verdict::Inconclusive ? head.tailRatio : tail.tailRatio;
    return v;
  }
  v.verdict = Verdict::Convergent;
  v.logValue = quad::log_add(head.logValue, tail.logValue);
  v.value = std::exp(v.logValue);
  v.tailRatio = tail.tailRatio;
  return v;
}

}  // namespace detail

// integral_0^inf rho(r) (1 ^ r^2) r^{d-1} dr, split at r = 1; the near-zero
// part resolves r^{1-alpha} on dyadic panels
inline IntegralVerdict levy_integral(const KernelProfile& k, double quadTol = 1e-8) {
  int d = k.dimension();
  auto logNear = [&k, d](double r) { return k.log_rho(r) + (d + 1) * std::log(r); };
  auto logFar = [&k, d](double r) { return k.log_rho(r) + (d - 1) * std::log(r); };
  quad::LogIntegral head = quad::integrate_singular_log(logNear, {1.0, quadTol, 48});
  quad::LogIntegral tail = quad::integrate_tail_log(logFar, {1.0, quadTol, 12});
  return detail::combine(head, tail);
}

// integral_0^1 r^{d-1} / rho(r) dr
inline IntegralVerdict inverse_kernel_ball_integral(const KernelProfile& k,
                                                    double quadTol = 1e-8) {
  int d = k.dimension();
  auto logf = [&k, d](double r) { return (d - 1) * std::log(r) - k.log_rho(r); };
  return detail::from_log(quad::integrate_singular_log(logf, {1.0, quadTol, 48}));
}

// integral_1^inf r^{d+alpha0-1} rho(r) dr
inline IntegralVerdict tail_moment_integral(const KernelProfile& k, double alpha0,
                                            double quadTol = 1e-8) {
  if (!(alpha0 > 0.0 && alpha0 < 1.0))
    throw BadParameter("tail_moment_integral: alpha0 must lie in (0,1)");
  int d = k.dimension();
  auto logf = [&k, d, alpha0](double r) {
    return k.log_rho(r) + (d + alpha0 - 1) * std::log(r);
  };
  return detail::from_log(quad::integrate_tail_log(logf, {1.0, quadTol, 12}));
}

enum class DensityScale { TwoV, ThreeV };

// integral_{|x|>1} e^{-sV(x)} / gamma(|x|) dx in radial coordinates,
// s = 2 or 3
inline IntegralVerdict weighted_density_integral(const PotentialSpec& V, const KernelProfile& k,
                                                 DensityScale scale, double quadTol = 1e-8) {
  int s = scale == DensityScale::TwoV ? 2 : 3;
  int d = V.dimension();
  double logArea = std::log(sphere_area(d));
  auto logf = [&V, &k, s, d, logArea](double r) {
    return logArea - s * V.value(r) - k.log_gamma(r) + (d - 1) * std::log(r);
  };
  return detail::from_log(quad::integrate_tail_log(logf, {1.0, quadTol, 12}));
}

}  // namespace nlform
