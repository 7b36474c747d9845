#include <catch2/catch_amalgamated.hpp>

#include "nlform/sharpness.hpp"

using namespace nlform;

TEST_CASE("ramp families: bounds, interior values, discrete gradient") {
  Grid g = make_grid(1, 24.0, 193);
  CHECK_THROWS_AS(build_family(RampKind::InnerRamp, 12, g), FamilyExceedsGrid);
  CHECK_THROWS_AS(build_family(RampKind::OuterRamp, 6, g), FamilyExceedsGrid);

  TestFunctionFamily fam = build_family(RampKind::InnerRamp, 4, g);
  CHECK(fam.gradientBound == Catch::Approx(0.5));
  for (int i = 0; i < g.size(); ++i) {
    CHECK(fam.values[i] >= 0.0);
    CHECK(fam.values[i] <= 1.0);
  }
  // value strictly interior in the transition annulus
  double mid = ramp_value(RampKind::InnerRamp, 4, 6.0);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);

  // discrete max gradient below 2.2/n
  double h = g.spacing();
  double maxGrad = 0.0;
  for (int i = 1; i < g.size(); ++i)
    maxGrad = std::max(maxGrad, std::abs(fam.values[i] - fam.values[i - 1]) / h);
  CHECK(maxGrad <= 2.2 / 4.0);

  TestFunctionFamily outer = build_family(RampKind::OuterRamp, 2, g);
  for (int i = 0; i < g.size(); ++i) {
    double r = std::abs(g.nodes[i][0]);
    if (r <= 6.0) CHECK(outer.values[i] == 0.0);
    if (r >= 8.0) CHECK(outer.values[i] == 1.0);
  }
}

TEST_CASE("failure slope: heavy tail without weight grows like alpha - eps") {
  auto V = PotentialSpec::log_polynomial(0.7, 1);
  auto k = KernelProfile::fractional(1.0, 1);
  SlopeFit fit = failure_slope(V, k, WeightFunction::constant(), RampKind::InnerRamp,
                               {2, 4, 8, 16}, {0.25, 8.0, 1});
  INFO("slope=" << fit.slope << " r2=" << fit.rSquared);
  CHECK(fit.slope == Catch::Approx(0.3).margin(0.075));
  CHECK(fit.rSquared > 0.9);
  // the ratios really grow
  CHECK(fit.pairs.back().ratio > fit.pairs.front().ratio);
}

TEST_CASE("failure slope is grid-stable under halving the spacing") {
  auto V = PotentialSpec::log_polynomial(0.7, 1);
  auto k = KernelProfile::fractional(1.0, 1);
  SlopeFit coarse = failure_slope(V, k, WeightFunction::constant(), RampKind::InnerRamp,
                                  {2, 4, 8}, {0.5, 8.0, 1});
  SlopeFit fine = failure_slope(V, k, WeightFunction::constant(), RampKind::InnerRamp,
                                {2, 4, 8}, {0.25, 8.0, 1});
  CHECK(std::abs(coarse.slope - fine.slope) < 0.05);
}

TEST_CASE("failure slope: paper weight holds the ratios down") {
  auto V = PotentialSpec::log_polynomial(0.7, 1);
  auto k = KernelProfile::fractional(1.0, 1);
  SlopeFit fit = failure_slope(V, k, WeightFunction::paper(V, 0.0, 1.0), RampKind::InnerRamp,
                               {2, 4, 8, 16}, {0.25, 8.0, 1});
  CHECK(fit.slope <= 0.05);
}

TEST_CASE("form energy of the inner ramp scales like n^{-alpha}") {
  auto V = PotentialSpec::log_polynomial(1.5, 1);
  auto k = KernelProfile::fractional(1.0, 1);
  double bound = 0.0;
  std::vector<double> scaled;
  for (int n : {2, 4, 8}) {
    Grid g = make_grid(1, 8.0 * n, static_cast<int>(std::lround(2 * 8.0 * n / 0.25)) + 1);
    DiscreteForm form = assemble(V, k, WeightFunction::constant(), g, KernelKind::RhoForm);
    TestFunctionFamily fam = build_family(RampKind::InnerRamp, n, g);
    double fv = form_value(form, fam.values);
    scaled.push_back(fv * std::pow(n, 1.0));
    bound = std::max(bound, scaled.back());
  }
  // n^alpha * D(f_n) stays bounded across the sweep
  for (double s : scaled) CHECK(s <= 1.2 * scaled.front() + 1e-12);
  CHECK(bound > 0.0);
}

TEST_CASE("weight optimality probe") {
  auto V = PotentialSpec::quadratic(1);
  auto k = KernelProfile::fractional(1.0, 1);
  WeightFunction omega = WeightFunction::paper(V, 0.0, 1.0);
  GridPolicy policy{0.25, 8.0, 1};
  std::vector<int> ns{2, 4, 8, 16};

  OptimalityProbe same = weight_optimality_probe(V, k, omega, ns, policy);
  CHECK(same.verdict == OptimalityVerdict::DoesNotFail);

  // omega* = omega log(e + |x|)
  WeightFunction omegaLog = WeightFunction::custom([V](double r) {
    return V.value(r) - 2.0 * std::log1p(r) + std::log(std::log(M_E + r));
  });
  OptimalityProbe logged = weight_optimality_probe(V, k, omegaLog, ns, policy);
  CHECK(logged.verdict == OptimalityVerdict::Fails);

  // omega* = omega (1+|x|)^{1/2}
  WeightFunction omegaHalf = WeightFunction::custom(
      [V](double r) { return V.value(r) - 1.5 * std::log1p(r); });
  OptimalityProbe half = weight_optimality_probe(V, k, omegaHalf, ns, policy);
  CHECK(half.verdict == OptimalityVerdict::Fails);
  CHECK(half.fit.slope > logged.fit.slope);
}

TEST_CASE("beta rate: polynomial tail reproduces the analytic exponent") {
  auto V = PotentialSpec::log_polynomial(2.0, 1);
  WeightFunction omega = WeightFunction::paper(V, 0.0, 1.0);
  std::vector<double> rGrid;
  for (int i = 0; i < 16; ++i) rGrid.push_back(std::pow(10.0, -3.0 + 2.0 * i / 15.0));
  SuperPoincareProfile prof = beta_rate(V, 1.0, omega, 1.0, rGrid);

  // fit log beta vs log(1/r)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& b : prof.betaSamples) {
    double x = std::log(1.0 / b.r), y = std::log(b.beta);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  // d/alpha + (d+eps)(2 alpha+d)/(alpha (eps-alpha)) = 1 + 9 = 10
  INFO("beta slope = " << slope);
  CHECK(slope == Catch::Approx(10.0).epsilon(0.20));

  // infimum search never loses to the closed-form point
  for (const auto& b : prof.betaSamples) CHECK(b.beta <= b.betaClosedForm * (1.0 + 1e-9));
  // beta is nonincreasing in r
  for (size_t i = 1; i < prof.betaSamples.size(); ++i)
    CHECK(prof.betaSamples[i].beta <= prof.betaSamples[i - 1].beta * (1.0 + 1e-9));
}

TEST_CASE("beta rate: bounded potential gives the pure r^{-d/alpha} rate") {
  auto V = PotentialSpec::custom([](double r) { return 1.0 / (1.0 + r); }, 1, false);
  WeightFunction omega = WeightFunction::power(1.0);  // 1 + |x|
  std::vector<double> rGrid;
  for (int i = 0; i < 12; ++i) rGrid.push_back(std::pow(10.0, -4.0 + 2.0 * i / 11.0));
  SuperPoincareProfile prof = beta_rate(V, 1.0, omega, 1.0, rGrid);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& b : prof.betaSamples) {
    double x = std::log(1.0 / b.r), y = std::log(b.beta);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope == Catch::Approx(1.0).epsilon(0.20));
}

TEST_CASE("beta rate guards") {
  auto V = PotentialSpec::log_polynomial(2.0, 1);
  CHECK_THROWS_AS(beta_rate(V, 1.0, WeightFunction::constant(), 1.0, {0.1}),
                  WeightNotDiverging);
  // kappa below the weight floor is 0 by convention
  WeightFunction omega = WeightFunction::power(1.0);
  std::vector<double> rg{0.01};
  SuperPoincareProfile prof = beta_rate(V, 1.0, omega, 1.0, rg);
  CHECK(prof.kappaInverse(0.5) == 0.0);
  CHECK(prof.kappaInverse(100.0) > 0.0);
}

TEST_CASE("concentration scan: two-sided exponential") {
  auto V = PotentialSpec::custom([](double r) { return 2.0 * r; }, 1, true);
  MeasureHandle mu = measure(V, MeasureScale::V);
  std::vector<double> lambdas;
  for (int i = 1; i <= 15; ++i) lambdas.push_back(0.2 * i);
  ConcentrationReport rep = concentration_scan(mu, lambdas);
  CHECK(rep.lambdaStar == Catch::Approx(1.8).margin(0.21));
  // monotone structure: a finite prefix then a divergent suffix
  bool divergentSeen = false;
  for (const auto& p : rep.momentCurve) {
    if (p.verdict != Verdict::Convergent) divergentSeen = true;
    if (divergentSeen) CHECK(p.verdict != Verdict::Convergent);
  }
  // q and its inverse
  CHECK(rep.qFunction(1.0) == Catch::Approx(std::exp(-2.0)).epsilon(1e-9));
  CHECK(rep.qInverse(std::exp(-2.0)) == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(rep.qInverse(2.0) == 0.0);
}

TEST_CASE("concentration scan: polynomial tails have no exponential moments") {
  auto V = PotentialSpec::log_polynomial(1.5, 1);
  MeasureHandle mu = measure(V, MeasureScale::V);
  ConcentrationReport rep = concentration_scan(mu, {0.1, 0.2, 0.5, 1.0});
  CHECK(rep.lambdaStar == 0.0);
  for (const auto& p : rep.momentCurve) CHECK(p.verdict == Verdict::Divergent);
}

TEST_CASE("concentration scan: stretched-exponential fails the stretched check") {
  auto V = PotentialSpec::stretched_exp(0.5, 1);
  MeasureHandle mu = measure(V, MeasureScale::V);
  ConcentrationReport rep = concentration_scan(mu, {0.5, 1.0}, 1.0, 1.0);
  CHECK(rep.stretched.verdict == Verdict::Divergent);
  CHECK(rep.lambdaStar == 0.0);
}

TEST_CASE("moment curve is monotone: finite at lambda implies finite below") {
  auto V = PotentialSpec::custom([](double r) { return 2.0 * r; }, 1, true);
  MeasureHandle mu = measure(V, MeasureScale::V);
  quad::LogIntegral hi = exp_moment(mu, 1.5);
  quad::LogIntegral lo = exp_moment(mu, 0.7);
  REQUIRE(hi.verdict == Verdict::Convergent);
  REQUIRE(lo.verdict == Verdict::Convergent);
  CHECK(std::exp(lo.logValue) <= std::exp(hi.logValue));
}
