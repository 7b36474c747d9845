#include <catch2/catch_amalgamated.hpp>

#include "nlform/quad.hpp"

using namespace nlform;

TEST_CASE("gauss panel integrates smooth functions to machine precision") {
  auto logCubic = [](double r) { return 3.0 * std::log(r); };
  double v = std::exp(quad::log_gauss_panel(logCubic, 0.0, 1.0));
  CHECK(v == Catch::Approx(0.25).epsilon(1e-12));

  auto logExp = [](double r) { return -r; };
  double e = std::exp(quad::log_gauss_panel(logExp, 0.0, 5.0));
  CHECK(e == Catch::Approx(1.0 - std::exp(-5.0)).epsilon(1e-12));
}

TEST_CASE("gauss panel resolves steep exponentials via bisection") {
  // e^{-2r} over [32, 64] varies by e^{-64}; a single 16-point panel cannot
  // see that, the variation splitter must
  auto logf = [](double r) { return -2.0 * r; };
  double v = std::exp(quad::log_gauss_panel(logf, 32.0, 64.0));
  double exact = 0.5 * (std::exp(-64.0) - std::exp(-128.0));
  CHECK(v == Catch::Approx(exact).epsilon(1e-10));
}

TEST_CASE("tail integrator: convergent power and exponential tails") {
  auto inv2 = [](double r) { return -2.0 * std::log(r); };
  quad::LogIntegral li = quad::integrate_tail_log(inv2, {1.0, 1e-10, 12});
  REQUIRE(li.verdict == quad::Verdict::Convergent);
  CHECK(std::exp(li.logValue) == Catch::Approx(1.0).epsilon(1e-8));

  auto expTail = [](double r) { return -r; };
  li = quad::integrate_tail_log(expTail, {1.0, 1e-10, 12});
  REQUIRE(li.verdict == quad::Verdict::Convergent);
  CHECK(std::exp(li.logValue) == Catch::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("tail integrator flags the log-divergent boundary") {
  auto inv1 = [](double r) { return -std::log(r); };
  quad::LogIntegral li = quad::integrate_tail_log(inv1, {1.0, 1e-8, 12});
  CHECK(li.verdict == quad::Verdict::Divergent);

  auto growing = [](double r) { return 0.3 * r; };
  li = quad::integrate_tail_log(growing, {1.0, 1e-8, 12});
  CHECK(li.verdict == quad::Verdict::Divergent);
}

TEST_CASE("tail integrator extrapolates slow power tails within the cap") {
  // r^{-1.5}: integral 2, annulus ratio 2^{-0.5}; 12 doublings alone leave a
  // visible tail which the geometric extrapolation must fold in
  auto f = [](double r) { return -1.5 * std::log(r); };
  quad::LogIntegral li = quad::integrate_tail_log(f, {1.0, 1e-8, 12});
  REQUIRE(li.verdict == quad::Verdict::Convergent);
  CHECK(std::exp(li.logValue) == Catch::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("singular integrator: r^{-1/2} converges, r^{-1} diverges") {
  auto sqrtSing = [](double r) { return -0.5 * std::log(r); };
  quad::LogIntegral li = quad::integrate_singular_log(sqrtSing, {1.0, 1e-10, 48});
  REQUIRE(li.verdict == quad::Verdict::Convergent);
  CHECK(std::exp(li.logValue) == Catch::Approx(2.0).epsilon(1e-8));

  auto hyper = [](double r) { return -std::log(r); };
  li = quad::integrate_singular_log(hyper, {1.0, 1e-8, 48});
  CHECK(li.verdict == quad::Verdict::Divergent);

  auto essential = [](double r) { return 1.0 / r; };  // e^{1/r} blows up
  li = quad::integrate_singular_log(essential, {1.0, 1e-8, 48});
  CHECK(li.verdict == quad::Verdict::Divergent);
}

TEST_CASE("singular integrator handles exponents near the regular end") {
  // r^{-0.99}: panel ratio 2^{-0.01}, only extrapolation can finish
  auto f = [](double r) { return -0.99 * std::log(r); };
  quad::LogIntegral li = quad::integrate_singular_log(f, {1.0, 1e-8, 48});
  REQUIRE(li.verdict == quad::Verdict::Convergent);
  CHECK(std::exp(li.logValue) == Catch::Approx(100.0).epsilon(1e-4));
}

TEST_CASE("signed tail integrator matches analytic values and flags growth") {
  auto f = [](double r) { return std::exp(-r) * std::cos(0.5 * r); };
  quad::SignedTail st = quad::integrate_tail_signed(f, 1.0, 1e-10);
  REQUIRE(st.verdict == quad::Verdict::Convergent);
  // brute-force trapezoid reference for the oscillating integrand
  double ref = 0.0;
  const int N = 2000000;
  double hi = 60.0;
  double h = (hi - 1.0) / N;
  for (int i = 0; i < N; ++i) {
    double a = 1.0 + i * h, b = a + h;
    ref += 0.5 * (f(a) + f(b)) * h;
  }
  CHECK(st.value == Catch::Approx(ref).margin(1e-8));

  auto grow = [](double r) { return 1.0 + 0.01 * r; };
  st = quad::integrate_tail_signed(grow, 1.0, 1e-8);
  CHECK(st.verdict == quad::Verdict::Divergent);
}
