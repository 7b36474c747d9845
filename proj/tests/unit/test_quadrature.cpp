#include <catch2/catch_amalgamated.hpp>

#include "nlform/quadrature.hpp"

using namespace nlform;

namespace {

// brute-force dyadic-panel oracle: log-spaced trapezoid over [lo, hi]
double panel_oracle(const std::function<double(double)>& f, double lo, double hi, int n) {
  double acc = 0.0;
  double ratio = std::pow(hi / lo, 1.0 / n);
  double a = lo;
  for (int i = 0; i < n; ++i) {
    double b = a * ratio;
    acc += 0.5 * (f(a) + f(b)) * (b - a);
    a = b;
  }
  return acc;
}

}  // namespace

TEST_CASE("levy integral: tempered kernel value vs panel oracle") {
  auto k = KernelProfile::fractional_tempered(1.0, 1.0, 1);
  IntegralVerdict v = levy_integral(k);
  REQUIRE(v.verdict == Verdict::Convergent);
  auto f = [](double r) {
    return std::exp(-r) * std::pow(r, -2.0) * std::min(1.0, r * r);
  };
  double oracle = panel_oracle(f, 1e-12, 60.0, 10000000);
  CHECK(v.value == Catch::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("levy integral verdicts") {
  CHECK(levy_integral(KernelProfile::fractional(1.99, 3)).verdict == Verdict::Convergent);
  // rho = r^{-(d+2)}: near-zero integrand r^{-1}
  auto tooSingular = KernelProfile::custom([](double r) { return std::pow(r, -3.0); }, 1, true);
  CHECK(levy_integral(tooSingular).verdict == Verdict::Divergent);
}

TEST_CASE("levy integral value scales linearly under kernel scaling") {
  auto k = KernelProfile::fractional_tempered(0.7, 0.5, 2);
  auto k3 = KernelProfile::custom(
      [](double r) { return 3.0 * std::exp(-0.5 * r) * std::pow(r, -2.7); }, 2, true);
  double v1 = levy_integral(k).value;
  double v3 = levy_integral(k3).value;
  CHECK(v3 == Catch::Approx(3.0 * v1).epsilon(1e-8));
}

TEST_CASE("inverse kernel ball integral") {
  CHECK(inverse_kernel_ball_integral(KernelProfile::fractional(0.5, 1)).verdict ==
        Verdict::Convergent);
  // 1/rho = e^{1/r} blows up superpolynomially toward 0
  auto essential = KernelProfile::custom([](double r) { return std::exp(-1.0 / r); }, 1, true);
  CHECK(inverse_kernel_ball_integral(essential).verdict == Verdict::Divergent);

  auto k = KernelProfile::fractional_tempered(1.0, 2.0, 2);
  IntegralVerdict v = inverse_kernel_ball_integral(k);
  REQUIRE(v.verdict == Verdict::Convergent);
  auto f = [](double r) { return r * std::exp(2.0 * r) * std::pow(r, 3.0); };
  double oracle = panel_oracle(f, 1e-12, 1.0, 4000000);
  CHECK(v.value == Catch::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("tail moment integral verdicts by power comparison") {
  CHECK(tail_moment_integral(KernelProfile::fractional(1.0, 1), 0.5).verdict ==
        Verdict::Convergent);
  CHECK(tail_moment_integral(KernelProfile::fractional(0.3, 1), 0.5).verdict ==
        Verdict::Divergent);
  CHECK(tail_moment_integral(KernelProfile::fractional_tempered(0.3, 0.1, 1), 0.9).verdict ==
        Verdict::Convergent);
  CHECK_THROWS_AS(tail_moment_integral(KernelProfile::fractional(1.0, 1), 1.5), BadParameter);
}

TEST_CASE("weighted density integral: power-counting verdicts") {
  auto frac = [](double alpha, int d) { return KernelProfile::fractional(alpha, d); };
  // quadratic potential beats any polynomial-exponential combination
  CHECK(weighted_density_integral(PotentialSpec::quadratic(1),
                                  KernelProfile::fractional_tempered(1.0, 1.0, 1),
                                  DensityScale::TwoV)
            .verdict == Verdict::Convergent);
  // polynomial tails: e^{-2V}/gamma ~ r^{alpha - 1 - 2 eps}, divergent iff
  // eps <= alpha/2 (power-counting oracle below)
  struct Case {
    double eps, alpha;
  };
  for (Case c : {Case{0.3, 1.0}, Case{0.7, 1.0}, Case{3.0, 0.5}, Case{0.2, 0.5},
                 Case{1.5, 1.9}}) {
    double exponent = c.alpha - 1.0 - 2.0 * c.eps;  // radial integrand power, d = 1
    Verdict expected = exponent >= -1.0 ? Verdict::Divergent : Verdict::Convergent;
    IntegralVerdict got = weighted_density_integral(PotentialSpec::log_polynomial(c.eps, 1),
                                                    frac(c.alpha, 1), DensityScale::TwoV);
    INFO("eps=" << c.eps << " alpha=" << c.alpha << " exponent=" << exponent);
    CHECK(got.verdict == expected);
  }
  // the exact log-divergent boundary (eps = alpha/2) must never be called
  // convergent; Inconclusive is the designed outcome there
  CHECK(weighted_density_integral(PotentialSpec::log_polynomial(0.5, 1), frac(1.0, 1),
                                  DensityScale::TwoV)
            .verdict != Verdict::Convergent);
  // 3V scale: divergent iff 3 eps <= alpha - 1 (d = 1)
  CHECK(weighted_density_integral(PotentialSpec::log_polynomial(0.1, 1), frac(1.5, 1),
                                  DensityScale::ThreeV)
            .verdict == Verdict::Divergent);
  CHECK(weighted_density_integral(PotentialSpec::log_polynomial(1.0, 1), frac(1.5, 1),
                                  DensityScale::ThreeV)
            .verdict == Verdict::Convergent);
}

TEST_CASE("verdicts are refinement-stable under quadTol/10") {
  std::vector<std::pair<double, double>> cases{{0.3, 1.0}, {0.7, 1.0}, {3.0, 0.5}, {1.5, 1.9}};
  for (auto [eps, alpha] : cases) {
    auto V = PotentialSpec::log_polynomial(eps, 1);
    auto k = KernelProfile::fractional(alpha, 1);
    Verdict v8 = weighted_density_integral(V, k, DensityScale::TwoV, 1e-8).verdict;
    Verdict v9 = weighted_density_integral(V, k, DensityScale::TwoV, 1e-9).verdict;
    CHECK(v8 == v9);
    CHECK(levy_integral(k, 1e-8).verdict == levy_integral(k, 1e-9).verdict);
    CHECK(tail_moment_integral(k, 0.4, 1e-8).verdict ==
          tail_moment_integral(k, 0.4, 1e-9).verdict);
  }
}

TEST_CASE("canonical power-law verdict matrix matches the exponent rule") {
  struct Row {
    const char* which;
    int d;
    double alpha;   // family exponent (or raw power for custom)
    double alpha0;  // tail moment order where used
    bool custom;
    double p;  // custom kernel power rho = r^{-p}
  };
  // twelve canonical cases across the three integral conditions
  std::vector<Row> rows{
      {"levy", 1, 0.5, 0, false, 0},   {"levy", 1, 1.5, 0, false, 0},
      {"levy", 2, 1.0, 0, false, 0},   {"levy", 3, 1.99, 0, false, 0},
      {"levy", 1, 0, 0, true, 3.0},    {"levy", 1, 0, 0, true, 1.0},
      {"ball", 1, 0.5, 0, false, 0},   {"ball", 2, 1.0, 0, false, 0},
      {"ball", 1, 0, 0, true, -1.5},   {"tail", 1, 1.0, 0.5, false, 0},
      {"tail", 1, 0.3, 0.5, false, 0}, {"tail", 2, 1.2, 0.5, false, 0},
  };
  int checked = 0;
  for (const Row& row : rows) {
    KernelProfile k = row.custom
                          ? KernelProfile::custom(
                                [p = row.p](double r) { return std::pow(r, -p); }, row.d,
                                row.p >= 0)
                          : KernelProfile::fractional(row.alpha, row.d);
    double p = row.custom ? row.p : row.d + row.alpha;
    if (std::string(row.which) == "levy") {
      bool nearOk = row.d + 1 - p > -1.0;   // integrand r^{d+1-p} toward 0
      bool tailOk = row.d - 1 - p < -1.0;   // integrand r^{d-1-p} toward infinity
      Verdict expected = nearOk && tailOk ? Verdict::Convergent : Verdict::Divergent;
      CHECK(levy_integral(k).verdict == expected);
    } else if (std::string(row.which) == "ball") {
      bool ok = row.d - 1 + p > -1.0;  // integrand r^{d-1+p} toward 0
      CHECK(inverse_kernel_ball_integral(k).verdict ==
            (ok ? Verdict::Convergent : Verdict::Divergent));
    } else {
      bool ok = row.d + row.alpha0 - 1 - p < -1.0;
      CHECK(tail_moment_integral(k, row.alpha0).verdict ==
            (ok ? Verdict::Convergent : Verdict::Divergent));
    }
    ++checked;
  }
  CHECK(checked == 12);
}
