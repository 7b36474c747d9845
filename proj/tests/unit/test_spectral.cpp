#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nlform/spectral.hpp"

using namespace nlform;

namespace {

DiscreteForm toy_complete_graph(double w, double omega = 1.0) {
  DiscreteForm form;
  form.grid = make_grid(1, 1.0, 3);
  form.A = Eigen::MatrixXd::Constant(3, 3, -w);
  for (int i = 0; i < 3; ++i) form.A(i, i) = 2.0 * w;
  form.massV = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  form.massWeighted = omega * form.massV;
  form.selfInvPairMass = Eigen::VectorXd::Zero(3);
  return form;
}

DiscreteForm gaussian_form(double R, int npa, const WeightFunction& w) {
  auto V = PotentialSpec::quadratic(1);
  auto k = KernelProfile::fractional(1.0, 1);
  return assemble(V, k, w, make_grid(1, R, npa), KernelKind::RhoForm);
}

}  // namespace

TEST_CASE("complete-graph toy: best constant against the brute eigensolve oracle") {
  double w = 0.4;
  DiscreteForm form = toy_complete_graph(w);
  GapResult gap = best_constant(form);

  // independent 3x3 brute force: centered weight pencil against A on the
  // complement of constants
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(3, 3) -
                      Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  Eigen::MatrixXd Vt = P.transpose() * form.massWeighted.asDiagonal() * P;
  double best = 0.0;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int probe = 0; probe < 20000; ++probe) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = g(rng);
    x.array() -= x.mean();
    double fv = x.dot(form.A * x);
    if (fv <= 0) continue;
    best = std::max(best, x.dot(Vt * x) / fv);
  }
  CHECK(gap.bestConstant == Catch::Approx(best).epsilon(1e-6));
  // symmetry forces every mean-zero vector to be extremal: 1/(9w)
  CHECK(gap.bestConstant == Catch::Approx(1.0 / (9.0 * w)).epsilon(1e-10));
}

TEST_CASE("best constant scales inversely with the form") {
  DiscreteForm a = toy_complete_graph(0.4);
  DiscreteForm b = toy_complete_graph(0.4);
  b.A *= 5.0;
  CHECK(best_constant(b).bestConstant ==
        Catch::Approx(best_constant(a).bestConstant / 5.0).epsilon(1e-12));
}

TEST_CASE("extremizer certificate: quotient equality and mu-mean zero") {
  DiscreteForm form = gaussian_form(4.0, 33, WeightFunction::constant());
  GapResult gap = best_constant(form);
  double quotient = weighted_variance(form, gap.extremizer) / form_value(form, gap.extremizer);
  CHECK(quotient == Catch::Approx(gap.bestConstant).epsilon(1e-8));
  CHECK(weighted_variance(form, gap.extremizer) <=
        gap.bestConstant * form_value(form, gap.extremizer) * (1.0 + 1e-8));
  double mean = form.massV.dot(gap.extremizer) / form.massV.sum();
  CHECK(std::abs(mean) <= 1e-10);
  CHECK(gap.residual <= 1e-8);
}

TEST_CASE("dense oracle and inverse iteration agree to 1e-8") {
  for (int npa : {17, 33, 65}) {
    DiscreteForm form = gaussian_form(4.0, npa, WeightFunction::constant());
    GapResult dense = best_constant(form, {GapMethod::DenseOracle});
    GapResult iter = best_constant(form, {GapMethod::InverseIteration});
    INFO("npa=" << npa);
    CHECK(std::abs(dense.bestConstant - iter.bestConstant) <=
          1e-8 * dense.bestConstant);
  }
  // also on a weighted form
  auto V = PotentialSpec::quadratic(1);
  DiscreteForm wform = gaussian_form(4.0, 49, WeightFunction::paper(V, 0.0, 1.0));
  GapResult dense = best_constant(wform, {GapMethod::DenseOracle});
  GapResult iter = best_constant(wform, {GapMethod::InverseIteration});
  CHECK(std::abs(dense.bestConstant - iter.bestConstant) <= 1e-8 * dense.bestConstant);
}

TEST_CASE("weight domination is monotone") {
  DiscreteForm f1 = gaussian_form(4.0, 33, WeightFunction::constant());
  DiscreteForm f2 = gaussian_form(4.0, 33, WeightFunction::polynomial(1.0));  // 1 + |x|
  double c1 = best_constant(f1).bestConstant;
  double c2 = best_constant(f2).bestConstant;
  CHECK(c1 <= c2 * (1.0 + 1e-10));
}

TEST_CASE("disconnected proxy raises SingularForm") {
  // two decoupled pair-clusters: the form vanishes on (1,1,-1,-1), which is
  // mean-zero, so the pencil is singular
  DiscreteForm form;
  form.grid = make_grid(1, 1.0, 4);
  double w = 0.3;
  form.A = Eigen::MatrixXd::Zero(4, 4);
  form.A(0, 0) = form.A(1, 1) = form.A(2, 2) = form.A(3, 3) = w;
  form.A(0, 1) = form.A(1, 0) = -w;
  form.A(2, 3) = form.A(3, 2) = -w;
  form.massV = Eigen::VectorXd::Constant(4, 0.25);
  form.massWeighted = form.massV;
  form.selfInvPairMass = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(best_constant(form), SingularForm);
}

TEST_CASE("stability sweep: gaussian potential is stable") {
  auto V = PotentialSpec::quadratic(1);
  auto k = KernelProfile::fractional(1.0, 1);
  StabilitySweep sweep = constant_stability_sweep(V, k, WeightFunction::constant(),
                                                  {4.0, 6.0, 8.0}, KernelKind::RhoForm, 0.25);
  CHECK(sweep.verdict == SweepVerdict::Stable);
}

TEST_CASE("stability sweep: heavy tail without weight diverges") {
  auto V = PotentialSpec::log_polynomial(0.7, 1);
  auto k = KernelProfile::fractional(1.0, 1);
  StabilitySweep sweep = constant_stability_sweep(V, k, WeightFunction::constant(),
                                                  {8.0, 16.0, 32.0, 64.0}, KernelKind::RhoForm,
                                                  0.5);
  CHECK(sweep.verdict == SweepVerdict::Diverging);
  // constants grow monotonically along the sweep
  for (size_t i = 1; i < sweep.constants.size(); ++i)
    CHECK(sweep.constants[i] >= sweep.constants[i - 1] * 0.99);
}

TEST_CASE("stability sweep input validation") {
  auto V = PotentialSpec::quadratic(1);
  auto k = KernelProfile::fractional(1.0, 1);
  CHECK_THROWS_AS(constant_stability_sweep(V, k, WeightFunction::constant(), {4.0}),
                  BadParameter);
  CHECK_THROWS_AS(constant_stability_sweep(V, k, WeightFunction::constant(), {4.0, 3.0}),
                  BadParameter);
}
