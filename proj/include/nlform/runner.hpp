#pragma once

// Executes a scenario's tasks in dependency order (check before gap and
// lyapunov; gap feeds its constant into beta). A task that throws is
// recorded as failed without aborting its siblings; negative mathematical
// findings (drift fit failure, diverging sweep) are ordinary results.

#include <random>

#include "nlform/report.hpp"

namespace nlform {

namespace detail {

inline CriterionReport run_check_one(const Scenario& s, Criterion which, double alpha0) {
  switch (which) {
    case Criterion::TemperedTail:
      return check_tempered_tail(s.potential, s.kernel, alpha0);
    case Criterion::FractionalTail:
      return check_fractional_tail(s.potential, s.kernel, alpha0);
    case Criterion::GeneralKernel:
      return check_general_kernel(s.potential, s.kernel, alpha0, s.tol.quadTol);
    case Criterion::GirsanovKernel:
      return check_girsanov_kernel(s.potential, s.kernel, alpha0, s.tol.quadTol);
    case Criterion::GirsanovTempered:
      return check_girsanov_tempered(s.potential, s.kernel, alpha0);
    case Criterion::GirsanovFractional:
      return check_girsanov_fractional(s.potential, s.kernel, alpha0);
    default:
      return check_weight_inside_form(s.potential, s.kernel.alpha());
  }
}

inline double alpha0_bound(const Scenario& s, Criterion which) {
  if (which == Criterion::FractionalTail) return 0.5 * s.kernel.alpha();
  if (which == Criterion::GirsanovFractional) return std::min(s.kernel.alpha(), 1.0);
  return 1.0;
}

inline ordered_json task_check(const Scenario& s) {
  std::vector<Criterion> checks;
  bool tempered = s.kernel.family() == KernelFamily::FractionalTempered && s.kernel.delta() > 0;
  bool fractional = s.kernel.family() == KernelFamily::Fractional;
  if (s.formKind == KernelKind::RhoForm) {
    if (tempered) checks.push_back(Criterion::TemperedTail);
    if (fractional) checks.push_back(Criterion::FractionalTail);
    checks.push_back(Criterion::GeneralKernel);
  } else {
    if (tempered) checks.push_back(Criterion::GirsanovTempered);
    if (fractional) checks.push_back(Criterion::GirsanovFractional);
    checks.push_back(Criterion::GirsanovKernel);
  }
  ordered_json reports = ordered_json::array();
  for (Criterion which : checks) {
    CriterionReport rep =
        s.alpha0 ? run_check_one(s, which, std::min(*s.alpha0,
                                                    0.999 * alpha0_bound(s, which)))
                 : sweep_alpha0([&](double a0) { return run_check_one(s, which, a0); },
                                alpha0_bound(s, which));
    reports.push_back(to_json(rep));
  }
  ordered_json j;
  j["reports"] = reports;
  return j;
}

// seeded symmetric/constants/PSD diagnostics on the scenario's own grid
inline ordered_json form_diagnostics(const DiscreteForm& form, std::uint64_t seed) {
  const Eigen::MatrixXd& A = form.A;
  double normA = A.cwiseAbs().maxCoeff();
  double sym = (A - A.transpose()).cwiseAbs().maxCoeff();
  double cons = (A * Eigen::VectorXd::Ones(A.rows())).cwiseAbs().maxCoeff();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worstRayleigh = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    Eigen::VectorXd x(A.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    double q = x.dot(A * x) / (normA * x.squaredNorm());
    worstRayleigh = std::min(worstRayleigh, q);
  }
  ordered_json j;
  j["matrix_norm"] = detail::num(normA);
  j["symmetry_error"] = detail::num(sym);
  j["constants_residual"] = detail::num(cons);
  j["worst_rayleigh_probe"] = detail::num(worstRayleigh);
  return j;
}

inline ordered_json task_gap(const Scenario& s, double* c0out) {
  StabilitySweep sweep = constant_stability_sweep(
      s.potential, s.kernel, s.weight, s.sweep_radii_or_default(), s.formKind, s.slopeSpacing,
      {s.tol.quadTol, s.threads});
  ordered_json j;
  j["sweep"] = to_json(sweep);
  double R = sweep.radii.back();
  int npa = static_cast<int>(std::lround(2.0 * R / s.slopeSpacing)) + 1;
  Grid g = make_grid(s.dimension(), R, npa);
  DiscreteForm form = assemble(s.potential, s.kernel, s.weight, g, s.formKind,
                               {s.tol.quadTol, s.threads});
  GapResult gap = best_constant(form);
  j["best_constant"] = detail::num(gap.bestConstant);
  j["residual"] = detail::num(gap.residual);
  j["method"] = to_string(gap.method);
  ordered_json ext = ordered_json::array();
  for (int i = 0; i < gap.extremizer.size(); ++i) ext.push_back(detail::num(gap.extremizer[i]));
  j["extremizer"] = ext;
  j["form_diagnostics"] = form_diagnostics(form, s.seed);
  if (c0out) *c0out = gap.bestConstant;
  return j;
}

inline ordered_json task_lyapunov(const Scenario& s) {
  Grid g = make_grid(s.dimension(), s.gridRadius, s.pointsPerAxis);
  GeneratorVariant variant = s.formKind == KernelKind::RhoForm
                                 ? GeneratorVariant::RhoTruncated
                                 : GeneratorVariant::PsiTruncated;
  double a0 = s.alpha0.value_or(0.5);
  DriftFitResult fit = fit_drift_certificate(s.potential, s.kernel, a0, g, s.tol.certTol,
                                             variant, s.tol.quadTol, s.threads);
  ordered_json j;
  if (fit.ok()) {
    j["outcome"] = "certificate";
    j["certificate"] = to_json(*fit.certificate);
  } else {
    j["outcome"] = "failure";
    j["failure"] = to_string(*fit.failure);
  }
  return j;
}

inline ordered_json task_sharpness(const Scenario& s) {
  GridPolicy policy{s.slopeSpacing, s.slopeRadiusFactor, s.threads};
  SlopeFit fit = failure_slope(s.potential, s.kernel, s.weight, s.rampKind, s.nSequence,
                               policy, s.formKind);
  ordered_json j;
  j["slope"] = to_json(fit);
  j["fails_on_proxy"] = fit.slope > s.tol.slopeTol;
  return j;
}

inline ordered_json task_beta(const Scenario& s, double c0) {
  SuperPoincareProfile prof =
      beta_rate(s.potential, s.kernel.alpha(), s.weight, c0, s.r_grid_or_default());
  ordered_json j;
  ordered_json samples = ordered_json::array();
  for (const auto& b : prof.betaSamples)
    samples.push_back({{"r", detail::num(b.r)},
                       {"beta", detail::num(b.beta)},
                       {"beta_closed_form", detail::num(b.betaClosedForm)}});
  j["samples"] = samples;
  j["c0"] = detail::num(c0);
  // fitted log beta vs log(1/r) slope
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& b : prof.betaSamples) {
    if (!(b.beta > 0) || !std::isfinite(b.beta)) continue;
    double x = std::log(1.0 / b.r), y = std::log(b.beta);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  j["log_slope_vs_inv_r"] =
      detail::num(m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : quad::kNaN);
  return j;
}

inline ordered_json task_concentration(const Scenario& s) {
  MeasureScale scale =
      s.formKind == KernelKind::RhoForm ? MeasureScale::V : MeasureScale::TwoV;
  MeasureHandle mu = measure(s.potential, scale, s.tol.quadTol);
  ConcentrationReport rep = concentration_scan(mu, s.lambda_grid_or_default(), s.stretchedC2,
                                               s.stretchedC3, s.tol.quadTol);
  ordered_json j;
  j["lambda_star"] = detail::num(rep.lambdaStar);
  ordered_json curve = ordered_json::array();
  for (const auto& p : rep.momentCurve) {
    ordered_json row;
    row["lambda"] = detail::num(p.lambda);
    if (p.verdict == Verdict::Convergent) row["value"] = detail::num(p.value);
    row["verdict"] = quad::to_string(p.verdict);
    curve.push_back(row);
  }
  j["moment_curve"] = curve;
  j["stretched"] = {{"c2", detail::num(rep.stretched.c2)},
                    {"c3", detail::num(rep.stretched.c3)},
                    {"verdict", quad::to_string(rep.stretched.verdict)}};
  return j;
}

}  // namespace detail

inline RunReport run(const Scenario& s) {
  RunReport report;
  report.scenarioEcho = s.echo;
  report.settings = {{"quad_tol", s.tol.quadTol},
                     {"cert_tol", s.tol.certTol},
                     {"slope_tol", s.tol.slopeTol},
                     {"seed", s.seed},
                     {"threads", s.threads}};
  auto has = [&](const char* t) {
    for (const auto& task : s.tasks)
      if (task == t) return true;
    return false;
  };
  auto runTask = [&](const char* name, const std::function<ordered_json()>& body) {
    TaskOutcome out;
    out.task = name;
    try {
      out.result = body();
    } catch (const std::exception& e) {
      out.errored = true;
      out.error = e.what();
    }
    report.tasks.push_back(std::move(out));
  };

  double c0 = 1.0;
  if (has("check")) runTask("check", [&] { return detail::task_check(s); });
  if (has("gap")) runTask("gap", [&] { return detail::task_gap(s, &c0); });
  if (has("lyapunov")) runTask("lyapunov", [&] { return detail::task_lyapunov(s); });
  if (has("sharpness")) runTask("sharpness", [&] { return detail::task_sharpness(s); });
  if (has("beta")) runTask("beta", [&] { return detail::task_beta(s, c0); });
  if (has("concentration"))
    runTask("concentration", [&] { return detail::task_concentration(s); });
  return report;
}

}  // namespace nlform
