#pragma once

// Scenario = one named configuration (potential, kernel, weight, grid,
// tasks, tolerances). Scenarios come from JSON configs or from the built-in
// library that ships the worked examples. Validation reports every problem,
// not just the first.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlform/discretization.hpp"
#include "nlform/sharpness.hpp"

namespace nlform {

using ordered_json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double quadTol = 1e-8;
  double certTol = 1e-6;
  double slopeTol = 0.1;
};

struct Scenario {
  Scenario(std::string nm, PotentialSpec V, KernelProfile k, WeightFunction w)
      : name(std::move(nm)), potential(std::move(V)), kernel(std::move(k)),
        weight(std::move(w)) {}

  std::string name;
  PotentialSpec potential;
  KernelProfile kernel;
  WeightFunction weight;
  KernelKind formKind = KernelKind::RhoForm;
  std::optional<double> alpha0;  // empty = sweep over alpha0
  double gridRadius = 16.0;
  int pointsPerAxis = 129;
  std::vector<std::string> tasks;
  Tolerances tol;
  RampKind rampKind = RampKind::InnerRamp;
  std::vector<int> nSequence{2, 4, 8, 16};
  double slopeSpacing = 0.25;
  double slopeRadiusFactor = 8.0;
  std::vector<double> sweepRadii;  // defaults derived from gridRadius
  std::vector<double> lambdaGrid;
  double stretchedC2 = 1.0;
  double stretchedC3 = 1.0;
  std::vector<double> rGrid;
  std::uint64_t seed = 12345;
  int threads = 1;
  ordered_json echo;  // serializable description for the report

  int dimension() const { return potential.dimension(); }

  std::vector<double> sweep_radii_or_default() const {
    if (!sweepRadii.empty()) return sweepRadii;
    return {0.5 * gridRadius, 0.75 * gridRadius, gridRadius};
  }
  std::vector<double> r_grid_or_default() const {
    if (!rGrid.empty()) return rGrid;
    std::vector<double> rs;
    for (int i = 0; i < 16; ++i) rs.push_back(std::pow(10.0, -3.0 + 2.0 * i / 15.0));
    return rs;
  }
  std::vector<double> lambda_grid_or_default() const {
    if (!lambdaGrid.empty()) return lambdaGrid;
    std::vector<double> ls;
    for (int i = 1; i <= 15; ++i) ls.push_back(0.2 * i);
    return ls;
  }
};

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> t{"check", "gap", "lyapunov", "sharpness",
                                          "beta", "concentration"};
  return t;
}

namespace detail {

inline ordered_json weight_echo(const WeightFunction& w) {
  ordered_json j;
  j["kind"] = to_string(w.kind());
  for (const auto& [k, v] : w.params()) j[k] = v;
  return j;
}

inline ordered_json scenario_echo(const Scenario& s, const std::string& potentialLabel) {
  ordered_json j;
  j["name"] = s.name;
  j["dimension"] = s.dimension();
  ordered_json pj;
  pj["family"] = to_string(s.potential.family());
  for (const auto& [k, v] : s.potential.params()) pj[k] = v;
  if (!potentialLabel.empty()) pj["label"] = potentialLabel;
  j["potential"] = pj;
  ordered_json kj;
  kj["family"] = to_string(s.kernel.family());
  kj["alpha"] = s.kernel.alpha();
  kj["delta"] = s.kernel.delta();
  j["kernel"] = kj;
  j["form"] = to_string(s.formKind);
  if (s.alpha0)
    j["alpha0"] = *s.alpha0;
  else
    j["alpha0"] = "sweep";
  j["grid"] = {{"radius", s.gridRadius}, {"points_per_axis", s.pointsPerAxis}};
  j["weight"] = weight_echo(s.weight);
  j["tasks"] = s.tasks;
  j["tolerances"] = {{"quad_tol", s.tol.quadTol},
                     {"cert_tol", s.tol.certTol},
                     {"slope_tol", s.tol.slopeTol}};
  j["ramp"] = to_string(s.rampKind);
  j["n_sequence"] = s.nSequence;
  j["slope_grid"] = {{"spacing", s.slopeSpacing}, {"radius_factor", s.slopeRadiusFactor}};
  j["sweep_radii"] = s.sweep_radii_or_default();
  j["lambda_grid"] = s.lambda_grid_or_default();
  j["stretched"] = {{"c2", s.stretchedC2}, {"c3", s.stretchedC3}};
  j["r_grid"] = s.r_grid_or_default();
  j["seed"] = s.seed;
  return j;
}

}  // namespace detail

inline void finalize_echo(Scenario& s, const std::string& potentialLabel = "") {
  s.echo = detail::scenario_echo(s, potentialLabel);
}

// ---- JSON config parsing -------------------------------------------------

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<std::string> errors;
  bool ok() const { return scenario.has_value() && errors.empty(); }
};

inline ParseResult parse_scenario_text(const std::string& text) {
  ParseResult res;
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    res.errors.push_back(std::string("parse error: ") + e.what());
    return res;
  }
  auto& errs = res.errors;
  auto need = [&](const char* key) -> bool {
    if (!j.contains(key)) {
      errs.push_back(std::string("missing field: ") + key);
      return false;
    }
    return true;
  };

  int dim = 1;
  if (need("dimension")) {
    dim = j["dimension"].get<int>();
    if (dim < 1 || dim > 2) errs.push_back("dimension: must be 1 or 2 (got " + std::to_string(dim) + ")");
  }

  std::optional<PotentialSpec> V;
  if (need("potential")) {
    const auto& pj = j["potential"];
    std::string fam = pj.value("family", "");
    try {
      if (fam == "linear")
        V = PotentialSpec::linear(pj.value("eps", 1.0), dim);
      else if (fam == "quadratic")
        V = PotentialSpec::quadratic(dim);
      else if (fam == "log_polynomial")
        V = PotentialSpec::log_polynomial(pj.value("eps", 1.0), dim);
      else if (fam == "stretched_exp")
        V = PotentialSpec::stretched_exp(pj.value("beta", 0.5), dim);
      else
        errs.push_back("potential.family: unknown family '" + fam +
                       "' (known: linear, quadratic, log_polynomial, stretched_exp;"
                       " custom potentials are API-only)");
    } catch (const std::exception& e) {
      errs.push_back(std::string("potential: ") + e.what());
    }
  }

  std::optional<KernelProfile> K;
  if (need("kernel")) {
    const auto& kj = j["kernel"];
    std::string fam = kj.value("family", "");
    double alpha = kj.value("alpha", 1.0);
    double delta = kj.value("delta", 0.0);
    if (!(alpha > 0.0 && alpha < 2.0))
      errs.push_back("kernel.alpha: must lie in (0,2), got " + std::to_string(alpha));
    if (delta < 0.0) errs.push_back("kernel.delta: must be >= 0");
    if (fam != "fractional" && fam != "fractional_tempered") {
      errs.push_back("kernel.family: unknown family '" + fam +
                     "' (known: fractional, fractional_tempered; custom kernels are API-only)");
    } else if (errs.empty() || (alpha > 0 && alpha < 2 && delta >= 0)) {
      try {
        K = fam == "fractional" ? KernelProfile::fractional(alpha, dim)
                                : KernelProfile::fractional_tempered(alpha, delta, dim);
      } catch (const std::exception& e) {
        errs.push_back(std::string("kernel: ") + e.what());
      }
    }
  }

  std::optional<WeightFunction> W;
  if (j.contains("weight") && V) {
    const auto& wj = j["weight"];
    std::string kind = wj.value("kind", "constant");
    try {
      if (kind == "constant")
        W = WeightFunction::constant();
      else if (kind == "paper")
        W = WeightFunction::paper(*V, wj.value("delta", 0.0),
                                  wj.value("alpha", j["kernel"].value("alpha", 1.0)));
      else if (kind == "polynomial")
        W = WeightFunction::polynomial(wj.value("beta", 1.0));
      else if (kind == "power")
        W = WeightFunction::power(wj.value("exponent", 1.0));
      else if (kind == "gamma" && K)
        W = WeightFunction::gamma(*V, *K);
      else
        errs.push_back("weight.kind: unknown kind '" + kind +
                       "' (known: constant, paper, polynomial, power, gamma)");
    } catch (const std::exception& e) {
      errs.push_back(std::string("weight: ") + e.what());
    }
  } else if (V) {
    W = WeightFunction::constant();
  }

  std::vector<std::string> tasks;
  if (need("tasks")) {
    for (const auto& t : j["tasks"]) {
      std::string task = t.get<std::string>();
      bool known = false;
      for (const auto& kt : known_tasks()) known = known || kt == task;
      if (!known)
        errs.push_back("tasks: unknown task '" + task + "'");
      else
        tasks.push_back(task);
    }
    if (tasks.empty()) errs.push_back("tasks: list must be nonempty");
  }

  double radius = 16.0;
  int npa = 129;
  if (j.contains("grid")) {
    radius = j["grid"].value("radius", 16.0);
    npa = j["grid"].value("points_per_axis", 129);
    if (!(radius > 0)) errs.push_back("grid.radius: must be positive");
    if (npa < 9) errs.push_back("grid.points_per_axis: must be >= 9, got " + std::to_string(npa));
  }

  if (!errs.empty() || !V || !K || !W) return res;

  Scenario s(j.value("name", "unnamed"), *V, *K, *W);
  s.formKind = j.value("form", std::string("rho")) == "psi" ? KernelKind::PsiForm
                                                            : KernelKind::RhoForm;
  if (j.contains("alpha0") && j["alpha0"].is_number()) s.alpha0 = j["alpha0"].get<double>();
  s.gridRadius = radius;
  s.pointsPerAxis = npa;
  s.tasks = tasks;
  if (j.contains("tolerances")) {
    s.tol.quadTol = j["tolerances"].value("quad_tol", s.tol.quadTol);
    s.tol.certTol = j["tolerances"].value("cert_tol", s.tol.certTol);
    s.tol.slopeTol = j["tolerances"].value("slope_tol", s.tol.slopeTol);
  }
  if (j.contains("ramp")) s.rampKind = j["ramp"] == "outer_ramp" ? RampKind::OuterRamp
                                                                 : RampKind::InnerRamp;
  if (j.contains("n_sequence")) s.nSequence = j["n_sequence"].get<std::vector<int>>();
  if (j.contains("sweep_radii")) s.sweepRadii = j["sweep_radii"].get<std::vector<double>>();
  if (j.contains("lambda_grid")) s.lambdaGrid = j["lambda_grid"].get<std::vector<double>>();
  if (j.contains("r_grid")) s.rGrid = j["r_grid"].get<std::vector<double>>();
  if (j.contains("stretched")) {
    s.stretchedC2 = j["stretched"].value("c2", 1.0);
    s.stretchedC3 = j["stretched"].value("c3", 1.0);
  }
  if (j.contains("slope_grid")) {
    s.slopeSpacing = j["slope_grid"].value("spacing", s.slopeSpacing);
    s.slopeRadiusFactor = j["slope_grid"].value("radius_factor", s.slopeRadiusFactor);
  }
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  finalize_echo(s);
  res.scenario = std::move(s);
  return res;
}

// ---- built-in scenario library --------------------------------------------

namespace detail {

inline Scenario make_builtin(std::string name, PotentialSpec V, KernelProfile k,
                             WeightFunction w, std::vector<std::string> tasks,
                             const std::string& label = "") {
  Scenario s(std::move(name), std::move(V), std::move(k), std::move(w));
  s.tasks = std::move(tasks);
  finalize_echo(s, label);
  return s;
}

}  // namespace detail

inline std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> v;

  {  // steep linear potential, tempered kernel: drift certificate exists
    auto V = PotentialSpec::linear(2.0, 1);
    auto k = KernelProfile::fractional_tempered(1.0, 1.0, 1);
    auto s = detail::make_builtin("steep-linear-tempered", V, k,
                                  WeightFunction::paper(V, 1.0, 1.0), {"check", "lyapunov"});
    s.alpha0 = 0.5;
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    finalize_echo(s);
    v.push_back(s);
  }
  {  // shallow linear potential: tail too heavy for the tempering, drift fails
    auto V = PotentialSpec::linear(0.5, 1);
    auto k = KernelProfile::fractional_tempered(1.0, 1.0, 1);
    auto s = detail::make_builtin("shallow-linear-tempered", V, k,
                                  WeightFunction::paper(V, 1.0, 1.0), {"check", "lyapunov"});
    s.alpha0 = 0.5;
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    finalize_echo(s);
    v.push_back(s);
  }
  {  // Gaussian-type potential with tempered kernel
    auto V = PotentialSpec::quadratic(1);
    auto k = KernelProfile::fractional_tempered(1.0, 1.0, 1);
    auto s = detail::make_builtin("gaussian-tempered", V, k,
                                  WeightFunction::paper(V, 1.0, 1.0), {"check", "gap"});
    s.alpha0 = 0.5;
    s.gridRadius = 8.0;
    s.pointsPerAxis = 65;
    s.sweepRadii = {4.0, 6.0, 8.0};
    finalize_echo(s);
    v.push_back(s);
  }
  {  // heavy polynomial tail inside the no-Poincare window, unweighted
    auto V = PotentialSpec::log_polynomial(0.7, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("heavy-tail-0.7", V, k, WeightFunction::constant(),
                                  {"check", "gap", "sharpness"});
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    s.sweepRadii = {16.0, 32.0, 64.0, 128.0};
    finalize_echo(s);
    v.push_back(s);
  }
  {  // same tail with the implied weight: constants stabilize
    auto V = PotentialSpec::log_polynomial(0.7, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("heavy-tail-0.7-weighted", V, k,
                                  WeightFunction::paper(V, 0.0, 1.0), {"check", "gap"});
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    s.sweepRadii = {16.0, 32.0, 64.0, 128.0};
    finalize_echo(s);
    v.push_back(s);
  }
  {  // tail light enough for the plain inequality
    auto V = PotentialSpec::log_polynomial(1.5, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("heavy-tail-1.5", V, k, WeightFunction::constant(),
                                  {"check", "gap", "sharpness"});
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    s.sweepRadii = {16.0, 32.0, 64.0, 128.0};
    finalize_echo(s);
    v.push_back(s);
  }
  {
    auto V = PotentialSpec::log_polynomial(1.5, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("heavy-tail-1.5-weighted", V, k,
                                  WeightFunction::paper(V, 0.0, 1.0), {"gap"});
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    s.sweepRadii = {16.0, 32.0, 64.0, 128.0};
    finalize_echo(s);
    v.push_back(s);
  }
  for (double eps : {0.7, 1.0, 1.3}) {  // psi-form threshold family
    auto V = PotentialSpec::log_polynomial(eps, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "girsanov-threshold-%.1f", eps);
    auto s = detail::make_builtin(buf, V, k, WeightFunction::constant(), {"sharpness"});
    s.formKind = KernelKind::PsiForm;
    s.rampKind = RampKind::OuterRamp;
    s.gridRadius = 16.0;
    s.pointsPerAxis = 129;
    finalize_echo(s);
    v.push_back(s);
  }
  {  // super-Poincare rate for a polynomial tail above the threshold
    auto V = PotentialSpec::log_polynomial(2.0, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("super-poincare-rate", V, k,
                                  WeightFunction::paper(V, 0.0, 1.0), {"gap", "beta"});
    s.gridRadius = 32.0;
    s.pointsPerAxis = 257;
    s.sweepRadii = {8.0, 16.0, 32.0};
    finalize_echo(s);
    v.push_back(s);
  }
  {  // two-sided exponential: moments finite strictly below the decay rate
    auto V = PotentialSpec::custom([](double r) { return 2.0 * r; }, 1, true);
    auto k = KernelProfile::fractional_tempered(1.0, 1.0, 1);
    auto s = detail::make_builtin("laplace-moments", V, k, WeightFunction::constant(),
                                  {"concentration"}, "2|x|");
    finalize_echo(s, "2|x|");
    v.push_back(s);
  }
  {  // polynomial tail: every exponential moment diverges
    auto V = PotentialSpec::log_polynomial(1.5, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("heavy-tail-moments", V, k, WeightFunction::constant(),
                                  {"concentration"});
    std::vector<double> ls;
    for (int i = 1; i <= 10; ++i) ls.push_back(0.1 * i);
    s.lambdaGrid = ls;
    finalize_echo(s);
    v.push_back(s);
  }
  {  // stretched-exponential tail: fails the stretched-integral check
    auto V = PotentialSpec::stretched_exp(0.5, 1);
    auto k = KernelProfile::fractional(1.0, 1);
    auto s = detail::make_builtin("stretched-moments", V, k, WeightFunction::constant(),
                                  {"concentration"});
    s.lambdaGrid = {0.5, 1.0};
    s.stretchedC2 = 1.0;
    s.stretchedC3 = 1.0;
    finalize_echo(s);
    v.push_back(s);
  }
  {  // planar Gaussian-type check
    auto V = PotentialSpec::quadratic(2);
    auto k = KernelProfile::fractional(1.0, 2);
    auto s = detail::make_builtin("gaussian-2d", V, k, WeightFunction::paper(V, 0.0, 1.0),
                                  {"check", "gap"});
    s.alpha0 = 0.4;
    s.gridRadius = 4.0;
    s.pointsPerAxis = 33;
    s.sweepRadii = {2.0, 3.0, 4.0};
    finalize_echo(s);
    v.push_back(s);
  }
  return v;
}

inline std::optional<Scenario> find_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  return std::nullopt;
}

}  // namespace nlform
