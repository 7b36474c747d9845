#pragma once

// RunReport assembly and emission. Reports are deterministic: identical
// scenario + tool version produce byte-identical output, so wall-clock
// timings never enter the serialized document (the CLI logs them to stderr
// instead). Non-finite numbers are clamped to +/-1e308 sentinels before
// serialization.

#include <filesystem>
#include <fstream>

#include "nlform/criteria.hpp"
#include "nlform/lyapunov.hpp"
#include "nlform/scenario.hpp"
#include "nlform/spectral.hpp"

namespace nlform {

inline constexpr const char* kToolName = "nlform";
inline constexpr const char* kToolVersion = "0.1.0";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double clamp_number(double x) {
  if (std::isnan(x)) return 0.0;
  if (x == quad::kInf) return 1e308;
  if (x == quad::kNegInf) return -1e308;
  return x;
}

inline ordered_json num(double x) { return clamp_number(x); }

}  // namespace detail

inline ordered_json to_json(const IntegralVerdict& v) {
  ordered_json j;
  j["verdict"] = quad::to_string(v.verdict);
  if (v.convergent()) j["value"] = detail::num(v.value);
  j["tail_ratio"] = detail::num(v.tailRatio);
  j["levels"] = v.refinementLevels;
  return j;
}

inline ordered_json to_json(const LimitVerdict& v) {
  ordered_json j;
  j["kind"] = to_string(v.kind);
  j["window_slope"] = detail::num(v.windowSlope);
  ordered_json samples = ordered_json::array();
  for (size_t i = 0; i < v.radii.size(); ++i)
    samples.push_back({detail::num(v.radii[i]), detail::num(v.logValues[i])});
  j["log_samples"] = samples;
  return j;
}

inline ordered_json to_json(const CriterionReport& rep) {
  ordered_json j;
  j["criterion"] = to_string(rep.criterion);
  if (!std::isnan(rep.alpha0)) j["alpha0"] = rep.alpha0;
  j["satisfied"] = to_string(rep.satisfied);
  ordered_json conds = ordered_json::array();
  for (const auto& c : rep.conditions) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["pass"] = to_string(c.pass);
    if (std::holds_alternative<IntegralVerdict>(c.result)) {
      cj["type"] = "integral";
      cj["integral"] = to_json(std::get<IntegralVerdict>(c.result));
    } else {
      cj["type"] = "limit";
      cj["limit"] = to_json(std::get<LimitVerdict>(c.result));
    }
    conds.push_back(cj);
  }
  j["conditions"] = conds;
  if (rep.impliedWeight) j["implied_weight"] = detail::weight_echo(*rep.impliedWeight);
  return j;
}

inline ordered_json to_json(const SlopeFit& fit) {
  ordered_json j;
  ordered_json pairs = ordered_json::array();
  for (const auto& p : fit.pairs)
    pairs.push_back({{"n", p.n},
                     {"ratio", detail::num(p.ratio)},
                     {"variance", detail::num(p.variance)},
                     {"form_value", detail::num(p.formValue)}});
  j["pairs"] = pairs;
  j["slope"] = detail::num(fit.slope);
  j["intercept"] = detail::num(fit.intercept);
  j["r_squared"] = detail::num(fit.rSquared);
  return j;
}

inline ordered_json to_json(const StabilitySweep& sweep) {
  ordered_json j;
  ordered_json pts = ordered_json::array();
  for (size_t i = 0; i < sweep.radii.size(); ++i)
    pts.push_back({{"radius", detail::num(sweep.radii[i])},
                   {"best_constant", detail::num(sweep.constants[i])}});
  j["points"] = pts;
  j["verdict"] = to_string(sweep.verdict);
  return j;
}

inline ordered_json to_json(const LyapunovCertificate& c) {
  ordered_json j;
  j["c1"] = detail::num(c.C1);
  j["c2"] = detail::num(c.C2);
  j["b"] = detail::num(c.b);
  j["r0"] = detail::num(c.r0);
  j["alpha0"] = detail::num(c.alpha0);
  j["margin"] = detail::num(c.margin);
  ordered_json phi = ordered_json::array(), h = ordered_json::array();
  for (int i = 0; i < c.phi.size(); ++i) {
    phi.push_back(detail::num(c.phi[i]));
    h.push_back(detail::num(c.hFunction[i]));
  }
  j["phi"] = phi;
  j["h"] = h;
  return j;
}

struct TaskOutcome {
  std::string task;
  bool errored = false;
  std::string error;
  ordered_json result;
};

struct RunReport {
  ordered_json scenarioEcho;
  ordered_json settings;
  std::vector<TaskOutcome> tasks;

  bool any_errored() const {
    for (const auto& t : tasks)
      if (t.errored) return true;
    return false;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["scenario"] = scenarioEcho;
    j["settings"] = settings;
    ordered_json tj;
    for (const auto& t : tasks) {
      ordered_json e;
      e["status"] = t.errored ? "failed" : "ok";
      if (t.errored) e["reason"] = t.error;
      e["result"] = t.result;
      tj[t.task] = e;
    }
    j["tasks"] = tj;
    return j;
  }

  static RunReport from_json(const ordered_json& j) {
    RunReport r;
    r.scenarioEcho = j.at("scenario");
    r.settings = j.at("settings");
    for (auto it = j.at("tasks").begin(); it != j.at("tasks").end(); ++it) {
      TaskOutcome t;
      t.task = it.key();
      t.errored = it.value().at("status") == "failed";
      if (t.errored && it.value().contains("reason")) t.error = it.value().at("reason");
      t.result = it.value().at("result");
      r.tasks.push_back(std::move(t));
    }
    return r;
  }
};

enum class EmitFormat { Json, CsvTables };

namespace detail {

inline std::string csv_num(const ordered_json& v) {
  if (v.is_null()) return "";
  return v.dump();  // shortest round-trip formatting, deterministic
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  os << content;
  if (!os) throw IoError("failed writing " + p.string());
}

}  // namespace detail

// json: one document mirroring the report. csv-tables: one table per
// sequence-valued result with pinned headers:
//   moment_curve.csv     lambda,value,verdict
//   beta_samples.csv     r,beta,beta_closed_form
//   slope_pairs.csv      n,ratio
//   stability_sweep.csv  radius,best_constant
inline std::vector<std::filesystem::path> emit(const RunReport& report, EmitFormat format,
                                               const std::filesystem::path& outDir) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  std::vector<std::filesystem::path> written;
  if (format == EmitFormat::Json) {
    auto p = outDir / "report.json";
    detail::write_file(p, report.to_json().dump(2) + "\n");
    written.push_back(p);
    return written;
  }
  for (const auto& t : report.tasks) {
    if (t.errored) continue;
    if (t.task == "concentration" && t.result.contains("moment_curve")) {
      std::string csv = "lambda,value,verdict\n";
      for (const auto& row : t.result["moment_curve"]) {
        csv += detail::csv_num(row["lambda"]) + ",";
        csv += (row.contains("value") ? detail::csv_num(row["value"]) : "") + ",";
        csv += row["verdict"].get<std::string>() + "\n";
      }
      auto p = outDir / "moment_curve.csv";
      detail::write_file(p, csv);
      written.push_back(p);
    }
    if (t.task == "beta" && t.result.contains("samples")) {
      std::string csv = "r,beta,beta_closed_form\n";
      for (const auto& row : t.result["samples"]) {
        csv += detail::csv_num(row["r"]) + "," + detail::csv_num(row["beta"]) + "," +
               detail::csv_num(row["beta_closed_form"]) + "\n";
      }
      auto p = outDir / "beta_samples.csv";
      detail::write_file(p, csv);
      written.push_back(p);
    }
    if (t.task == "sharpness" && t.result.contains("slope") &&
        t.result["slope"].contains("pairs")) {
      std::string csv = "n,ratio\n";
      for (const auto& row : t.result["slope"]["pairs"])
        csv += detail::csv_num(row["n"]) + "," + detail::csv_num(row["ratio"]) + "\n";
      auto p = outDir / "slope_pairs.csv";
      detail::write_file(p, csv);
      written.push_back(p);
    }
    if (t.task == "gap" && t.result.contains("sweep") && t.result["sweep"].contains("points")) {
      std::string csv = "radius,best_constant\n";
      for (const auto& row : t.result["sweep"]["points"])
        csv += detail::csv_num(row["radius"]) + "," + detail::csv_num(row["best_constant"]) +
               "\n";
      auto p = outDir / "stability_sweep.csv";
      detail::write_file(p, csv);
      written.push_back(p);
    }
  }
  return written;
}

}  // namespace nlform
