#include "pcdf/report.hpp"

#include <cmath>
#include <limits>

#include "pcdf/error.hpp"

namespace pcdf {

using nlohmann::json;

json number_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorKind::ParseError, "expected a number, got " + j.dump());
}

namespace {

json optional_number(const std::optional<double>& x) { return x ? number_to_json(*x) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number_from_json(j.at(key));
}

}  // namespace

json to_json(const ConvergenceMetrics& m) {
  return {{"sigma2_rho_int", optional_number(m.sigma2_rho_int)},
          {"sigma2_eps_int", optional_number(m.sigma2_eps_int)},
          {"r_of_n", number_to_json(m.r_of_n)},
          {"lambda_min", number_to_json(m.lambda_min)},
          {"zeta_star", optional_number(m.zeta_star)},
          {"beta_star", number_to_json(m.beta_star)},
          {"n_star", optional_number(m.n_star)},
          {"regularization_suggested", m.regularization_suggested}};
}

ConvergenceMetrics metrics_from_json(const json& j) {
  ConvergenceMetrics m;
  m.sigma2_rho_int = optional_from(j, "sigma2_rho_int");
  m.sigma2_eps_int = optional_from(j, "sigma2_eps_int");
  m.r_of_n = number_from_json(j.at("r_of_n"));
  m.lambda_min = number_from_json(j.at("lambda_min"));
  m.zeta_star = optional_from(j, "zeta_star");
  m.beta_star = number_from_json(j.at("beta_star"));
  m.n_star = optional_from(j, "n_star");
  m.regularization_suggested = j.at("regularization_suggested").get<bool>();
  return m;
}

json to_json(const ExpansionResult& r) {
  return {{"i0", number_to_json(r.i0)},
          {"i1", number_to_json(r.i1)},
          {"i2", number_to_json(r.i2)},
          {"partial0", number_to_json(r.partial0)},
          {"partial1", number_to_json(r.partial1)},
          {"partial2", number_to_json(r.partial2)},
          {"pade1", number_to_json(r.pade1)},
          {"pade2_11", number_to_json(r.pade2_11)},
          {"pade2_02", number_to_json(r.pade2_02)},
          {"pade2", number_to_json(r.pade2)},
          {"i_infinity", number_to_json(r.i_infinity)},
          {"alpha", optional_number(r.alpha)},
          {"oscillating", r.oscillating},
          {"j_norm", number_to_json(r.j_norm)},
          {"metrics", to_json(r.metrics)},
          {"node_count", r.node_count},
          {"warnings", r.warnings}};
}

ExpansionResult expansion_from_json(const json& j) {
  ExpansionResult r;
  r.i0 = number_from_json(j.at("i0"));
  r.i1 = number_from_json(j.at("i1"));
  r.i2 = number_from_json(j.at("i2"));
  r.partial0 = number_from_json(j.at("partial0"));
  r.partial1 = number_from_json(j.at("partial1"));
  r.partial2 = number_from_json(j.at("partial2"));
  r.pade1 = number_from_json(j.at("pade1"));
  r.pade2_11 = number_from_json(j.at("pade2_11"));
  r.pade2_02 = number_from_json(j.at("pade2_02"));
  r.pade2 = number_from_json(j.at("pade2"));
  r.i_infinity = number_from_json(j.at("i_infinity"));
  r.alpha = optional_from(j, "alpha");
  r.oscillating = j.at("oscillating").get<bool>();
  r.j_norm = number_from_json(j.at("j_norm"));
  r.metrics = metrics_from_json(j.at("metrics"));
  r.node_count = j.at("node_count").get<int>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

json to_json(const SensitivityResult& r) {
  return {{"d_i0", number_to_json(r.d_i0)},
          {"d_i1", number_to_json(r.d_i1)},
          {"d_i2", number_to_json(r.d_i2)},
          {"d_partial0", number_to_json(r.d_partial0)},
          {"d_partial1", number_to_json(r.d_partial1)},
          {"d_partial2", number_to_json(r.d_partial2)},
          {"d_i_infinity", number_to_json(r.d_i_infinity)},
          {"first", to_json(r.first)},
          {"second", to_json(r.second)},
          {"warnings", r.warnings}};
}

SensitivityResult sensitivity_from_json(const json& j) {
  SensitivityResult r;
  r.d_i0 = number_from_json(j.at("d_i0"));
  r.d_i1 = number_from_json(j.at("d_i1"));
  r.d_i2 = number_from_json(j.at("d_i2"));
  r.d_partial0 = number_from_json(j.at("d_partial0"));
  r.d_partial1 = number_from_json(j.at("d_partial1"));
  r.d_partial2 = number_from_json(j.at("d_partial2"));
  r.d_i_infinity = number_from_json(j.at("d_i_infinity"));
  r.first = expansion_from_json(j.at("first"));
  r.second = expansion_from_json(j.at("second"));
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

json to_json(const RunReport& r) {
  json input = {{"matrix_hash", r.matrix_hash}, {"n", r.n}};
  if (r.matrix2_hash) input["matrix2_hash"] = *r.matrix2_hash;
  json xmax = json::array();
  for (double x : r.xmax) xmax.push_back(number_to_json(x));
  input["xmax"] = std::move(xmax);
  if (r.nu) input["nu"] = number_to_json(*r.nu);

  json out = {{"schema", kReportSchema}, {"version", r.version}, {"command", r.command},
              {"input", std::move(input)}, {"config", r.config}};
  if (r.model) out["model"] = *r.model;
  if (r.rho_f_source) out["rho_f_source"] = *r.rho_f_source;
  if (r.expansion) out["expansion"] = to_json(*r.expansion);
  if (r.sensitivity) out["sensitivity"] = to_json(*r.sensitivity);
  if (r.metrics) out["metrics"] = to_json(*r.metrics);
  if (r.oracle) out["oracle"] = oracle::to_json(*r.oracle);
  if (r.oracle_abs_error) out["oracle_abs_error"] = number_to_json(*r.oracle_abs_error);
  if (r.oracle_difference) {
    out["oracle_difference"] = {{"difference", number_to_json(r.oracle_difference->difference)},
                                {"std_error", number_to_json(r.oracle_difference->std_error)}};
  }
  json stages = json::array();
  for (const auto& s : r.stages) {
    json st = {{"name", s.name}, {"steps", s.steps}};
    if (s.ms) st["ms"] = *s.ms;
    stages.push_back(std::move(st));
  }
  out["stages"] = std::move(stages);
  out["warnings"] = r.warnings;
  return out;
}

RunReport report_from_json(const json& j) {
  try {
    if (j.at("schema").get<int>() != kReportSchema) throw Error(ErrorKind::ParseError, "unsupported report schema");
    RunReport r;
    r.version = j.at("version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    const json& input = j.at("input");
    r.matrix_hash = input.at("matrix_hash").get<std::string>();
    if (input.contains("matrix2_hash")) r.matrix2_hash = input.at("matrix2_hash").get<std::string>();
    r.n = input.at("n").get<int>();
    for (const auto& x : input.at("xmax")) r.xmax.push_back(number_from_json(x));
    if (input.contains("nu")) r.nu = number_from_json(input.at("nu"));
    r.config = j.at("config");
    if (j.contains("model")) r.model = j.at("model");
    if (j.contains("rho_f_source")) r.rho_f_source = j.at("rho_f_source").get<std::string>();
    if (j.contains("expansion")) r.expansion = expansion_from_json(j.at("expansion"));
    if (j.contains("sensitivity")) r.sensitivity = sensitivity_from_json(j.at("sensitivity"));
    if (j.contains("metrics")) r.metrics = metrics_from_json(j.at("metrics"));
    if (j.contains("oracle")) r.oracle = oracle::oracle_from_json(j.at("oracle"));
    if (j.contains("oracle_abs_error")) r.oracle_abs_error = number_from_json(j.at("oracle_abs_error"));
    if (j.contains("oracle_difference")) {
      const json& d = j.at("oracle_difference");
      r.oracle_difference = oracle::McDifference{number_from_json(d.at("difference")),
                                                 number_from_json(d.at("std_error"))};
    }
    for (const auto& s : j.at("stages")) {
      Stage st{s.at("name").get<std::string>(), s.at("steps").get<std::vector<int>>(), std::nullopt};
      if (s.contains("ms")) st.ms = s.at("ms").get<double>();
      r.stages.push_back(std::move(st));
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::ParseError, std::string("report: ") + ex.what());
  }
}

std::string render(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

}  // namespace pcdf
