#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcdf/gauss_engine.hpp"
#include "pcdf/oracle.hpp"

namespace pcdf {

inline constexpr const char* kVersion = "0.1.0";
/// Bumped whenever a report field is renamed or removed.
inline constexpr int kReportSchema = 1;

/// One step (or group of steps) of the evaluation flow. Durations are only
/// filled when timings were requested, so default reports stay reproducible.
struct Stage {
  std::string name;
  std::vector<int> steps;
  std::optional<double> ms;
};

struct RunReport {
  std::string command;
  std::string version = kVersion;

  // input echo
  std::string matrix_hash;
  std::optional<std::string> matrix2_hash;
  int n = 0;
  std::vector<double> xmax;
  std::optional<double> nu;
  nlohmann::json config = nlohmann::json::object();
  std::optional<nlohmann::json> model;
  std::optional<std::string> rho_f_source;

  std::optional<ExpansionResult> expansion;
  std::optional<SensitivityResult> sensitivity;
  std::optional<ConvergenceMetrics> metrics;

  std::optional<oracle::OracleEstimate> oracle;
  std::optional<double> oracle_abs_error;
  std::optional<oracle::McDifference> oracle_difference;

  std::vector<Stage> stages;
  std::vector<std::string> warnings;
};

// Non-finite doubles are written as the strings "inf", "-inf", "nan".
nlohmann::json number_to_json(double x);
double number_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConvergenceMetrics& m);
ConvergenceMetrics metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExpansionResult& r);
ExpansionResult expansion_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SensitivityResult& r);
SensitivityResult sensitivity_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

/// Canonical text form: two-space indented JSON plus newline.
std::string render(const RunReport& r);

}  // namespace pcdf
