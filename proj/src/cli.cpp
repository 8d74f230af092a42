#include "pcdf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include "pcdf/gauss_engine.hpp"
#include "pcdf/matrix_io.hpp"
#include "pcdf/oracle.hpp"
#include "pcdf/report.hpp"
#include "pcdf/student_t.hpp"

namespace pcdf::cli {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionTooSmall:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotSymmetric:
    case ErrorKind::NotUnitDiagonal:
    case ErrorKind::OffDiagonalOutOfRange:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::LoadingOutOfRange:
    case ErrorKind::RhoFNotPositiveDefinite:
    case ErrorKind::ZeroDiagonalWeight:
    case ErrorKind::CholeskyFailure:
      return kValidationFailure;
    case ErrorKind::CutoffTooLarge:
    case ErrorKind::DimensionTooLarge:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ParseError:
      return kInvalidInput;
    default:
      return kFailure;
  }
}

namespace {

struct Options {
  std::string rho_path;
  std::string rho2_path;
  std::string xmax_text;
  double nu = 0.0;
  int order = 2;
  int nodes = 256;
  double lambda = 10.0;
  std::optional<double> lambda_min;
  std::string pade_policy = "average";
  long long compare_mc = 0;
  int compare_grid = 0;
  std::uint64_t seed = 0;
  bool naive = false;
  int threads = 0;
  int y_nodes = 128;
  bool timings = false;
};

class StageClock {
 public:
  StageClock(RunReport& report, bool timed) : report_(report), timed_(timed) {}

  template <typename F>
  decltype(auto) operator()(std::string name, std::vector<int> steps, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      Stage s{std::move(name), std::move(steps), std::nullopt};
      if (timed_) {
        s.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      report_.stages.push_back(std::move(s));
    };
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      body();
      finish();
    } else {
      decltype(auto) result = body();
      finish();
      return result;
    }
  }

 private:
  RunReport& report_;
  bool timed_;
};

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

QuadratureConfig quad_config(const Options& o) {
  QuadratureConfig q;
  q.nodes = o.nodes;
  q.lambda_cut = o.lambda;
  q.validate();
  return q;
}

EngineOptions engine_options(const Options& o) {
  if (o.order < 0 || o.order > 2) throw Error(ErrorKind::InvalidArgument, "--order must be 0, 1 or 2");
  EngineOptions e;
  e.max_order = o.order;
  e.naive_second_order = o.naive;
  e.threads = o.threads;
  if (o.pade_policy == "max") e.pade_policy = PadePolicy::Max;
  else if (o.pade_policy == "average") e.pade_policy = PadePolicy::Average;
  else throw Error(ErrorKind::InvalidArgument, "--pade-policy must be max or average");
  return e;
}

nlohmann::json config_echo(const Options& o, const std::string& command) {
  nlohmann::json c = {{"order", o.order},
                      {"nodes", o.nodes},
                      {"lambda", o.lambda},
                      {"panels", QuadratureConfig{}.panels},
                      {"zeta_rule", "gauss_legendre_composite"},
                      {"pade_policy", o.pade_policy},
                      {"naive_second_order", o.naive},
                      {"lambda_min", o.lambda_min ? nlohmann::json(*o.lambda_min) : nlohmann::json(nullptr)},
                      {"seed", o.seed},
                      {"compare_mc", o.compare_mc},
                      {"compare_grid", o.compare_grid}};
  if (command == "student-t") c["y_nodes"] = o.y_nodes;
  return c;
}

/// Step 1: read, validate and optionally regularize. A 1x1 input is embedded
/// as a 2-d problem with an independent, unbounded second coordinate.
CorrelationMatrix load_matrix(const std::string& path, const Options& o, bool allow_embed, bool& embedded,
                              std::string& hash, std::vector<std::string>& warnings) {
  Eigen::MatrixXd raw = io::read_matrix_file(path);
  hash = hex(io::matrix_hash(raw));
  if (allow_embed && raw.rows() == 1 && raw.cols() == 1) {
    if (std::abs(raw(0, 0) - 1.0) > CorrelationMatrix::kDiagonalTolerance) {
      throw Error(ErrorKind::NotUnitDiagonal, "1x1 correlation matrix must be [1]");
    }
    raw = Eigen::MatrixXd::Identity(2, 2);
    embedded = true;
    warnings.emplace_back("Embedded: 1-d input evaluated with an independent unbounded second coordinate");
  }
  CorrelationMatrix rho(raw);
  for (const auto& w : rho.warnings()) warnings.push_back(w);
  if (o.lambda_min) {
    const double before = rho.min_eigenvalue();
    CorrelationMatrix reg = regularize(rho, *o.lambda_min);
    if (reg.min_eigenvalue() != before) {
      warnings.push_back("Regularized: lambda_min raised from " + io::format_double(before) + " to " +
                         io::format_double(reg.min_eigenvalue()));
    }
    return reg;
  }
  return rho;
}

OneFactorModel checked_model(const CorrelationMatrix& rho, StageClock& stage) {
  FitOptions fit;
  fit.explicit_pd_check = false;
  OneFactorModel model = stage("fit_loadings", {2}, [&] { return fit_one_factor(rho, fit); });
  stage("build_rho_f", {3}, [&] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.rho_f(), Eigen::EigenvaluesOnly);
    if (!(solver.eigenvalues()(0) > 0.0)) {
      throw Error(ErrorKind::RhoFNotPositiveDefinite,
                  "one-factor matrix has min eigenvalue " + io::format_double(solver.eigenvalues()(0)));
    }
  });
  return model;
}

Eigen::VectorXd read_limits(const Options& o, int n, bool embedded) {
  Eigen::VectorXd x = io::parse_limits(o.xmax_text);
  if (embedded && x.size() == 1) {
    Eigen::VectorXd e(2);
    e << x(0), std::numeric_limits<double>::infinity();
    x = e;
  }
  if (x.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "--xmax has " + std::to_string(x.size()) + " entries, matrix is " +
                                                std::to_string(n) + "-dimensional");
  }
  for (int i = 0; i < n; ++i)
    if (std::isnan(x(i))) throw Error(ErrorKind::InvalidArgument, "--xmax contains NaN");
  return x;
}

void echo_limits(RunReport& report, const Eigen::VectorXd& x) {
  report.xmax.assign(x.data(), x.data() + x.size());
}

void print_summary(std::ostream& err, const RunReport& r) {
  char line[256];
  if (r.expansion) {
    const auto& e = *r.expansion;
    std::snprintf(line, sizeof line, "%s n=%d: I_inf=%.10g  partial0=%.10g partial1=%.10g partial2=%.10g pade2=%.10g\n",
                  r.command.c_str(), r.n, e.i_infinity, e.partial0, e.partial1, e.partial2, e.pade2);
    err << line;
  }
  if (r.sensitivity) {
    const auto& s = *r.sensitivity;
    std::snprintf(line, sizeof line, "sensitivity n=%d: dI_inf=%.10g  d0=%.10g d1=%.10g d2=%.10g\n", r.n,
                  s.d_i_infinity, s.d_partial0, s.d_partial1, s.d_partial2);
    err << line;
  }
  if (r.metrics) {
    std::snprintf(line, sizeof line, "metrics n=%d: R(N)=%.6g lambda_min=%.6g beta*=%.4g\n", r.n, r.metrics->r_of_n,
                  r.metrics->lambda_min, r.metrics->beta_star);
    err << line;
  }
  if (r.oracle) {
    std::snprintf(line, sizeof line, "oracle %s: %.10g +- %.3g\n", oracle::to_string(r.oracle->method).c_str(),
                  r.oracle->value, r.oracle->std_error);
    err << line;
  }
  if (r.oracle_difference) {
    std::snprintf(line, sizeof line, "oracle difference: %.10g +- %.3g\n", r.oracle_difference->difference,
                  r.oracle_difference->std_error);
    err << line;
  }
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  for (const auto& s : r.stages) {
    if (s.ms) {
      std::snprintf(line, sizeof line, "  %-22s %10.3f ms\n", s.name.c_str(), *s.ms);
      err << line;
    }
  }
}

// Keeps first occurrences; the same matrix warning can reach us twice.
std::vector<std::string> dedupe(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& w : in)
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  return out;
}

void merge_warnings(RunReport& report, std::vector<std::string>& extra) {
  extra = dedupe(extra);
  report.warnings.insert(report.warnings.end(), extra.begin(), extra.end());
}

RunReport cmd_gauss(const Options& o) {
  RunReport report;
  report.command = "gauss";
  report.config = config_echo(o, report.command);
  StageClock stage(report, o.timings);
  const EngineOptions eopts = engine_options(o);
  const QuadratureConfig quad = quad_config(o);

  bool embedded = false;
  std::vector<std::string> warnings;
  const CorrelationMatrix rho = stage("validate_rho", {1}, [&] {
    return load_matrix(o.rho_path, o, true, embedded, report.matrix_hash, warnings);
  });
  report.n = rho.n();
  const OneFactorModel model = checked_model(rho, stage);
  report.model = io::model_to_json(model);
  stage("compute_eps", {4}, [&] {
    const Eigen::MatrixXd eps = rho.inverse() - model.rho_f_inv();
    if (!eps.allFinite()) throw Error(ErrorKind::NotPositiveDefinite, "perturbation matrix is not finite");
  });
  const Eigen::VectorXd xmax = stage("read_limits", {5}, [&] { return read_limits(o, rho.n(), embedded); });
  echo_limits(report, xmax);

  const PerturbationSetup setup = prepare_with_model(rho, model, xmax, quad);
  const OrderTerms terms = stage("zeta_quadrature", {6, 7, 8, 9}, [&] { return integrate_orders(setup, eopts); });
  ExpansionResult result = stage("pade_extrapolation", {10, 11}, [&] { return assemble_result(terms, eopts); });
  result.j_norm = setup.j_norm;
  result.node_count = quad.nodes;
  std::optional<std::string> resolution = check_zeta_resolution(setup, result, eopts);
  result.metrics = stage("metrics", {12}, [&] {
    return compute_metrics(rho, model, setup.eps, xmax, o.lambda_min.value_or(kDefaultLambdaMin));
  });

  std::vector<std::string> all = warnings;
  for (const auto& w : model.warnings()) all.push_back(w);
  if (resolution) all.push_back(*resolution);
  all.insert(all.end(), result.warnings.begin(), result.warnings.end());
  merge_warnings(report, all);
  result.warnings = all;

  if (o.compare_mc > 0 && o.compare_grid > 0) {
    throw Error(ErrorKind::InvalidArgument, "--compare-mc and --compare-grid are mutually exclusive");
  }
  if (o.compare_mc > 0) report.oracle = oracle::mc_gaussian_cdf(rho, xmax, o.compare_mc, o.seed, o.threads);
  if (o.compare_grid > 0) report.oracle = oracle::tensor_grid_cdf(rho, xmax, o.compare_grid);
  if (report.oracle) report.oracle_abs_error = std::abs(result.i_infinity - report.oracle->value);
  report.expansion = std::move(result);
  return report;
}

RunReport cmd_student_t(const Options& o) {
  RunReport report;
  report.command = "student-t";
  report.config = config_echo(o, report.command);
  report.nu = o.nu;
  if (!(o.nu > 0.0) || !std::isfinite(o.nu)) throw Error(ErrorKind::InvalidArgument, "--nu must be positive");
  StageClock stage(report, o.timings);
  EngineOptions eopts = engine_options(o);
  const QuadratureConfig quad = quad_config(o);

  bool embedded = false;
  std::vector<std::string> warnings;
  const CorrelationMatrix rho = stage("validate_rho", {1}, [&] {
    return load_matrix(o.rho_path, o, true, embedded, report.matrix_hash, warnings);
  });
  report.n = rho.n();
  const OneFactorModel model = checked_model(rho, stage);
  report.model = io::model_to_json(model);
  stage("compute_eps", {4}, [&] {
    const Eigen::MatrixXd eps = rho.inverse() - model.rho_f_inv();
    if (!eps.allFinite()) throw Error(ErrorKind::NotPositiveDefinite, "perturbation matrix is not finite");
  });
  const Eigen::VectorXd xmax = stage("read_limits", {5}, [&] { return read_limits(o, rho.n(), embedded); });
  echo_limits(report, xmax);

  StudentTRequest req{rho, xmax, o.nu, quad, {}};
  req.y_quad.y_nodes = o.y_nodes;
  ExpansionResult result =
      stage("radial_zeta_quadrature_pade", {6, 7, 8, 9, 10, 11}, [&] { return student_t_expand(req, eopts); });
  result.metrics = stage("metrics", {12}, [&] {
    const PerturbationSetup setup = prepare_with_model(rho, model, xmax, quad);
    return compute_metrics(rho, model, setup.eps, xmax, o.lambda_min.value_or(kDefaultLambdaMin));
  });
  std::vector<std::string> all = warnings;
  all.insert(all.end(), result.warnings.begin(), result.warnings.end());
  merge_warnings(report, all);
  result.warnings = all;

  if (o.compare_grid > 0) throw Error(ErrorKind::InvalidArgument, "--compare-grid is Gaussian only");
  if (o.compare_mc > 0) {
    report.oracle = oracle::mc_student_t_cdf(rho, xmax, o.nu, o.compare_mc, o.seed, o.threads);
    report.oracle_abs_error = std::abs(result.i_infinity - report.oracle->value);
  }
  report.expansion = std::move(result);
  return report;
}

RunReport cmd_sensitivity(const Options& o) {
  RunReport report;
  report.command = "sensitivity";
  report.config = config_echo(o, report.command);
  StageClock stage(report, o.timings);
  const EngineOptions eopts = engine_options(o);
  const QuadratureConfig quad = quad_config(o);

  bool embedded = false;
  std::vector<std::string> warnings;
  std::string hash2;
  auto [rho1, rho2] = stage("validate_rho", {1}, [&] {
    CorrelationMatrix a = load_matrix(o.rho_path, o, false, embedded, report.matrix_hash, warnings);
    CorrelationMatrix b = load_matrix(o.rho2_path, o, false, embedded, hash2, warnings);
    if (a.n() != b.n()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "matrices have dimensions " + std::to_string(a.n()) + " and " + std::to_string(b.n()));
    }
    return std::pair{std::move(a), std::move(b)};
  });
  report.matrix2_hash = hash2;
  report.n = rho1.n();
  const OneFactorModel model = checked_model(rho1, stage);
  report.model = io::model_to_json(model);
  report.rho_f_source = "rho";
  stage("compute_eps", {4}, [&] {
    const Eigen::MatrixXd e1 = rho1.inverse() - model.rho_f_inv();
    const Eigen::MatrixXd e2 = rho2.inverse() - model.rho_f_inv();
    if (!e1.allFinite() || !e2.allFinite()) {
      throw Error(ErrorKind::NotPositiveDefinite, "perturbation matrix is not finite");
    }
  });
  const Eigen::VectorXd xmax = stage("read_limits", {5}, [&] { return read_limits(o, rho1.n(), false); });
  echo_limits(report, xmax);

  SensitivityResult result = stage("zeta_quadrature_pade", {6, 7, 8, 9, 10, 11}, [&] {
    return correlation_sensitivity(rho1, rho2, model, xmax, quad, eopts);
  });
  stage("metrics", {12}, [&] {
    const double cut = o.lambda_min.value_or(kDefaultLambdaMin);
    const Eigen::MatrixXd e1 = rho1.inverse() - model.rho_f_inv();
    const Eigen::MatrixXd e2 = rho2.inverse() - model.rho_f_inv();
    result.first.metrics = compute_metrics(rho1, model, e1, xmax, cut);
    result.second.metrics = compute_metrics(rho2, model, e2, xmax, cut);
  });
  warnings.emplace_back("SharedBase: both expansions use the one-factor fit of --rho");
  for (const auto& w : model.warnings()) warnings.push_back(w);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  merge_warnings(report, warnings);
  result.warnings = warnings;

  if (o.compare_grid > 0) throw Error(ErrorKind::InvalidArgument, "--compare-grid is not available for sensitivity");
  if (o.compare_mc > 0) {
    report.oracle_difference = oracle::mc_gaussian_cdf_difference(rho1, rho2, xmax, o.compare_mc, o.seed, o.threads);
  }
  report.sensitivity = std::move(result);
  return report;
}

RunReport cmd_metrics(const Options& o) {
  RunReport report;
  report.command = "metrics";
  report.config = config_echo(o, report.command);
  StageClock stage(report, o.timings);

  bool embedded = false;
  std::vector<std::string> warnings;
  const CorrelationMatrix rho = stage("validate_rho", {1}, [&] {
    return load_matrix(o.rho_path, o, false, embedded, report.matrix_hash, warnings);
  });
  report.n = rho.n();
  const OneFactorModel model = checked_model(rho, stage);
  report.model = io::model_to_json(model);
  const Eigen::MatrixXd eps = stage("compute_eps", {4}, [&] {
    Eigen::MatrixXd e = rho.inverse() - model.rho_f_inv();
    return Eigen::MatrixXd(0.5 * (e + e.transpose()));
  });
  // Limits only enter the ζ* and N* estimates; absent limits mean all zero.
  const Eigen::VectorXd xmax = stage("read_limits", {5}, [&] {
    return o.xmax_text.empty() ? Eigen::VectorXd(Eigen::VectorXd::Zero(rho.n())) : read_limits(o, rho.n(), false);
  });
  echo_limits(report, xmax);
  report.metrics = stage("metrics", {12}, [&] {
    return compute_metrics(rho, model, eps, xmax, o.lambda_min.value_or(kDefaultLambdaMin));
  });
  if (report.metrics->regularization_suggested) {
    warnings.emplace_back("RegularizationSuggested: lambda_min " + io::format_double(report.metrics->lambda_min) +
                          " is below " + io::format_double(o.lambda_min.value_or(kDefaultLambdaMin)));
  }
  for (const auto& w : model.warnings()) warnings.push_back(w);
  merge_warnings(report, warnings);
  return report;
}

void add_engine_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--order", o.order, "Expansion order 0, 1 or 2")->check(CLI::Range(0, 2));
  cmd->add_option("--nodes", o.nodes, "zeta quadrature nodes (multiple of 8)");
  cmd->add_option("--lambda", o.lambda, "zeta half-width");
  cmd->add_option("--pade-policy", o.pade_policy, "max or average")->check(CLI::IsMember({"max", "average"}));
  cmd->add_option("--compare-mc", o.compare_mc, "Monte-Carlo oracle samples");
  cmd->add_option("--compare-grid", o.compare_grid, "tensor-grid oracle nodes per dimension (n <= 4)");
  cmd->add_option("--seed", o.seed, "oracle seed");
  cmd->add_flag("--naive-n4", o.naive, "use the O(n^4) second-order enumeration");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--timings", o.timings, "record per-stage milliseconds");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Perturbative multivariate Gaussian and Student-t CDF"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* gauss = app.add_subcommand("gauss", "Gaussian integral");
  auto* student = app.add_subcommand("student-t", "Student-t integral");
  auto* sens = app.add_subcommand("sensitivity", "difference between two correlation matrices");
  auto* metrics = app.add_subcommand("metrics", "convergence metrics");
  for (auto* cmd : {gauss, student, sens, metrics}) {
    cmd->add_option("--rho", o.rho_path, "correlation matrix file (CSV or JSON)")->required();
    cmd->add_option("--lambda-min", o.lambda_min, "eigenvalue floor for regularization");
  }
  for (auto* cmd : {gauss, student, sens}) {
    cmd->add_option("--xmax", o.xmax_text, "comma-separated upper limits (inf allowed)")->required();
    add_engine_flags(cmd, o);
  }
  metrics->add_option("--xmax", o.xmax_text, "comma-separated upper limits");
  metrics->add_flag("--timings", o.timings, "record per-stage milliseconds");
  student->add_option("--nu", o.nu, "degrees of freedom")->required();
  student->add_option("--y-nodes", o.y_nodes, "radial quadrature nodes");
  sens->add_option("--rho2", o.rho2_path, "second correlation matrix")->required();

  std::vector<const char*> argv{"pcdf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    RunReport report;
    if (gauss->parsed()) report = cmd_gauss(o);
    else if (student->parsed()) report = cmd_student_t(o);
    else if (sens->parsed()) report = cmd_sensitivity(o);
    else report = cmd_metrics(o);
    out << render(report);
    print_summary(err, report);
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace pcdf::cli
