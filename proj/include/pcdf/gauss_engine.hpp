#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pcdf/corr_matrix.hpp"
#include "pcdf/one_factor.hpp"
#include "pcdf/pade.hpp"
#include "pcdf/special_fns.hpp"

namespace pcdf {

enum class ZetaRule { GaussLegendreComposite, Trapezoid };

struct QuadratureConfig {
  double lambda_cut = 10.0;  // ζ ∈ [-Λ, Λ]
  int nodes = 256;
  ZetaRule rule = ZetaRule::GaussLegendreComposite;
  int panels = 8;

  /// Throws InvalidArgument unless nodes >= 16, lambda_cut >= 6 and nodes
  /// is a multiple of panels for the composite rule.
  void validate() const;
};

/// Everything fixed before the ζ loop: ρ, its one-factor base, ε = ρ⁻¹ - ρ_f⁻¹,
/// J = √(Δ(ρ_f)/Δ(ρ)) and the upper limits.
struct PerturbationSetup {
  CorrelationMatrix rho;
  OneFactorModel model;
  Eigen::MatrixXd eps;
  double j_norm = 1.0;
  Eigen::VectorXd xmax;
  QuadratureConfig quad;
  ConvergenceMetrics metrics;
  std::vector<std::string> warnings;
};

/// Fits ρ_f with fit_one_factor and assembles the setup.
PerturbationSetup prepare(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax,
                          const QuadratureConfig& quad = {}, const FitOptions& fit = {});

/// Same, around a caller-supplied base model.
PerturbationSetup prepare_with_model(const CorrelationMatrix& rho, const OneFactorModel& model,
                                     const Eigen::VectorXd& xmax, const QuadratureConfig& quad = {});

/// Convergence metrics for a setup (ε-dependent ones included).
ConvergenceMetrics compute_metrics(const CorrelationMatrix& rho, const OneFactorModel& model,
                                   const Eigen::MatrixXd& eps, const Eigen::VectorXd& xmax,
                                   double lambda_min_cutoff = kDefaultLambdaMin);

// ---------------------------------------------------------------------------
// Per-node integrands. Each returns the ζ-integrand without φ(ζ) and J:
//   order 0: Π v
//   order 1: Σ_ij ε_ij G_ij
//   order 2: Σ_ijkl ε_ij ε_kl G_ijkl
// The "naive" versions enumerate index tuples literally; the "factored"
// versions use conditional moments of the independent truncated variables.

double node_order0(const FactorSlice& slice) noexcept;
double node_order1_naive(const FactorSlice& slice, const Eigen::MatrixXd& eps);
double node_order1_factored(const FactorSlice& slice, const Eigen::MatrixXd& eps);
double node_order2_naive(const FactorSlice& slice, const Eigen::MatrixXd& eps);
double node_order2_factored(const FactorSlice& slice, const Eigen::MatrixXd& eps);

/// Coincidence class (1..7) of the index tuple (i, j, k, l) of ε_ij ε_kl.
int index_class(int i, int j, int k, int l) noexcept;

/// Class cardinalities by brute-force enumeration over n⁴ tuples
/// (index 0 holds Γ = 1). Throws ClassCountMismatch if they do not sum to n⁴.
std::array<long long, 7> enumerate_class_counts(int n);

/// Closed-form class cardinalities.
std::array<long long, 7> class_counts(int n) noexcept;

// ---------------------------------------------------------------------------

struct EngineOptions {
  int max_order = 2;                    // 0, 1 or 2
  bool naive_second_order = false;      // use the O(n⁴) enumeration
  PadePolicy pade_policy = PadePolicy::Average;
  std::optional<bool> oscillating;      // override auto-detection
  bool check_resolution = true;         // rerun with doubled nodes
  int threads = 0;                      // 0: hardware concurrency
};

struct OrderTerms {
  double i0 = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
};

/// One pass over the ζ grid computing all requested orders. Deterministic
/// regardless of thread count.
OrderTerms integrate_orders(const PerturbationSetup& setup, const EngineOptions& options = {});

/// As above with the ζ grid overridden (for resolution checks).
OrderTerms integrate_orders(const PerturbationSetup& setup, const QuadratureConfig& quad,
                            const EngineOptions& options);

double order0(const PerturbationSetup& setup, const EngineOptions& options = {});
double order1(const PerturbationSetup& setup, const EngineOptions& options = {});
double order2(const PerturbationSetup& setup, const EngineOptions& options = {});

/// Change in any partial sum above which a doubled grid triggers a warning.
inline constexpr double kResolutionTolerance = 1e-8;

struct ExpansionResult {
  double i0 = 0.0, i1 = 0.0, i2 = 0.0;
  double partial0 = 0.0, partial1 = 0.0, partial2 = 0.0;
  double pade1 = 0.0, pade2_11 = 0.0, pade2_02 = 0.0;
  double pade2 = 0.0;  // per policy
  double i_infinity = 0.0;
  std::optional<double> alpha;
  bool oscillating = false;
  double j_norm = 1.0;
  ConvergenceMetrics metrics;
  int node_count = 0;
  std::vector<std::string> warnings;
};

/// Assembles an ExpansionResult (partial sums, Padé, extrapolation) from terms.
ExpansionResult assemble_result(const OrderTerms& terms, const EngineOptions& options);

/// Reruns the ζ integral with doubled nodes; returns a QuadratureUnderResolved
/// warning if any partial sum moves by more than kResolutionTolerance.
std::optional<std::string> check_zeta_resolution(const PerturbationSetup& setup, const ExpansionResult& coarse,
                                                 const EngineOptions& options);

ExpansionResult expand(const PerturbationSetup& setup, const EngineOptions& options = {});

ExpansionResult expand(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax,
                       const QuadratureConfig& quad = {}, const EngineOptions& options = {});

struct SensitivityResult {
  double d_i0 = 0.0, d_i1 = 0.0, d_i2 = 0.0;
  double d_partial0 = 0.0, d_partial1 = 0.0, d_partial2 = 0.0;
  double d_i_infinity = 0.0;
  ExpansionResult first;   // ρ⁽¹⁾
  ExpansionResult second;  // ρ⁽²⁾
  std::vector<std::string> warnings;
};

/// C(ρ⁽²⁾) - C(ρ⁽¹⁾) with both expansions taken about the same base model;
/// slices are built once per node and shared.
SensitivityResult correlation_sensitivity(const CorrelationMatrix& rho1, const CorrelationMatrix& rho2,
                                          const OneFactorModel& shared_model, const Eigen::VectorXd& xmax,
                                          const QuadratureConfig& quad = {}, const EngineOptions& options = {});

/// Base model fitted from `rho1`.
SensitivityResult correlation_sensitivity(const CorrelationMatrix& rho1, const CorrelationMatrix& rho2,
                                          const Eigen::VectorXd& xmax, const QuadratureConfig& quad = {},
                                          const EngineOptions& options = {});

/// The ζ nodes and weights (φ(ζ) folded in) used for a config.
struct ZetaGrid {
  std::vector<double> zeta;
  std::vector<double> weight;
};
ZetaGrid make_zeta_grid(const QuadratureConfig& quad);

}  // namespace pcdf
