#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace pcdf {

/// Symmetric positive-definite matrix with unit diagonal. The spectrum,
/// inverse and determinant are computed once at construction and cached;
/// instances are immutable afterwards.
class CorrelationMatrix {
 public:
  /// Asymmetry above this is rejected outright.
  static constexpr double kMaxAsymmetry = 1e-8;
  /// Asymmetry above this (but below kMaxAsymmetry) is averaged away with a warning.
  static constexpr double kWarnAsymmetry = 1e-12;
  static constexpr double kDiagonalTolerance = 1e-12;

  /// Validates and caches. Throws pcdf::Error with kind DimensionTooSmall,
  /// NotSymmetric, NotUnitDiagonal, OffDiagonalOutOfRange or NotPositiveDefinite.
  explicit CorrelationMatrix(const Eigen::MatrixXd& entries);

  int n() const noexcept { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  /// Descending order; columns of eigenvectors() match.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  const Eigen::MatrixXd& inverse() const noexcept { return inverse_; }
  double determinant() const noexcept { return determinant_; }
  double min_eigenvalue() const noexcept { return eigenvalues_(eigenvalues_.size() - 1); }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd inverse_;
  double determinant_ = 1.0;
  std::vector<std::string> warnings_;
};

CorrelationMatrix build_correlation_matrix(const Eigen::MatrixXd& entries);

/// Default eigenvalue floor used when a caller asks for regularization
/// without choosing one.
inline constexpr double kDefaultLambdaMin = 1e-4;

/// V·diag(max(λ, cutoff))·Vᵀ, without the diagonal rescaling. Exposed so the
/// raised spectrum can be inspected on its own.
Eigen::MatrixXd clip_spectrum(const CorrelationMatrix& m, double cutoff);

/// Raises every eigenvalue below `cutoff` to the cutoff, rescales to unit
/// diagonal and repeats until the smallest eigenvalue sits at the cutoff
/// (the rescaling pulls it slightly back down each pass). Returns the input
/// unchanged when nothing is below the cutoff.
CorrelationMatrix regularize(const CorrelationMatrix& m, double cutoff);

/// Sample variance of the strictly-upper-triangular entries with the
/// [n(n-1)/2 - 1] denominator. Requires n >= 3.
double internal_variance(const Eigen::MatrixXd& symmetric);

/// Harmonic "parallel resistor" sum 1 / Σ 1/λ.
double distance_from_singular(const CorrelationMatrix& m);

struct HeuristicEstimates {
  std::optional<double> zeta_star;  // empty when the root is not bracketed
  double beta_star = 0.0;
  std::optional<double> n_star;     // empty when the normal integral at ζ* is 1
  std::vector<std::string> warnings;
};

/// Bump location of the order-0 ζ-integrand, dominant order and most
/// important dimension from averaged parameters. Diagnostics only.
/// `order` is the expansion order at which the dimension estimate is taken.
HeuristicEstimates heuristic_estimates(double c_avg, double x_avg_max, double eps_avg, int n,
                                       int order = 2);

/// Root of ζ + (N c/s)·φ(u)/Φ(u) = 0, u = (x - cζ)/s, by bisection on [-20, 20].
/// Throws RootNotBracketed.
double solve_zeta_star(double c_avg, double x_avg_max, int n);

struct ConvergenceMetrics {
  std::optional<double> sigma2_rho_int;  // needs n >= 3
  std::optional<double> sigma2_eps_int;
  double r_of_n = 0.0;
  double lambda_min = 0.0;
  std::optional<double> zeta_star;
  double beta_star = 0.0;
  std::optional<double> n_star;
  bool regularization_suggested = false;
};

}  // namespace pcdf
