#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "pcdf/corr_matrix.hpp"

namespace pcdf {

/// Diagonal-plus-rank-one correlation ρ_f with off-diagonals c_i c_j.
/// The inverse and determinant come from closed forms (Sherman–Morrison and
/// the matrix determinant lemma), so they are exact for any loading vector
/// with |c_i| < 1.
class OneFactorModel {
 public:
  /// Throws LoadingOutOfRange if some |c_i| >= 1.
  explicit OneFactorModel(Eigen::VectorXd loadings);

  int n() const noexcept { return static_cast<int>(c_.size()); }
  const Eigen::VectorXd& c() const noexcept { return c_; }
  const Eigen::VectorXd& s() const noexcept { return s_; }
  /// Σ² = 1 + Σ c_l²/s_l².
  double sigma2() const noexcept { return sigma2_; }
  const Eigen::MatrixXd& rho_f() const noexcept { return rho_f_; }
  const Eigen::MatrixXd& rho_f_inv() const noexcept { return rho_f_inv_; }
  /// Σ²·Π s_i².
  double det_rho_f() const noexcept { return det_; }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  Eigen::VectorXd c_;
  Eigen::VectorXd s_;
  double sigma2_ = 1.0;
  Eigen::MatrixXd rho_f_;
  Eigen::MatrixXd rho_f_inv_;
  double det_ = 1.0;
  std::vector<std::string> warnings_;
};

struct FitOptions {
  /// When false, a loading with |c| >= 1 throws LoadingOutOfRange instead of
  /// being clipped to ±clip_to.
  bool clip = true;
  double clip_to = 1.0 - 1e-6;
  /// Verify positive definiteness of ρ_f by eigendecomposition as well as
  /// the analytic s_i > 0 criterion.
  bool explicit_pd_check = true;
  /// Return the exact loadings when ρ's off-diagonal part is rank one
  /// (to kExactFitTolerance); otherwise, or when false, use row sums.
  bool exact_rank_one = true;
};

inline constexpr double kExactFitTolerance = 1e-13;

/// c_i = sgn(r_i)·√(|r_i|/(n-1)), r_i the off-diagonal row sum of ρ, unless
/// ρ is exactly one-factor, in which case its own loadings come back.
OneFactorModel fit_one_factor(const CorrelationMatrix& m, const FitOptions& options = {});

/// Single constant loading c = √(|Σ_{i≠l} ρ_il| / (n(n-1))) for every variable.
OneFactorModel fit_constant_factor(const CorrelationMatrix& m, const FitOptions& options = {});

/// Leading-k principal components with rows renormalized to unit diagonal.
/// Diagnostic only; the expansion never uses this matrix as its base.
Eigen::MatrixXd fit_pc_k_factor(const CorrelationMatrix& m, int k);

/// Closed-form inverse of ρ_f.
Eigen::MatrixXd analytic_inverse(const OneFactorModel& model);

}  // namespace pcdf
