#pragma once

#include <Eigen/Dense>

namespace pcdf {

class OneFactorModel;

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) noexcept;

/// Φ(x) = ½ erfc(-x/√2). Exact 0/1 at ∓∞.
double normal_cdf(double x) noexcept;

/// Inverse Mills ratio φ(b)/Φ(b), stable for very negative b.
double inverse_mills(double b) noexcept;

/// ξ beyond which the truncated moments are replaced by their limits.
inline constexpr double kXiFlush = 38.0;

/// Everything the ζ-integrands need at one node. Arrays are indexed by
/// variable. `w[k]` holds the truncated moment
///   ∫_{-∞}^{ξ_max} (cζ + sξ)^k φ(ξ) dξ,   k = 0..4
/// so w[0] is v = Φ(ξ_max).
struct FactorSlice {
  double zeta = 0.0;
  Eigen::VectorXd xi_max;
  Eigen::VectorXd chi;  // -φ(ξ_max)
  Eigen::VectorXd w[5];

  // Moments of x_i conditioned on ξ_i < ξ_max (valid where v_i > 0):
  // mean and central moments of order 2..4.
  Eigen::VectorXd cond_mean;
  Eigen::VectorXd cond_m2;
  Eigen::VectorXd cond_m3;
  Eigen::VectorXd cond_m4;

  /// Π_i v_i.
  double mass = 1.0;

  const Eigen::VectorXd& v() const noexcept { return w[0]; }
  int n() const noexcept { return static_cast<int>(xi_max.size()); }
};

/// Builds the slice at `zeta`. `xmax` entries may be ±∞.
FactorSlice build_factor_slice(double zeta, const OneFactorModel& model, const Eigen::VectorXd& xmax);

/// Single-variable version of the truncated moments above, written out with
/// the closed forms in terms of v and χ. Returns w[0..4].
struct TruncatedMoments {
  double xi_max;
  double chi;
  double w[5];
};
TruncatedMoments truncated_moments(double c, double s, double zeta, double x_max) noexcept;

}  // namespace pcdf
