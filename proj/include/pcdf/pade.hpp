#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pcdf {

/// Per-order terms I⁽⁰⁾, I⁽¹⁾, I⁽²⁾ of the perturbation series.
struct PadeInputs {
  double i0 = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
};

/// Outcome of a rational approximant. When the denominator is degenerate
/// the value falls back to the matching partial sum and `pole` is set.
struct PadeValue {
  double value = 0.0;
  bool pole = false;
};

/// Relative size below which a term is treated as zero.
inline constexpr double kPadeDegenerate = 1e-14;

double pade_0(const PadeInputs& in) noexcept;

/// [0/1]: i0²/(i0 - i1).
PadeValue pade_1(const PadeInputs& in) noexcept;

/// [1/1]: (i0 + i1 - i0·i2/i1) / (1 - i2/i1).
PadeValue pade_2_11(const PadeInputs& in) noexcept;

/// [0/2]: i0 / (1 - i1/i0 - i2/i0 + (i1/i0)²).
PadeValue pade_2_02(const PadeInputs& in) noexcept;

enum class PadePolicy { Max, Average };

double second_order_choice(double p11, double p02, PadePolicy policy) noexcept;

struct Extrapolation {
  double i_infinity = 0.0;
  /// Decay rate; +∞ for an already converged sequence, empty when no valid
  /// rate exists (then i_infinity falls back to pade2).
  std::optional<double> alpha;
  bool oscillating = false;
  bool converged = false;
  bool no_valid_alpha = false;
};

/// Fits P(β) = [P0 - I∞]·e^{-αβ}·g(β) + I∞ through β = 0, 1, 2 with
/// g = 1 or cos(πβ). Oscillation is detected from the sign of consecutive
/// differences unless `oscillating` is given.
Extrapolation extrapolate_infinity(double pade0, double pade1, double pade2,
                                   std::optional<bool> oscillating = std::nullopt) noexcept;

/// All approximants for one set of terms, with warnings for every fallback.
struct PadeSummary {
  double pade0 = 0.0;
  double pade1 = 0.0;
  double pade2_11 = 0.0;
  double pade2_02 = 0.0;
  double pade2 = 0.0;  // per policy
  Extrapolation extrapolation;
  std::vector<std::string> warnings;
};

PadeSummary summarize_pade(const PadeInputs& in, PadePolicy policy,
                           std::optional<bool> oscillating = std::nullopt);

}  // namespace pcdf
