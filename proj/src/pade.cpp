#include "pcdf/pade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcdf {

namespace {

bool negligible(double x, double scale) noexcept { return std::abs(x) <= kPadeDegenerate * scale; }

PadeValue checked(double value, double fallback) noexcept {
  if (!std::isfinite(value)) return {fallback, true};
  return {value, false};
}

}  // namespace

double pade_0(const PadeInputs& in) noexcept { return in.i0; }

PadeValue pade_1(const PadeInputs& in) noexcept {
  const double partial = in.i0 + in.i1;
  if (in.i0 == 0.0) return {partial, partial != 0.0};
  const double den = in.i0 - in.i1;
  if (std::abs(den) < kPadeDegenerate * std::abs(in.i0)) return {partial, true};
  return checked(in.i0 * in.i0 / den, partial);
}

PadeValue pade_2_11(const PadeInputs& in) noexcept {
  const double partial = in.i0 + in.i1 + in.i2;
  const double scale = std::max({std::abs(in.i0), std::abs(in.i1), std::abs(in.i2)});
  if (scale == 0.0) return {0.0, false};
  // Collapsed series: the [1/1] form tends to the partial sum.
  if (negligible(in.i1, scale) && negligible(in.i2, scale)) return {partial, false};
  if (negligible(in.i1, std::abs(in.i0))) return {partial, true};
  if (std::abs(in.i1 - in.i2) < kPadeDegenerate * std::max(std::abs(in.i1), std::abs(in.i2))) {
    return {partial, true};
  }
  const double ratio = in.i2 / in.i1;
  return checked((in.i0 + in.i1 - in.i0 * ratio) / (1.0 - ratio), partial);
}

PadeValue pade_2_02(const PadeInputs& in) noexcept {
  const double partial = in.i0 + in.i1 + in.i2;
  if (in.i0 == 0.0) return {partial, partial != 0.0};
  const double scale = std::abs(in.i0);
  if (negligible(in.i1, scale) && negligible(in.i2, scale)) return {partial, false};
  const double r1 = in.i1 / in.i0;
  const double den = 1.0 - r1 - in.i2 / in.i0 + r1 * r1;
  if (std::abs(den) < kPadeDegenerate) return {partial, true};
  return checked(in.i0 / den, partial);
}

double second_order_choice(double p11, double p02, PadePolicy policy) noexcept {
  return policy == PadePolicy::Max ? std::max(p11, p02) : 0.5 * (p11 + p02);
}

Extrapolation extrapolate_infinity(double pade0, double pade1, double pade2,
                                   std::optional<bool> oscillating) noexcept {
  Extrapolation out;
  const double d01 = pade1 - pade0;
  const double d12 = pade2 - pade1;
  const double scale = std::max({std::abs(pade0), std::abs(pade1), std::abs(pade2),
                                 std::numeric_limits<double>::min()});
  out.oscillating = oscillating.value_or(d01 * d12 < 0.0);
  if (std::abs(d01) <= 1e-13 * scale && std::abs(d12) <= 1e-13 * scale) {
    out.converged = true;
    out.i_infinity = pade2;
    out.alpha = std::numeric_limits<double>::infinity();
    return out;
  }
  // Successive differences of the ansatz shrink by q·g(1), q = e^{-α}.
  const double r = d12 / d01;
  const double q = out.oscillating ? -r : r;
  if (d01 == 0.0 || !std::isfinite(r) || !(q > 0.0 && q < 1.0)) {
    out.no_valid_alpha = true;
    out.i_infinity = pade2;
    return out;
  }
  out.alpha = -std::log(q);
  out.i_infinity = pade2 + d12 * r / (1.0 - r);
  return out;
}

PadeSummary summarize_pade(const PadeInputs& in, PadePolicy policy, std::optional<bool> oscillating) {
  PadeSummary out;
  out.pade0 = pade_0(in);
  const PadeValue p1 = pade_1(in);
  const PadeValue p11 = pade_2_11(in);
  const PadeValue p02 = pade_2_02(in);
  out.pade1 = p1.value;
  out.pade2_11 = p11.value;
  out.pade2_02 = p02.value;
  if (p1.pole) out.warnings.emplace_back("PadePole: [0/1] denominator degenerate, using first-order partial sum");
  if (p11.pole) out.warnings.emplace_back("PadePole: [1/1] denominator degenerate, using second-order partial sum");
  if (p02.pole) out.warnings.emplace_back("PadePole: [0/2] denominator degenerate, using second-order partial sum");
  out.pade2 = second_order_choice(out.pade2_11, out.pade2_02, policy);
  out.extrapolation = extrapolate_infinity(out.pade0, out.pade1, out.pade2, oscillating);
  if (out.extrapolation.no_valid_alpha) {
    out.warnings.emplace_back("NoValidAlpha: extrapolation has no decay rate in (0, 1), using second-order Pade");
  }
  return out;
}

}  // namespace pcdf
