#include "pcdf/special_fns.hpp"

#include <cmath>
#include <limits>

#include "pcdf/one_factor.hpp"

namespace pcdf {

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double inverse_mills(double b) noexcept {
  if (b == std::numeric_limits<double>::infinity()) return 0.0;
  if (b >= -10.0) return normal_pdf(b) / normal_cdf(b);
  // Φ(-t)/φ(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))), evaluated bottom-up.
  const double t = -b;
  double tail = t;
  for (int k = 120; k >= 1; --k) tail = t + k / tail;
  return tail;
}

TruncatedMoments truncated_moments(double c, double s, double zeta, double x_max) noexcept {
  TruncatedMoments out{};
  const double mu = c * zeta;
  const double b = (x_max - mu) / s;
  out.xi_max = b;
  if (b > kXiFlush) {
    // Full support: plain Gaussian moments of mu + s ξ.
    const double mu2 = mu * mu, s2 = s * s;
    out.chi = 0.0;
    out.w[0] = 1.0;
    out.w[1] = mu;
    out.w[2] = mu2 + s2;
    out.w[3] = mu2 * mu + 3.0 * mu * s2;
    out.w[4] = mu2 * mu2 + 6.0 * mu2 * s2 + 3.0 * s2 * s2;
    return out;
  }
  if (b < -kXiFlush) {
    out.chi = 0.0;
    for (double& w : out.w) w = 0.0;
    return out;
  }
  const double v = normal_cdf(b);
  const double chi = -normal_pdf(b);
  const double b2 = b * b;
  const double mu2 = mu * mu, s2 = s * s;
  out.chi = chi;
  out.w[0] = v;
  out.w[1] = mu * v + s * chi;
  out.w[2] = (mu2 + s2) * v + (2.0 * mu * s + s2 * b) * chi;
  out.w[3] = (mu2 * mu + 3.0 * mu * s2) * v +
             (3.0 * mu2 * s + 3.0 * mu * s2 * b + s2 * s * (b2 + 2.0)) * chi;
  out.w[4] = (mu2 * mu2 + 6.0 * mu2 * s2 + 3.0 * s2 * s2) * v +
             (4.0 * mu2 * mu * s + 6.0 * mu2 * s2 * b + 4.0 * mu * s2 * s * (b2 + 2.0) +
              s2 * s2 * b * (b2 + 3.0)) *
                 chi;
  return out;
}

FactorSlice build_factor_slice(double zeta, const OneFactorModel& model, const Eigen::VectorXd& xmax) {
  const int n = model.n();
  FactorSlice slice;
  slice.zeta = zeta;
  slice.xi_max.resize(n);
  slice.chi.resize(n);
  for (auto& w : slice.w) w.resize(n);
  slice.cond_mean.resize(n);
  slice.cond_m2.resize(n);
  slice.cond_m3.resize(n);
  slice.cond_m4.resize(n);

  const Eigen::VectorXd& c = model.c();
  const Eigen::VectorXd& s = model.s();
  double mass = 1.0;
  for (int i = 0; i < n; ++i) {
    const TruncatedMoments tm = truncated_moments(c(i), s(i), zeta, xmax(i));
    slice.xi_max(i) = tm.xi_max;
    slice.chi(i) = tm.chi;
    for (int k = 0; k < 5; ++k) slice.w[k](i) = tm.w[k];
    mass *= tm.w[0];

    // Moments of ξ given ξ < b.
    const double b = tm.xi_max;
    double e1 = 0.0, e2 = 1.0, e3 = 0.0, e4 = 3.0;
    if (tm.w[0] == 0.0) {
      e2 = e4 = 0.0;
    } else if (b <= kXiFlush) {
      const double lam = inverse_mills(b);
      e1 = -lam;
      e2 = 1.0 - b * lam;
      e3 = -(b * b + 2.0) * lam;
      e4 = 3.0 - (b * b * b + 3.0 * b) * lam;
    }
    const double e1sq = e1 * e1;
    const double var = e2 - e1sq;
    const double m3 = e3 - 3.0 * e1 * e2 + 2.0 * e1sq * e1;
    const double m4 = e4 - 4.0 * e1 * e3 + 6.0 * e1sq * e2 - 3.0 * e1sq * e1sq;
    const double si = s(i), s2 = si * si;
    slice.cond_mean(i) = c(i) * zeta + si * e1;
    slice.cond_m2(i) = s2 * var;
    slice.cond_m3(i) = s2 * si * m3;
    slice.cond_m4(i) = s2 * s2 * m4;
  }
  slice.mass = mass;
  return slice;
}

}  // namespace pcdf
