#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pcdf/one_factor.hpp"
#include "pcdf/oracle.hpp"
#include "pcdf/special_fns.hpp"

using namespace pcdf;

TEST_SUITE("special_fns") {
  TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-15));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-12));
    CHECK(normal_cdf(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(normal_cdf(-std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(normal_pdf(0.0) == doctest::Approx(kInvSqrt2Pi));
  }

  TEST_CASE("inverse Mills ratio is continuous across the branch switch") {
    const double direct = normal_pdf(-10.0) / normal_cdf(-10.0);
    CHECK(inverse_mills(-10.0) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(inverse_mills(-10.0 - 1e-9) == doctest::Approx(direct).epsilon(1e-8));
    // Asymptotically λ(b) ≈ -b.
    CHECK(inverse_mills(-200.0) == doctest::Approx(200.0 + 1.0 / 200.0).epsilon(1e-6));
    CHECK(inverse_mills(std::numeric_limits<double>::infinity()) == 0.0);
  }

  TEST_CASE("closed-form truncated moments agree with quadrature") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uc(-0.95, 0.95), uz(-6, 6), ux(-5, 5);
    for (int t = 0; t < 300; ++t) {
      const double c = uc(rng), s = std::sqrt(1 - c * c), z = uz(rng), x = ux(rng);
      const TruncatedMoments tm = truncated_moments(c, s, z, x);
      for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(tm.w[k] - oracle::shifted_truncated_moment(k, c, s, z, tm.xi_max)) < 1e-9);
      }
    }
  }

  TEST_CASE("flush limits") {
    const double inf = std::numeric_limits<double>::infinity();
    const TruncatedMoments full = truncated_moments(0.5, std::sqrt(0.75), 0.4, inf);
    CHECK(full.w[0] == 1.0);
    CHECK(full.w[1] == doctest::Approx(0.2));
    CHECK(full.w[2] == doctest::Approx(0.04 + 0.75));
    CHECK(full.chi == 0.0);
    const TruncatedMoments none = truncated_moments(0.5, std::sqrt(0.75), 0.4, -inf);
    for (double w : none.w) CHECK(w == 0.0);
  }

  TEST_CASE("conditional moments reproduce the raw truncated moments") {
    Eigen::VectorXd c(4), x(4);
    c << 0.3, -0.5, 0.8, 0.0;
    x << 0.2, -1.0, 1.5, std::numeric_limits<double>::infinity();
    const OneFactorModel model(c);
    for (double zeta : {-3.0, -0.4, 0.0, 2.2}) {
      const FactorSlice s = build_factor_slice(zeta, model, x);
      double mass = 1.0;
      for (int i = 0; i < 4; ++i) {
        const double v = s.v()(i), m = s.cond_mean(i), k2 = s.cond_m2(i), k3 = s.cond_m3(i), k4 = s.cond_m4(i);
        mass *= v;
        CHECK(v * m == doctest::Approx(s.w[1](i)).epsilon(1e-12));
        CHECK(v * (k2 + m * m) == doctest::Approx(s.w[2](i)).epsilon(1e-12));
        CHECK(v * (k3 + 3 * m * k2 + m * m * m) == doctest::Approx(s.w[3](i)).epsilon(1e-11));
        CHECK(v * (k4 + 4 * m * k3 + 6 * m * m * k2 + m * m * m * m) == doctest::Approx(s.w[4](i)).epsilon(1e-11));
      }
      CHECK(s.mass == doctest::Approx(mass));
    }
  }
}
