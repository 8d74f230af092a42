#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcdf/quadrature.hpp"

using namespace pcdf;

TEST_SUITE("quadrature") {
  TEST_CASE("Gauss-Legendre is exact for degree 2n-1") {
    for (int n : {1, 2, 5, 16, 64}) {
      const QuadratureRule r = gauss_legendre(n);
      double wsum = 0.0;
      for (double w : r.weights) wsum += w;
      CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
      for (int k = 0; k <= 2 * n - 1 && k <= 40; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
        const double exact = (k % 2) ? 0.0 : 2.0 / (k + 1);
        CHECK(std::abs(s - exact) < 1e-13);
      }
      for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
  }

  TEST_CASE("mapped and composite rules") {
    const QuadratureRule r = gauss_legendre(8, 1.0, 3.0);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * r.nodes[i] * r.nodes[i];
    CHECK(s == doctest::Approx(26.0 / 3.0).epsilon(1e-14));

    const QuadratureRule c = composite_gauss_legendre(8, 32, -10, 10);
    CHECK(c.size() == 256);
    double g = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) g += c.weights[i] * std::exp(-0.5 * c.nodes[i] * c.nodes[i]);
    CHECK(g == doctest::Approx(std::sqrt(2 * M_PI)).epsilon(1e-14));

    const QuadratureRule t = trapezoid(101, 0, 1);
    double lin = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) lin += t.weights[i] * t.nodes[i];
    CHECK(lin == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("pairwise sum depends only on the input order") {
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(1.0 / (i + 1));
    const double a = pairwise_sum(v);
    const double b = pairwise_sum(std::vector<double>(v));
    CHECK(a == b);
    double naive = 0.0;
    for (double x : v) naive += x;
    CHECK(a == doctest::Approx(naive).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  }
}
