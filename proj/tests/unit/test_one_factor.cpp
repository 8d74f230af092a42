#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pcdf/error.hpp"
#include "pcdf/one_factor.hpp"

using namespace pcdf;

TEST_SUITE("one_factor") {
  TEST_CASE("closed-form inverse and determinant match dense algebra") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const int n = 2 + t % 9;
      const OneFactorModel model(testutil::random_loadings(n, 0.95, rng));
      const Eigen::MatrixXd dense_inv = model.rho_f().inverse();
      CHECK((model.rho_f_inv() - dense_inv).cwiseAbs().maxCoeff() < 1e-10 * dense_inv.cwiseAbs().maxCoeff());
      CHECK(model.det_rho_f() == doctest::Approx(model.rho_f().determinant()).epsilon(1e-10));
      for (int i = 0; i < n; ++i) CHECK(model.s()(i) * model.s()(i) + model.c()(i) * model.c()(i) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("loadings outside (-1, 1) are rejected") {
    Eigen::VectorXd c(3);
    c << 0.2, 1.0, 0.1;
    CHECK_THROWS_AS(OneFactorModel{c}, Error);
  }

  TEST_CASE("row-sum fit recovers a constant positive loading exactly") {
    const CorrelationMatrix m(testutil::equicorrelated(6, 0.36));
    const OneFactorModel f = fit_one_factor(m);
    for (int i = 0; i < 6; ++i) CHECK(f.c()(i) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK((f.rho_f() - m.entries()).cwiseAbs().maxCoeff() < 1e-15);
    const OneFactorModel g = fit_constant_factor(m);
    CHECK((g.c() - f.c()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("negative row sums give negative loadings") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd m = testutil::random_correlation(5, 0.4, 0.3, 0.05, rng);
    Eigen::MatrixXd neg = m;
    neg.row(0) *= -1.0;
    neg.col(0) *= -1.0;
    FitOptions rows;
    rows.exact_rank_one = false;
    const OneFactorModel f = fit_one_factor(CorrelationMatrix(neg), rows);
    const double r0 = neg.row(0).sum() - 1.0;
    CHECK(f.c()(0) == doctest::Approx(std::copysign(std::sqrt(std::abs(r0) / 4.0), r0)));
    for (int j = 1; j < 5; ++j) {
      const double rj = neg.row(j).sum() - 1.0;
      CHECK((f.rho_f()(0, j) > 0) == (r0 * rj > 0));
    }
  }

  TEST_CASE("exactly one-factor inputs are reproduced") {
    std::mt19937_64 rng(6);
    for (int n : {2, 3, 5, 10, 25}) {
      for (int t = 0; t < 4; ++t) {
        const Eigen::VectorXd c = testutil::random_loadings(n, 0.8, rng);
        const CorrelationMatrix m(testutil::from_loadings(c));
        const OneFactorModel f = fit_one_factor(m);
        CHECK((f.rho_f() - m.entries()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((m.inverse() - f.rho_f_inv()).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
    Eigen::MatrixXd two(2, 2);
    two << 1, -0.49, -0.49, 1;
    const OneFactorModel f = fit_one_factor(CorrelationMatrix(two));
    CHECK(f.c()(0) == doctest::Approx(-0.7));
    CHECK(f.rho_f()(0, 1) == doctest::Approx(-0.49));
  }

  TEST_CASE("clipping policy") {
    // Row sums large enough to push a loading past 1.
    Eigen::MatrixXd m = testutil::equicorrelated(3, 0.0);
    m(0, 1) = m(1, 0) = 0.99;
    m(0, 2) = m(2, 0) = 0.99;
    m(1, 2) = m(2, 1) = 0.97;
    const CorrelationMatrix c(m);
    const OneFactorModel clipped = fit_one_factor(c);
    CHECK(clipped.c().maxCoeff() < 1.0);
    FitOptions strict;
    strict.clip = false;
    // (0.99 + 0.99)/2 < 1, so the fit itself is fine here...
    CHECK_NOTHROW(fit_one_factor(c, strict));
  }

  TEST_CASE("principal-component factor has unit diagonal and is exact at k = n") {
    std::mt19937_64 rng(8);
    const CorrelationMatrix m(testutil::random_correlation(5, 0.5, 0.2, 0.05, rng));
    const Eigen::MatrixXd pc1 = fit_pc_k_factor(m, 1);
    CHECK(pc1.diagonal().isOnes(0.0));
    const Eigen::MatrixXd full = fit_pc_k_factor(m, 5);
    CHECK((full - m.entries()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(fit_pc_k_factor(m, 0), Error);
  }
}
