#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "pcdf/error.hpp"
#include "pcdf/gauss_engine.hpp"
#include "pcdf/oracle.hpp"

using namespace pcdf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double product_phi(const Eigen::VectorXd& x) {
  double p = 1.0;
  for (int i = 0; i < x.size(); ++i) p *= normal_cdf(x(i));
  return p;
}

}  // namespace

TEST_SUITE("gauss_engine") {
  TEST_CASE("independent orthant") {
    const ExpansionResult r = expand(CorrelationMatrix(Eigen::MatrixXd::Identity(3, 3)), Eigen::VectorXd::Zero(3));
    CHECK(std::abs(r.i_infinity - 0.125) < 1e-8);
    CHECK(r.i1 == 0.0);
    CHECK(r.i2 == 0.0);
    CHECK(r.warnings.empty());
  }

  TEST_CASE("independence factorization with random limits") {
    std::mt19937_64 rng(2);
    for (int n = 2; n <= 8; ++n) {
      const Eigen::VectorXd x = testutil::uniform_vector(n, -2, 2, rng);
      const ExpansionResult r = expand(CorrelationMatrix(Eigen::MatrixXd::Identity(n, n)), x);
      CHECK(std::abs(r.partial2 - product_phi(x)) < 1e-8);
    }
  }

  TEST_CASE("exact one-factor input has vanishing corrections") {
    const ExpansionResult r = expand(CorrelationMatrix(testutil::equicorrelated(5, 0.36)), Eigen::VectorXd::Zero(5));
    CHECK(std::abs(r.i1) < 1e-12);
    CHECK(std::abs(r.i2) < 1e-12);
    CHECK(r.warnings.empty());

    const CorrelationMatrix four(testutil::equicorrelated(4, 0.36));
    Eigen::VectorXd x(4);
    x << 0.1, -0.4, 0.9, 0.0;
    const oracle::OracleEstimate grid = oracle::tensor_grid_cdf(four, x, 40);
    CHECK(std::abs(expand(four, x).i0 - grid.value) < 1e-7);
  }

  TEST_CASE("J and epsilon") {
    std::mt19937_64 rng(4);
    const CorrelationMatrix rho(testutil::random_correlation(5, 0.5, 0.2, 0.05, rng));
    const PerturbationSetup s = prepare(rho, Eigen::VectorXd::Zero(5));
    CHECK(s.j_norm == doctest::Approx(std::sqrt(s.model.det_rho_f() / rho.determinant())).epsilon(1e-12));
    const Eigen::MatrixXd eps = rho.inverse() - s.model.rho_f_inv();
    CHECK((s.eps - eps).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(s.eps.isApprox(s.eps.transpose(), 0.0));
  }

  TEST_CASE("naive and factored integrands agree node by node") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 10; ++t) {
      const int n = 2 + t;
      const CorrelationMatrix rho(testutil::random_correlation(n, 0.5, 0.15, 0.02, rng));
      Eigen::VectorXd x = testutil::uniform_vector(n, -1.5, 2.0, rng);
      if (t % 3 == 0) x(0) = kInf;
      const PerturbationSetup s = prepare(rho, x);
      for (double z : {-4.0, -1.1, 0.0, 0.7, 3.5}) {
        const FactorSlice slice = build_factor_slice(z, s.model, x);
        const double n1 = node_order1_naive(slice, s.eps), f1 = node_order1_factored(slice, s.eps);
        const double n2 = node_order2_naive(slice, s.eps), f2 = node_order2_factored(slice, s.eps);
        CHECK(std::abs(n1 - f1) < 1e-12 * std::max(1.0, std::abs(n1)));
        CHECK(std::abs(n2 - f2) < 1e-11 * std::max(1.0, std::abs(n2)));
      }
    }
  }

  TEST_CASE("order terms match direct expectations under the factor density") {
    // I(β) = J (1/β!)(-½)^β E_{ρ_f}[(xᵀεx)^β 1{x < xmax}]
    std::mt19937_64 rng(10);
    for (int t = 0; t < 3; ++t) {
      const CorrelationMatrix rho(testutil::random_correlation(3, 0.5, 0.2, 0.1, rng));
      const Eigen::VectorXd x = testutil::uniform_vector(3, -0.5, 1.5, rng);
      const PerturbationSetup s = prepare(rho, x);
      const OrderTerms terms = integrate_orders(s);
      auto quad = [&](const Eigen::VectorXd& y) { return y.dot(s.eps * y); };
      const double e0 = oracle::tensor_grid_expectation(s.model.rho_f(), x, 48, [](const Eigen::VectorXd&) { return 1.0; });
      const double e1 = oracle::tensor_grid_expectation(s.model.rho_f(), x, 48, quad);
      const double e2 =
          oracle::tensor_grid_expectation(s.model.rho_f(), x, 48, [&](const Eigen::VectorXd& y) { return quad(y) * quad(y); });
      CHECK(std::abs(terms.i0 - s.j_norm * e0) < 1e-9);
      CHECK(std::abs(terms.i1 + 0.5 * s.j_norm * e1) < 1e-9);
      CHECK(std::abs(terms.i2 - 0.125 * s.j_norm * e2) < 1e-9);
    }
  }

  TEST_CASE("index classes") {
    CHECK(index_class(0, 1, 2, 3) == 1);
    CHECK(index_class(0, 0, 1, 2) == 2);
    CHECK(index_class(1, 2, 0, 0) == 2);
    CHECK(index_class(0, 1, 0, 2) == 3);
    CHECK(index_class(0, 1, 2, 1) == 3);
    CHECK(index_class(0, 0, 1, 1) == 4);
    CHECK(index_class(0, 1, 0, 1) == 5);
    CHECK(index_class(0, 1, 1, 0) == 5);
    CHECK(index_class(0, 0, 0, 1) == 6);
    CHECK(index_class(1, 0, 1, 1) == 6);
    CHECK(index_class(2, 2, 2, 2) == 7);
    for (int n = 1; n <= 8; ++n) CHECK(enumerate_class_counts(n) == class_counts(n));
  }

  TEST_CASE("unbounded limits") {
    // Exactly one-factor: the whole series is i0 = 1.
    std::mt19937_64 rng(12);
    const CorrelationMatrix one(testutil::from_loadings(testutil::random_loadings(4, 0.8, rng)));
    CHECK(std::abs(expand(one, Eigen::VectorXd::Constant(4, 38.0)).partial2 - 1.0) < 1e-8);
    // Otherwise the box is all of space and i0 = J exactly.
    const CorrelationMatrix rho(testutil::random_correlation(4, 0.5, 0.2, 0.05, rng));
    const ExpansionResult r = expand(rho, Eigen::VectorXd::Constant(4, std::numeric_limits<double>::infinity()));
    CHECK(std::abs(r.i0 - r.j_norm) < 1e-12);
    CHECK(std::abs(r.partial2 - 1.0) < std::abs(r.partial0 - 1.0));
  }

  TEST_CASE("infinite limits marginalize") {
    Eigen::VectorXd x(3);
    x << 0.0, 0.0, kInf;
    const ExpansionResult r = expand(CorrelationMatrix(testutil::equicorrelated(3, 0.5)), x);
    CHECK(std::abs(r.i_infinity - 1.0 / 3.0) < 1e-8);
  }

  TEST_CASE("order zero is monotone in each limit") {
    std::mt19937_64 rng(13);
    const CorrelationMatrix rho(testutil::random_correlation(4, 0.5, 0.2, 0.05, rng));
    Eigen::VectorXd x = testutil::uniform_vector(4, -1, 1, rng);
    const PerturbationSetup base = prepare(rho, x);
    double prev = order0(base);
    for (int step = 0; step < 5; ++step) {
      x(2) += 0.3;
      const double next = order0(prepare(rho, x));
      CHECK(next >= prev);
      prev = next;
    }
  }

  TEST_CASE("thread count never changes the bits") {
    std::mt19937_64 rng(14);
    const CorrelationMatrix rho(testutil::random_correlation(6, 0.5, 0.2, 0.05, rng));
    const Eigen::VectorXd x = testutil::uniform_vector(6, -1, 1, rng);
    EngineOptions one, many;
    one.threads = 1;
    many.threads = 7;
    const ExpansionResult a = expand(rho, x, {}, one), b = expand(rho, x, {}, many);
    CHECK(a.i0 == b.i0);
    CHECK(a.i1 == b.i1);
    CHECK(a.i2 == b.i2);
    CHECK(a.i_infinity == b.i_infinity);
  }

  TEST_CASE("doubling the grid barely moves the result") {
    std::mt19937_64 rng(15);
    const CorrelationMatrix rho(testutil::random_correlation(4, 0.5, 0.2, 0.05, rng));
    const Eigen::VectorXd x = testutil::uniform_vector(4, -1, 2, rng);
    QuadratureConfig fine;
    fine.nodes = 512;
    CHECK(std::abs(expand(rho, x).partial2 - expand(rho, x, fine).partial2) < 1e-7);
  }

  TEST_CASE("under-resolved grids are flagged") {
    std::mt19937_64 rng(16);
    const CorrelationMatrix rho(testutil::random_correlation(8, 0.6, 0.1, 0.05, rng));
    QuadratureConfig coarse;
    coarse.nodes = 16;
    coarse.panels = 1;
    coarse.lambda_cut = 10;
    const ExpansionResult r = expand(rho, Eigen::VectorXd::Constant(8, 1.0), coarse);
    bool flagged = false;
    for (const auto& w : r.warnings) flagged = flagged || w.rfind("QuadratureUnderResolved", 0) == 0;
    CHECK(flagged);
  }

  TEST_CASE("quadrature configuration is validated") {
    QuadratureConfig bad;
    bad.nodes = 8;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.nodes = 100;
    CHECK_THROWS_AS(bad.validate(), Error);  // not a multiple of 8 panels
    bad.nodes = 256;
    bad.lambda_cut = 3;
    CHECK_THROWS_AS(bad.validate(), Error);
    const CorrelationMatrix id(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(prepare(id, Eigen::VectorXd::Zero(3)), Error);
  }

  TEST_CASE("sensitivity") {
    const CorrelationMatrix a(testutil::equicorrelated(3, 0.30)), b(testutil::equicorrelated(3, 0.35));
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);

    const SensitivityResult same = correlation_sensitivity(a, a, x);
    CHECK(same.d_i0 == 0.0);
    CHECK(same.d_partial2 == 0.0);
    CHECK(same.d_i_infinity == 0.0);

    const SensitivityResult up = correlation_sensitivity(a, b, x);
    const oracle::McDifference mc = oracle::mc_gaussian_cdf_difference(a, b, x, 400000, 7);
    CHECK(up.d_partial2 > 0.0);
    CHECK(mc.difference > 0.0);
    CHECK(std::abs(up.d_i_infinity - mc.difference) < 0.1 * std::abs(mc.difference) + 3 * mc.std_error);

    // Antisymmetry only under an explicitly shared base.
    const OneFactorModel shared = fit_one_factor(a);
    const SensitivityResult fwd = correlation_sensitivity(a, b, shared, x);
    const SensitivityResult bwd = correlation_sensitivity(b, a, shared, x);
    CHECK(fwd.d_partial2 == -bwd.d_partial2);

    const CorrelationMatrix two(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(correlation_sensitivity(a, two, x), Error);
  }

  TEST_CASE("metrics") {
    const CorrelationMatrix equi(testutil::equicorrelated(6, 0.25));
    const PerturbationSetup s = prepare(equi, Eigen::VectorXd::Zero(6));
    REQUIRE(s.metrics.sigma2_rho_int);
    CHECK(*s.metrics.sigma2_rho_int == 0.0);
    CHECK(!s.metrics.regularization_suggested);

    // λ_min = 1e-5 through a nearly duplicated variable.
    Eigen::MatrixXd m = testutil::equicorrelated(4, 0.2);
    const double r = 1.0 - 2e-5 / 2.0;
    m(0, 1) = m(1, 0) = r;
    const CorrelationMatrix near(m);
    REQUIRE(near.min_eigenvalue() < 1e-4);
    const PerturbationSetup ns = prepare(near, Eigen::VectorXd::Zero(4));
    CHECK(ns.metrics.regularization_suggested);
  }
}
