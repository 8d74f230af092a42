#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "pcdf/error.hpp"
#include "pcdf/oracle.hpp"
#include "pcdf/special_fns.hpp"

using namespace pcdf;
using namespace pcdf::oracle;

TEST_SUITE("oracle") {
  TEST_CASE("Monte-Carlo Gaussian orthants") {
    const CorrelationMatrix id(Eigen::MatrixXd::Identity(2, 2));
    const OracleEstimate a = mc_gaussian_cdf(id, Eigen::VectorXd::Zero(2), 1000000, 1);
    CHECK(std::abs(a.value - 0.25) < 3 * a.std_error);
    CHECK(a.method == Method::McCholesky);

    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.5, 1;
    const OracleEstimate b = mc_gaussian_cdf(CorrelationMatrix(m), Eigen::VectorXd::Zero(2), 1000000, 2);
    CHECK(std::abs(b.value - 1.0 / 3.0) < 3 * b.std_error);
  }

  TEST_CASE("Monte-Carlo is reproducible and thread independent") {
    const CorrelationMatrix m(testutil::equicorrelated(3, 0.4));
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.3);
    const OracleEstimate a = mc_gaussian_cdf(m, x, 200000, 5, 1);
    const OracleEstimate b = mc_gaussian_cdf(m, x, 200000, 5, 4);
    CHECK(a.value == b.value);
    const OracleEstimate c = mc_gaussian_cdf(m, x, 200000, 6, 1);
    CHECK(a.value != c.value);
    CHECK_THROWS_AS(mc_gaussian_cdf(m, x, 100, 5), Error);
  }

  TEST_CASE("Monte-Carlo Student-t") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.5, 1;
    const OracleEstimate t = mc_student_t_cdf(CorrelationMatrix(m), Eigen::VectorXd::Zero(2), 3.0, 400000, 3);
    CHECK(std::abs(t.value - 1.0 / 3.0) < 3 * t.std_error);

    // Cauchy median via an unbounded second coordinate.
    Eigen::VectorXd x(2);
    x << 0.0, std::numeric_limits<double>::infinity();
    const OracleEstimate c = mc_student_t_cdf(CorrelationMatrix(Eigen::MatrixXd::Identity(2, 2)), x, 1.0, 400000, 4);
    CHECK(std::abs(c.value - 0.5) < 3 * c.std_error);

    const CorrelationMatrix e(testutil::equicorrelated(3, 0.3));
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 0.4);
    const OracleEstimate big = mc_student_t_cdf(e, y, 1e6, 400000, 5);
    const OracleEstimate g = mc_gaussian_cdf(e, y, 400000, 6);
    CHECK(std::abs(big.value - g.value) < 3 * std::hypot(big.std_error, g.std_error));
  }

  TEST_CASE("samplers") {
    Sampler s(123);
    double sum = 0.0, sq = 0.0, gsum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = s.normal();
      sum += z;
      sq += z * z;
      gsum += s.gamma(0.7);
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);
    CHECK(std::abs(gsum / n - 0.7) < 0.01);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  }

  TEST_CASE("tensor grid") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.5, 1;
    CHECK(std::abs(tensor_grid_cdf(CorrelationMatrix(m), Eigen::VectorXd::Zero(2), 200).value - 1.0 / 3.0) < 1e-8);

    Eigen::VectorXd x(3);
    x << -0.3, 0.8, 1.7;
    const double indep = normal_cdf(x(0)) * normal_cdf(x(1)) * normal_cdf(x(2));
    CHECK(std::abs(tensor_grid_cdf(CorrelationMatrix(Eigen::MatrixXd::Identity(3, 3)), x, 40).value - indep) < 1e-9);

    CHECK_THROWS_AS(tensor_grid_cdf(CorrelationMatrix(Eigen::MatrixXd::Identity(5, 5)), Eigen::VectorXd::Zero(5), 4),
                    Error);
  }

  TEST_CASE("Monte-Carlo and tensor grid agree") {
    std::mt19937_64 rng(17);
    for (int n = 2; n <= 4; ++n) {
      const CorrelationMatrix m(testutil::random_correlation(n, 0.5, 0.2, 0.05, rng));
      const Eigen::VectorXd x = testutil::uniform_vector(n, -1, 1.5, rng);
      const OracleEstimate g = tensor_grid_cdf(m, x, 32);
      const OracleEstimate mc = mc_gaussian_cdf(m, x, 400000, 100 + n);
      CHECK(std::abs(g.value - mc.value) < 3.5 * mc.std_error);
    }
  }

  TEST_CASE("bivariate orthant") {
    CHECK(bivariate_orthant(0.0) == 0.25);
    CHECK(bivariate_orthant(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("truncated moments") {
    CHECK(std::abs(truncated_moment(0, 0.0) - 0.5) < 1e-13);
    CHECK(std::abs(truncated_moment(1, 0.0) + kInvSqrt2Pi) < 1e-13);
    CHECK(std::abs(truncated_moment(4, std::numeric_limits<double>::infinity()) - 3.0) < 1e-12);
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(-8, 8);
    for (int t = 0; t < 200; ++t) {
      const double b = u(rng);
      for (int k = 0; k <= 4; ++k) CHECK(std::abs(truncated_moment(k, b) - truncated_moment_recursion(k, b)) < 1e-11);
    }
  }

  TEST_CASE("univariate t") {
    CHECK(student_t_cdf_1d(0.0, 3.0) == doctest::Approx(0.5));
    CHECK(student_t_cdf_1d(1.0, 1.0) == doctest::Approx(0.75));
  }

  TEST_CASE("JSON records round-trip") {
    OracleEstimate e{0.123, 0.0004, 1000000, Method::McCholesky, 42};
    const nlohmann::json j = to_json(e);
    CHECK(j.at("prng") == kPrngName);
    const OracleEstimate back = oracle_from_json(j);
    CHECK(back.value == e.value);
    CHECK(back.std_error == e.std_error);
    CHECK(back.samples_or_nodes == e.samples_or_nodes);
    CHECK(back.method == e.method);
    CHECK(back.seed == e.seed);
    CHECK_THROWS_AS(oracle_from_json(nlohmann::json{{"value", 1}}), Error);
  }
}
