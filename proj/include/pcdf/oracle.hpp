#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include <json.hpp>

#include "pcdf/corr_matrix.hpp"

namespace pcdf::oracle {

enum class Method { McCholesky, TensorGrid, ClosedForm, MomentQuadrature };

std::string to_string(Method m);

struct OracleEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic methods
  long long samples_or_nodes = 0;
  Method method = Method::ClosedForm;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const OracleEstimate& e);
OracleEstimate oracle_from_json(const nlohmann::json& j);

/// Name of the generator behind the Monte-Carlo oracles. Uniforms come from
/// std::mt19937_64 (53 high bits), normals from Box–Muller, gammas from
/// Marsaglia–Tsang; every stage is spelled out so results reproduce across
/// standard libraries.
inline constexpr const char* kPrngName = "mt19937_64/box-muller/marsaglia-tsang";

/// Reproducible sampler.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed);
  double uniform();          // (0, 1)
  double normal();
  double gamma(double shape);  // unit scale
  double chi_square(double nu) { return 2.0 * gamma(0.5 * nu); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 step; used to derive per-batch seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// P(X ≤ xmax) for X ~ N(0, ρ) by Cholesky sampling. samples >= 10⁴.
OracleEstimate mc_gaussian_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax,
                               long long samples, std::uint64_t seed, int threads = 0);

/// Multivariate Student-t: Z / √(χ²_ν/ν) with Z ~ N(0, ρ).
OracleEstimate mc_student_t_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, double nu,
                                long long samples, std::uint64_t seed, int threads = 0);

struct McDifference {
  double difference = 0.0;  // P(ρ2) - P(ρ1)
  double std_error = 0.0;
};

/// Common-random-number estimate of P(ρ2) - P(ρ1).
McDifference mc_gaussian_cdf_difference(const CorrelationMatrix& rho1, const CorrelationMatrix& rho2,
                                        const Eigen::VectorXd& xmax, long long samples,
                                        std::uint64_t seed, int threads = 0);

/// Lower edge of the truncated integration box.
inline constexpr double kGridLower = -12.0;

/// Tensor-product Gauss–Legendre integral of the N(0, ρ) density over the
/// box [-12, xmax_i] (∞ limits capped at +12). n <= 4.
OracleEstimate tensor_grid_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, int nodes_per_dim);

/// Same grid, ∫ f(x) · density(x; cov) dx for an arbitrary covariance
/// (density normalized with det(cov)).
double tensor_grid_expectation(const Eigen::MatrixXd& cov, const Eigen::VectorXd& xmax, int nodes_per_dim,
                               const std::function<double(const Eigen::VectorXd&)>& f);

/// 1/4 + asin(ρ)/(2π).
double bivariate_orthant(double rho) noexcept;

/// ∫_{-∞}^{upper} ξ^k φ(ξ) dξ by adaptive Gauss–Kronrod.
double truncated_moment(int k, double upper);

/// Same moment from the closed-form φ/Φ recursion
/// M_k = (k-1) M_{k-2} - upper^{k-1} φ(upper).
double truncated_moment_recursion(int k, double upper);

/// ∫_{-∞}^{xi_max} (cζ + sξ)^k φ(ξ) dξ by adaptive quadrature.
double shifted_truncated_moment(int k, double c, double s, double zeta, double xi_max);

/// Univariate Student-t CDF (regularized incomplete beta).
double student_t_cdf_1d(double x, double nu);

}  // namespace pcdf::oracle
