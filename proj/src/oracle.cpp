#include "pcdf/oracle.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "pcdf/error.hpp"
#include "pcdf/quadrature.hpp"
#include "pcdf/special_fns.hpp"

namespace pcdf::oracle {

std::string to_string(Method m) {
  switch (m) {
    case Method::McCholesky: return "mc_cholesky";
    case Method::TensorGrid: return "tensor_grid";
    case Method::ClosedForm: return "closed_form";
    case Method::MomentQuadrature: return "moment_quadrature";
  }
  return "unknown";
}

namespace {

Method method_from_string(const std::string& s) {
  for (Method m : {Method::McCholesky, Method::TensorGrid, Method::ClosedForm, Method::MomentQuadrature}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorKind::ParseError, "unknown oracle method '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const OracleEstimate& e) {
  nlohmann::json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["samples"] = e.samples_or_nodes;
  j["method"] = to_string(e.method);
  j["seed"] = e.seed;
  if (e.method == Method::McCholesky) j["prng"] = kPrngName;
  return j;
}

OracleEstimate oracle_from_json(const nlohmann::json& j) {
  try {
    OracleEstimate e;
    e.value = j.at("value").get<double>();
    e.std_error = j.at("std_error").get<double>();
    e.samples_or_nodes = j.at("samples").get<long long>();
    e.method = method_from_string(j.at("method").get<std::string>());
    e.seed = j.at("seed").get<std::uint64_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::ParseError, std::string("oracle record: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// Sampling

Sampler::Sampler(std::uint64_t seed) : engine_(seed) {}

double Sampler::uniform() {
  // 53 high bits, shifted half a step so 0 and 1 never occur.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Sampler::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Sampler::gamma(double shape) {
  if (!(shape > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma shape must be positive");
  if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr long long kBatch = 1 << 16;

Eigen::MatrixXd cholesky(const CorrelationMatrix& rho) {
  Eigen::LLT<Eigen::MatrixXd> llt(rho.entries());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::CholeskyFailure, "LLT failed on a validated matrix");
  return llt.matrixL();
}

void check_samples(long long samples) {
  if (samples < 10000) throw Error(ErrorKind::InvalidArgument, "Monte-Carlo needs at least 1e4 samples");
}

// Runs body(batch, batch_size) for every batch; each batch writes its own slot.
template <typename Body>
void for_batches(long long samples, int threads, Body body) {
  const long long batches = (samples + kBatch - 1) / kBatch;
  auto run = [&](long long first, long long step) {
    for (long long b = first; b < batches; b += step) {
      body(b, std::min(kBatch, samples - b * kBatch));
    }
  };
  int t = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  t = static_cast<int>(std::min<long long>(t, batches));
  if (t <= 1) {
    run(0, 1);
    return;
  }
  std::vector<std::jthread> pool;
  for (int k = 0; k < t; ++k) pool.emplace_back(run, k, t);
}

bool inside(const Eigen::VectorXd& x, const Eigen::VectorXd& xmax) {
  for (int i = 0; i < x.size(); ++i)
    if (!(x(i) <= xmax(i))) return false;
  return true;
}

OracleEstimate mc_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, double nu, long long samples,
                      std::uint64_t seed, int threads) {
  check_samples(samples);
  if (xmax.size() != rho.n()) throw Error(ErrorKind::DimensionMismatch, "limits do not match matrix dimension");
  const Eigen::MatrixXd L = cholesky(rho);
  const int n = rho.n();
  const long long batches = (samples + kBatch - 1) / kBatch;
  std::vector<long long> hits(batches, 0);
  for_batches(samples, threads, [&](long long b, long long size) {
    Sampler rng(derive_seed(seed, b));
    Eigen::VectorXd z(n), x(n);
    long long h = 0;
    for (long long s = 0; s < size; ++s) {
      for (int i = 0; i < n; ++i) z(i) = rng.normal();
      x.noalias() = L * z;
      if (nu > 0.0) x /= std::sqrt(rng.chi_square(nu) / nu);
      h += inside(x, xmax);
    }
    hits[b] = h;
  });
  long long total = 0;
  for (long long h : hits) total += h;
  OracleEstimate e;
  e.value = static_cast<double>(total) / samples;
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / samples);
  e.samples_or_nodes = samples;
  e.method = Method::McCholesky;
  e.seed = seed;
  return e;
}

}  // namespace

OracleEstimate mc_gaussian_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, long long samples,
                               std::uint64_t seed, int threads) {
  return mc_cdf(rho, xmax, 0.0, samples, seed, threads);
}

OracleEstimate mc_student_t_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, double nu,
                                long long samples, std::uint64_t seed, int threads) {
  if (!(nu > 0.0)) throw Error(ErrorKind::InvalidArgument, "nu must be positive");
  return mc_cdf(rho, xmax, nu, samples, seed, threads);
}

McDifference mc_gaussian_cdf_difference(const CorrelationMatrix& rho1, const CorrelationMatrix& rho2,
                                        const Eigen::VectorXd& xmax, long long samples, std::uint64_t seed,
                                        int threads) {
  check_samples(samples);
  if (rho1.n() != rho2.n() || xmax.size() != rho1.n()) {
    throw Error(ErrorKind::DimensionMismatch, "matrices and limits must share a dimension");
  }
  const Eigen::MatrixXd L1 = cholesky(rho1), L2 = cholesky(rho2);
  const int n = rho1.n();
  const long long batches = (samples + kBatch - 1) / kBatch;
  std::vector<long long> net(batches, 0), nonzero(batches, 0);
  for_batches(samples, threads, [&](long long b, long long size) {
    Sampler rng(derive_seed(seed, b));
    Eigen::VectorXd z(n);
    long long d = 0, nz = 0;
    for (long long s = 0; s < size; ++s) {
      for (int i = 0; i < n; ++i) z(i) = rng.normal();
      const int in1 = inside(L1 * z, xmax), in2 = inside(L2 * z, xmax);
      d += in2 - in1;
      nz += in1 != in2;
    }
    net[b] = d;
    nonzero[b] = nz;
  });
  long long d = 0, nz = 0;
  for (long long b = 0; b < batches; ++b) d += net[b], nz += nonzero[b];
  const double mean = static_cast<double>(d) / samples;
  const double second = static_cast<double>(nz) / samples;
  return {mean, std::sqrt(std::max(0.0, second - mean * mean) / samples)};
}

// ---------------------------------------------------------------------------
// Deterministic oracles

double tensor_grid_expectation(const Eigen::MatrixXd& cov, const Eigen::VectorXd& xmax, int nodes_per_dim,
                               const std::function<double(const Eigen::VectorXd&)>& f) {
  const int n = static_cast<int>(cov.rows());
  if (xmax.size() != n) throw Error(ErrorKind::DimensionMismatch, "limits do not match covariance dimension");
  if (nodes_per_dim < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes per dimension");

  std::vector<QuadratureRule> rules(n);
  for (int i = 0; i < n; ++i) {
    const double hi = std::min(xmax(i), -kGridLower);
    if (!(hi > kGridLower)) return 0.0;
    rules[i] = gauss_legendre(nodes_per_dim, kGridLower, hi);
  }
  const Eigen::MatrixXd prec = cov.inverse();
  const double norm = 1.0 / std::sqrt(std::pow(2.0 * std::numbers::pi, n) * cov.determinant());

  // Odometer over the tensor grid; inner sums are accumulated per axis so
  // the reduction order is fixed.
  std::vector<int> idx(n, 0);
  std::vector<double> acc(n + 1, 0.0);
  Eigen::VectorXd x(n);
  for (;;) {
    for (int i = 0; i < n; ++i) x(i) = rules[i].nodes[idx[i]];
    acc[n] = f(x) * std::exp(-0.5 * x.dot(prec * x));
    // Carry: add the innermost value and roll over completed axes.
    int axis = n - 1;
    acc[axis] += rules[axis].weights[idx[axis]] * acc[n];
    while (axis >= 0 && ++idx[axis] == nodes_per_dim) {
      idx[axis] = 0;
      if (axis == 0) return norm * acc[0];
      acc[axis - 1] += rules[axis - 1].weights[idx[axis - 1]] * acc[axis];
      acc[axis] = 0.0;
      --axis;
    }
  }
}

OracleEstimate tensor_grid_cdf(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, int nodes_per_dim) {
  if (rho.n() > 4) {
    throw Error(ErrorKind::DimensionTooLarge, "tensor grid limited to n <= 4, got " + std::to_string(rho.n()));
  }
  OracleEstimate e;
  e.value = tensor_grid_expectation(rho.entries(), xmax, nodes_per_dim, [](const Eigen::VectorXd&) { return 1.0; });
  e.samples_or_nodes = static_cast<long long>(std::pow(nodes_per_dim, rho.n()));
  e.method = Method::TensorGrid;
  return e;
}

double bivariate_orthant(double rho) noexcept { return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi); }

namespace {

constexpr double kMomentSpan = 40.0;

template <typename F>
double integrate_below(F f, double upper) {
  const double hi = std::min(upper, kMomentSpan);
  if (!(hi > -kMomentSpan)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  // Split at 0 when possible so the bump is not straddled by one coarse panel.
  if (hi > 0.0) {
    return gauss_kronrod<double, 61>::integrate(f, -kMomentSpan, 0.0, 15, 1e-13) +
           gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 15, 1e-13);
  }
  return gauss_kronrod<double, 61>::integrate(f, -kMomentSpan, hi, 15, 1e-13);
}

}  // namespace

double truncated_moment(int k, double upper) {
  if (k < 0 || k > 4) throw Error(ErrorKind::InvalidArgument, "moment order must be in 0..4");
  return integrate_below([k](double xi) { return std::pow(xi, k) * normal_pdf(xi); }, upper);
}

double truncated_moment_recursion(int k, double upper) {
  if (k < 0 || k > 4) throw Error(ErrorKind::InvalidArgument, "moment order must be in 0..4");
  const double phi = std::isinf(upper) ? 0.0 : normal_pdf(upper);
  double m_prev = normal_cdf(upper);  // M_0
  if (k == 0) return m_prev;
  double m = -phi;  // M_1
  double power = 1.0;
  for (int j = 2; j <= k; ++j) {
    power *= upper;
    const double next = (j - 1) * m_prev - (phi == 0.0 ? 0.0 : power * phi);
    m_prev = m;
    m = next;
  }
  return m;
}

double shifted_truncated_moment(int k, double c, double s, double zeta, double xi_max) {
  if (k < 0 || k > 4) throw Error(ErrorKind::InvalidArgument, "moment order must be in 0..4");
  const double mu = c * zeta;
  return integrate_below([=](double xi) { return std::pow(mu + s * xi, k) * normal_pdf(xi); }, xi_max);
}

double student_t_cdf_1d(double x, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorKind::InvalidArgument, "nu must be positive");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

}  // namespace pcdf::oracle
