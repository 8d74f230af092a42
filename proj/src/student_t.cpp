#include "pcdf/student_t.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "pcdf/error.hpp"
#include "pcdf/quadrature.hpp"

namespace pcdf {

namespace {

void validate(double nu, const YQuadrature& yq) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw Error(ErrorKind::InvalidArgument, "nu must be positive and finite");
  if (yq.y_nodes < 32) throw Error(ErrorKind::InvalidArgument, "y_nodes must be >= 32");
  if (yq.panels < 1 || yq.y_nodes % yq.panels != 0) {
    throw Error(ErrorKind::InvalidArgument, "y_nodes must be a multiple of the panel count");
  }
  if (yq.y_max && !(*yq.y_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "y_max must be positive");
}

// Smallest m with mν a positive integer (u^{mν-1} is then a polynomial),
// else m with mν >= 4.
int endpoint_power(double nu) {
  const int fallback = std::max(1, static_cast<int>(std::ceil(4.0 / nu)));
  for (int m = 1; m <= fallback; ++m) {
    const double p = m * nu;
    if (p >= 1.0 - 1e-12 && std::abs(p - std::round(p)) < 1e-12) return m;
  }
  return fallback;
}

}  // namespace

RadialGrid make_radial_grid(double nu, const YQuadrature& yq) {
  validate(nu, yq);
  const double centre = std::sqrt(nu);
  const double hi = yq.y_max.value_or(centre + 12.0);
  const double lo = std::max(0.0, centre - 12.0);
  if (!(hi > lo)) throw Error(ErrorKind::InvalidArgument, "y_max lies below the radial window");
  const int per_panel = yq.y_nodes / yq.panels;
  const double width = (hi - lo) / yq.panels;
  const QuadratureRule unit = gauss_legendre(per_panel, 0.0, 1.0);
  const double log_norm = (1.0 - 0.5 * nu) * std::numbers::ln2 - std::lgamma(0.5 * nu);

  // log of the normalized radial density. For large ν the lgamma route
  // loses ~1e-9 to cancellation; centred at y0 = √ν the constant collapses
  // to -½ln π minus the Stirling remainder of ln Γ(ν/2).
  const bool centred = nu >= 50.0;
  double centred_const = 0.0;
  if (centred) {
    const double a = 0.5 * nu, a2 = a * a;
    const double stirling = (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * a2)) / a2) / a2) / a;
    centred_const = -0.5 * std::log(std::numbers::pi) - stirling;
  }
  auto log_density = [&](double y) {
    if (centred) return centred_const + (nu - 1.0) * std::log1p((y - centre) / centre) - 0.5 * (y - centre) * (y + centre);
    return log_norm + (nu - 1.0) * std::log(y) - 0.5 * y * y;
  };

  RadialGrid grid;
  grid.y.reserve(yq.y_nodes);
  grid.weight.reserve(yq.y_nodes);
  for (int p = 0; p < yq.panels; ++p) {
    const double a = lo + p * width;
    if (p == 0 && lo == 0.0) {
      // y = h·u^m flattens the y^{ν-1} endpoint: the density becomes
      // h^ν m u^{mν-1} e^{-y²/2} du.
      const int m = endpoint_power(nu);
      for (std::size_t i = 0; i < unit.size(); ++i) {
        const double u = unit.nodes[i];
        const double y = width * std::pow(u, m);
        const double log_w = log_norm + nu * std::log(width) + std::log(static_cast<double>(m)) +
                             (m * nu - 1.0) * std::log(u) - 0.5 * y * y;
        grid.y.push_back(y);
        grid.weight.push_back(unit.weights[i] * std::exp(log_w));
      }
      continue;
    }
    for (std::size_t i = 0; i < unit.size(); ++i) {
      const double y = a + width * unit.nodes[i];
      grid.y.push_back(y);
      grid.weight.push_back(width * unit.weights[i] * std::exp(log_density(y)));
    }
  }
  return grid;
}

double radial_weight_normalization(double nu, const YQuadrature& yq) {
  return pairwise_sum(make_radial_grid(nu, yq).weight);
}

namespace {

OrderTerms integrate_radial(const PerturbationSetup& base, double nu, const YQuadrature& yq,
                            const EngineOptions& options) {
  const RadialGrid grid = make_radial_grid(nu, yq);
  const std::size_t count = grid.y.size();
  std::vector<double> t0(count), t1(count), t2(count);
  EngineOptions inner = options;
  inner.threads = 1;
  inner.check_resolution = false;
  const double scale = 1.0 / std::sqrt(nu);

  auto work = [&](std::size_t first, std::size_t step) {
    PerturbationSetup setup = base;
    for (std::size_t q = first; q < count; q += step) {
      // ±∞ and 0 limits are left untouched by the rescaling.
      setup.xmax = base.xmax * (grid.y[q] * scale);
      for (int i = 0; i < base.xmax.size(); ++i)
        if (std::isinf(base.xmax(i)) || base.xmax(i) == 0.0) setup.xmax(i) = base.xmax(i);
      const OrderTerms t = integrate_orders(setup, base.quad, inner);
      t0[q] = grid.weight[q] * t.i0;
      t1[q] = grid.weight[q] * t.i1;
      t2[q] = grid.weight[q] * t.i2;
    }
  };
  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
  }
  return {pairwise_sum(t0), pairwise_sum(t1), pairwise_sum(t2)};
}

}  // namespace

ExpansionResult student_t_expand(const StudentTRequest& req, const EngineOptions& options) {
  validate(req.nu, req.y_quad);
  const PerturbationSetup base = prepare(req.rho, req.xmax, req.quad);

  const OrderTerms terms = integrate_radial(base, req.nu, req.y_quad, options);
  ExpansionResult r = assemble_result(terms, options);
  r.j_norm = base.j_norm;
  r.metrics = base.metrics;
  r.node_count = static_cast<int>(make_zeta_grid(base.quad).zeta.size()) * req.y_quad.y_nodes;

  std::vector<std::string> warnings = base.warnings;
  if (options.check_resolution) {
    YQuadrature fine_y = req.y_quad;
    fine_y.y_nodes *= 2;
    const ExpansionResult fine = assemble_result(integrate_radial(base, req.nu, fine_y, options), options);
    const double shift = std::max({std::abs(fine.partial0 - r.partial0), std::abs(fine.partial1 - r.partial1),
                                   std::abs(fine.partial2 - r.partial2)});
    if (shift > 1e-7) {
      std::ostringstream os;
      os.precision(3);
      os << "YIntegralUnderResolved: doubling y nodes moves a partial sum by " << shift;
      warnings.push_back(os.str());
    }
  }
  warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
  r.warnings = std::move(warnings);
  return r;
}

double gaussian_limit_check(const StudentTRequest& req, const EngineOptions& options) {
  const ExpansionResult t = student_t_expand(req, options);
  const ExpansionResult g = expand(req.rho, req.xmax, req.quad, options);
  return std::abs(t.i_infinity - g.i_infinity);
}

}  // namespace pcdf
