#include "pcdf/gauss_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "pcdf/error.hpp"
#include "pcdf/quadrature.hpp"

namespace pcdf {

void QuadratureConfig::validate() const {
  if (nodes < 16) throw Error(ErrorKind::InvalidArgument, "zeta nodes must be >= 16");
  if (!(lambda_cut >= 6.0)) throw Error(ErrorKind::InvalidArgument, "zeta half-width must be >= 6");
  if (rule == ZetaRule::GaussLegendreComposite) {
    if (panels < 1 || nodes % panels != 0) {
      throw Error(ErrorKind::InvalidArgument, "zeta nodes must be a multiple of panels");
    }
  }
}

ZetaGrid make_zeta_grid(const QuadratureConfig& quad) {
  quad.validate();
  const QuadratureRule rule = quad.rule == ZetaRule::GaussLegendreComposite
                                  ? composite_gauss_legendre(quad.panels, quad.nodes / quad.panels,
                                                             -quad.lambda_cut, quad.lambda_cut)
                                  : trapezoid(quad.nodes, -quad.lambda_cut, quad.lambda_cut);
  ZetaGrid grid;
  grid.zeta = rule.nodes;
  grid.weight.resize(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) grid.weight[i] = rule.weights[i] * normal_pdf(rule.nodes[i]);
  return grid;
}

// ---------------------------------------------------------------------------
// Setup

ConvergenceMetrics compute_metrics(const CorrelationMatrix& rho, const OneFactorModel& model,
                                   const Eigen::MatrixXd& eps, const Eigen::VectorXd& xmax,
                                   double lambda_min_cutoff) {
  ConvergenceMetrics m;
  const int n = rho.n();
  if (n >= 3) {
    m.sigma2_rho_int = internal_variance(rho.entries());
    m.sigma2_eps_int = internal_variance(eps);
  }
  m.r_of_n = distance_from_singular(rho);
  m.lambda_min = rho.min_eigenvalue();
  m.regularization_suggested = m.lambda_min < lambda_min_cutoff;

  const double c_avg = model.c().mean();
  double x_sum = 0.0;
  int finite = 0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(xmax(i))) {
      x_sum += xmax(i);
      ++finite;
    }
  }
  const double x_avg = finite > 0 ? x_sum / finite : kXiFlush;
  double eps_abs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) eps_abs += std::abs(eps(i, j));
  const double eps_avg = eps_abs / (static_cast<double>(n) * (n - 1));

  const HeuristicEstimates h = heuristic_estimates(c_avg, x_avg, eps_avg, n);
  m.zeta_star = h.zeta_star;
  m.beta_star = h.beta_star;
  m.n_star = h.n_star;
  return m;
}

PerturbationSetup prepare_with_model(const CorrelationMatrix& rho, const OneFactorModel& model,
                                     const Eigen::VectorXd& xmax, const QuadratureConfig& quad) {
  const int n = rho.n();
  if (xmax.size() != n || model.n() != n) {
    std::ostringstream os;
    os << "matrix is " << n << "-dimensional, limits have " << xmax.size() << " entries, model has " << model.n();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  for (int i = 0; i < n; ++i) {
    if (std::isnan(xmax(i))) throw Error(ErrorKind::InvalidArgument, "upper limit " + std::to_string(i) + " is NaN");
  }
  quad.validate();

  Eigen::MatrixXd eps = rho.inverse() - model.rho_f_inv();
  eps = 0.5 * (eps + eps.transpose()).eval();

  const double log_det_rho = rho.eigenvalues().array().log().sum();
  const double log_det_f = std::log(model.sigma2()) + 2.0 * model.s().array().log().sum();
  const double j_norm = std::exp(0.5 * (log_det_f - log_det_rho));

  PerturbationSetup setup{rho, model, std::move(eps), j_norm, xmax, quad, {}, {}};
  setup.metrics = compute_metrics(setup.rho, setup.model, setup.eps, setup.xmax);
  setup.warnings = rho.warnings();
  for (const auto& w : model.warnings()) setup.warnings.push_back(w);
  return setup;
}

PerturbationSetup prepare(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, const QuadratureConfig& quad,
                          const FitOptions& fit) {
  return prepare_with_model(rho, fit_one_factor(rho, fit), xmax, quad);
}

// ---------------------------------------------------------------------------
// Per-node integrands

namespace {

// Π v_m over m outside {a, b, c, d} (duplicates allowed, -1 = unused).
double product_excluding(const Eigen::VectorXd& v, int a, int b = -1, int c = -1, int d = -1) noexcept {
  double p = 1.0;
  for (int m = 0; m < v.size(); ++m) {
    if (m == a || m == b || m == c || m == d) continue;
    p *= v(m);
  }
  return p;
}

}  // namespace

double node_order0(const FactorSlice& slice) noexcept { return slice.mass; }

double node_order1_naive(const FactorSlice& slice, const Eigen::MatrixXd& eps) {
  const int n = slice.n();
  const auto& v = slice.w[0];
  const auto& w1 = slice.w[1];
  const auto& w2 = slice.w[2];
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double g = (i == j) ? w2(i) : w1(i) * w1(j);
      sum += eps(i, j) * g * product_excluding(v, i, j);
    }
  }
  return sum;
}

double node_order1_factored(const FactorSlice& slice, const Eigen::MatrixXd& eps) {
  if (slice.mass == 0.0) return 0.0;
  const Eigen::VectorXd& m = slice.cond_mean;
  const double quad = m.dot(eps * m);
  const double trace = eps.diagonal().dot(slice.cond_m2);
  return slice.mass * (quad + trace);
}

int index_class(int i, int j, int k, int l) noexcept {
  const int idx[4] = {i, j, k, l};
  int distinct = 0;
  int mult_max = 0;
  for (int a = 0; a < 4; ++a) {
    bool seen = false;
    for (int b = 0; b < a; ++b) seen = seen || idx[a] == idx[b];
    if (!seen) ++distinct;
    int mult = 0;
    for (int b = 0; b < 4; ++b) mult += idx[a] == idx[b];
    mult_max = std::max(mult_max, mult);
  }
  switch (distinct) {
    case 4: return 1;
    case 3: return (i == j || k == l) ? 2 : 3;
    case 2:
      if (mult_max == 3) return 6;
      return (i == j) ? 4 : 5;
    default: return 7;
  }
}

double node_order2_naive(const FactorSlice& slice, const Eigen::MatrixXd& eps) {
  const int n = slice.n();
  const auto& v = slice.w[0];
  const auto& w1 = slice.w[1];
  const auto& w2 = slice.w[2];
  const auto& w3 = slice.w[3];
  const auto& w4 = slice.w[4];
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double e = eps(i, j) * eps(k, l);
          double g = 0.0;
          switch (index_class(i, j, k, l)) {
            case 1:  // no two indices equal
              g = w1(i) * w1(j) * w1(k) * w1(l) * product_excluding(v, i, j, k, l);
              break;
            case 2:    // one pair equal inside one ε
            case 3: {  // one pair equal across the two ε
              int rep, a, b;
              if (i == j) rep = i, a = k, b = l;
              else if (k == l) rep = k, a = i, b = j;
              else if (i == k) rep = i, a = j, b = l;
              else if (i == l) rep = i, a = j, b = k;
              else if (j == k) rep = j, a = i, b = l;
              else rep = j, a = i, b = k;
              g = w2(rep) * w1(a) * w1(b) * product_excluding(v, rep, a, b);
              break;
            }
            case 4:  // ε_ii ε_kk
              g = w2(i) * w2(k) * product_excluding(v, i, k);
              break;
            case 5:  // ε_ij ε_ij or ε_ij ε_ji
              g = w2(i) * w2(j) * product_excluding(v, i, j);
              break;
            case 6: {  // three equal
              const int rep = (i == j) ? i : k;
              const int odd = (i + j + k + l) - 3 * rep;
              g = w3(rep) * w1(odd) * product_excluding(v, rep, odd);
              break;
            }
            default:  // all equal
              g = w4(i) * product_excluding(v, i);
          }
          sum += e * g;
        }
  return sum;
}

double node_order2_factored(const FactorSlice& slice, const Eigen::MatrixXd& eps) {
  if (slice.mass == 0.0) return 0.0;
  // With x = m + z, z independent and centred:
  //   Q = a + L + R,  a = mᵀεm,  L = 2(εm)ᵀz,  R = zᵀεz
  //   E[Q²] = a² + E[L²] + E[R²] + 2a·E[R] + 2E[LR]
  const Eigen::VectorXd& m = slice.cond_mean;
  const Eigen::VectorXd& k2 = slice.cond_m2;
  const Eigen::VectorXd& k3 = slice.cond_m3;
  const Eigen::VectorXd& k4 = slice.cond_m4;
  const Eigen::VectorXd g = eps * m;
  const Eigen::VectorXd d = eps.diagonal();

  const double a = m.dot(g);
  const double er = d.dot(k2);
  const double el2 = 4.0 * g.cwiseProduct(g).dot(k2);
  const double elr = 2.0 * g.cwiseProduct(d).dot(k3);
  const Eigen::VectorXd d2 = d.cwiseProduct(d);
  const double cross = k2.dot(eps.cwiseProduct(eps) * k2);
  const double er2 = er * er + 2.0 * cross - 3.0 * d2.dot(k2.cwiseProduct(k2)) + d2.dot(k4);
  return slice.mass * (a * a + el2 + er2 + 2.0 * a * er + 2.0 * elr);
}

std::array<long long, 7> class_counts(int n) noexcept {
  const long long N = n;
  return {N * (N - 1) * (N - 2) * (N - 3), 2 * N * (N - 1) * (N - 2), 4 * N * (N - 1) * (N - 2),
          N * (N - 1),                     2 * N * (N - 1),           4 * N * (N - 1),
          N};
}

std::array<long long, 7> enumerate_class_counts(int n) {
  std::array<long long, 7> counts{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) ++counts[index_class(i, j, k, l) - 1];
  long long total = 0;
  for (long long c : counts) total += c;
  const long long expected = static_cast<long long>(n) * n * n * n;
  if (total != expected) {
    throw Error(ErrorKind::ClassCountMismatch,
                "class counts sum to " + std::to_string(total) + ", expected " + std::to_string(expected));
  }
  return counts;
}

// ---------------------------------------------------------------------------
// ζ integration

namespace {

int resolve_threads(int requested, std::size_t work) {
  int t = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min<int>(t, static_cast<int>(work)));
}

// Unscaled ζ-sums (without J and the -1/2, 1/8 prefactors), one triple per ε.
std::vector<OrderTerms> integrate_raw(const OneFactorModel& model, const Eigen::VectorXd& xmax,
                                      const std::vector<const Eigen::MatrixXd*>& eps_list,
                                      const QuadratureConfig& quad, const EngineOptions& options) {
  const ZetaGrid grid = make_zeta_grid(quad);
  const std::size_t nodes = grid.zeta.size();
  const std::size_t cases = eps_list.size();
  std::vector<std::vector<double>> f0(cases, std::vector<double>(nodes, 0.0));
  std::vector<std::vector<double>> f1 = f0, f2 = f0;

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      const FactorSlice slice = build_factor_slice(grid.zeta[q], model, xmax);
      const double wq = grid.weight[q];
      for (std::size_t c = 0; c < cases; ++c) {
        const Eigen::MatrixXd& eps = *eps_list[c];
        f0[c][q] = wq * node_order0(slice);
        if (options.max_order >= 1) f1[c][q] = wq * node_order1_factored(slice, eps);
        if (options.max_order >= 2) {
          f2[c][q] = wq * (options.naive_second_order ? node_order2_naive(slice, eps)
                                                      : node_order2_factored(slice, eps));
        }
      }
    }
  };

  const int threads = resolve_threads(options.threads, nodes);
  if (threads == 1) {
    work(0, nodes);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (nodes + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk, end = std::min(nodes, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  std::vector<OrderTerms> out(cases);
  for (std::size_t c = 0; c < cases; ++c) {
    out[c].i0 = pairwise_sum(f0[c]);
    out[c].i1 = pairwise_sum(f1[c]);
    out[c].i2 = pairwise_sum(f2[c]);
  }
  return out;
}

OrderTerms scale_terms(const OrderTerms& raw, double j_norm) {
  return {j_norm * raw.i0, -0.5 * j_norm * raw.i1, 0.125 * j_norm * raw.i2};
}

void check_max_order(const EngineOptions& options) {
  if (options.max_order < 0 || options.max_order > 2) {
    throw Error(ErrorKind::InvalidArgument, "order must be 0, 1 or 2");
  }
}

QuadratureConfig doubled(QuadratureConfig quad) {
  quad.nodes *= 2;
  return quad;
}

std::string resolution_warning(const ExpansionResult& coarse, const ExpansionResult& fine) {
  const double shift = std::max({std::abs(coarse.partial0 - fine.partial0), std::abs(coarse.partial1 - fine.partial1),
                                 std::abs(coarse.partial2 - fine.partial2)});
  if (!(shift > kResolutionTolerance)) return {};
  std::ostringstream os;
  os.precision(3);
  os << "QuadratureUnderResolved: doubling zeta nodes moves a partial sum by " << shift;
  return os.str();
}

}  // namespace

OrderTerms integrate_orders(const PerturbationSetup& setup, const QuadratureConfig& quad,
                            const EngineOptions& options) {
  check_max_order(options);
  const auto raw = integrate_raw(setup.model, setup.xmax, {&setup.eps}, quad, options);
  return scale_terms(raw.front(), setup.j_norm);
}

OrderTerms integrate_orders(const PerturbationSetup& setup, const EngineOptions& options) {
  return integrate_orders(setup, setup.quad, options);
}

double order0(const PerturbationSetup& setup, const EngineOptions& options) {
  EngineOptions o = options;
  o.max_order = 0;
  return integrate_orders(setup, o).i0;
}

double order1(const PerturbationSetup& setup, const EngineOptions& options) {
  EngineOptions o = options;
  o.max_order = 1;
  return integrate_orders(setup, o).i1;
}

double order2(const PerturbationSetup& setup, const EngineOptions& options) {
  EngineOptions o = options;
  o.max_order = 2;
  return integrate_orders(setup, o).i2;
}

ExpansionResult assemble_result(const OrderTerms& terms, const EngineOptions& options) {
  ExpansionResult r;
  r.i0 = terms.i0;
  r.i1 = options.max_order >= 1 ? terms.i1 : 0.0;
  r.i2 = options.max_order >= 2 ? terms.i2 : 0.0;
  r.partial0 = r.i0;
  r.partial1 = r.partial0 + r.i1;
  r.partial2 = r.partial1 + r.i2;

  const PadeSummary pade = summarize_pade({r.i0, r.i1, r.i2}, options.pade_policy, options.oscillating);
  r.pade1 = pade.pade1;
  r.pade2_11 = pade.pade2_11;
  r.pade2_02 = pade.pade2_02;
  r.pade2 = pade.pade2;
  r.i_infinity = pade.extrapolation.i_infinity;
  r.alpha = pade.extrapolation.alpha;
  r.oscillating = pade.extrapolation.oscillating;
  r.warnings = pade.warnings;
  return r;
}

std::optional<std::string> check_zeta_resolution(const PerturbationSetup& setup, const ExpansionResult& coarse,
                                                 const EngineOptions& options) {
  const ExpansionResult fine = assemble_result(integrate_orders(setup, doubled(setup.quad), options), options);
  std::string w = resolution_warning(coarse, fine);
  if (w.empty()) return std::nullopt;
  return w;
}

ExpansionResult expand(const PerturbationSetup& setup, const EngineOptions& options) {
  const OrderTerms terms = integrate_orders(setup, options);
  ExpansionResult r = assemble_result(terms, options);
  r.j_norm = setup.j_norm;
  r.metrics = setup.metrics;
  r.node_count = static_cast<int>(make_zeta_grid(setup.quad).zeta.size());

  std::vector<std::string> warnings = setup.warnings;
  if (options.check_resolution) {
    if (auto w = check_zeta_resolution(setup, r, options)) warnings.push_back(std::move(*w));
  }
  warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
  r.warnings = std::move(warnings);
  return r;
}

ExpansionResult expand(const CorrelationMatrix& rho, const Eigen::VectorXd& xmax, const QuadratureConfig& quad,
                       const EngineOptions& options) {
  return expand(prepare(rho, xmax, quad), options);
}

SensitivityResult correlation_sensitivity(const CorrelationMatrix& rho1, const CorrelationMatrix& rho2,
                                          const OneFactorModel& shared_model, const Eigen::VectorXd& xmax,
                                          const QuadratureConfig& quad, const EngineOptions& options) {
  check_max_order(options);
  if (rho1.n() != rho2.n()) {
    throw Error(ErrorKind::DimensionMismatch, "matrices have dimensions " + std::to_string(rho1.n()) + " and " +
                                                  std::to_string(rho2.n()));
  }
  const PerturbationSetup s1 = prepare_with_model(rho1, shared_model, xmax, quad);
  const PerturbationSetup s2 = prepare_with_model(rho2, shared_model, xmax, quad);

  auto evaluate = [&](const QuadratureConfig& q) {
    const auto raw = integrate_raw(shared_model, xmax, {&s1.eps, &s2.eps}, q, options);
    return std::pair{assemble_result(scale_terms(raw[0], s1.j_norm), options),
                     assemble_result(scale_terms(raw[1], s2.j_norm), options)};
  };

  auto [first, second] = evaluate(quad);
  SensitivityResult out;
  for (auto* pair : {&std::as_const(first), &std::as_const(second)}) {
    out.warnings.insert(out.warnings.end(), pair->warnings.begin(), pair->warnings.end());
  }
  if (options.check_resolution) {
    auto [f1, f2] = evaluate(doubled(quad));
    for (const auto& w : {resolution_warning(first, f1), resolution_warning(second, f2)}) {
      if (!w.empty()) out.warnings.push_back(w);
    }
  }
  const int nodes = static_cast<int>(make_zeta_grid(quad).zeta.size());
  first.j_norm = s1.j_norm;
  first.metrics = s1.metrics;
  first.node_count = nodes;
  second.j_norm = s2.j_norm;
  second.metrics = s2.metrics;
  second.node_count = nodes;

  out.d_i0 = second.i0 - first.i0;
  out.d_i1 = second.i1 - first.i1;
  out.d_i2 = second.i2 - first.i2;
  out.d_partial0 = second.partial0 - first.partial0;
  out.d_partial1 = second.partial1 - first.partial1;
  out.d_partial2 = second.partial2 - first.partial2;
  out.d_i_infinity = second.i_infinity - first.i_infinity;
  for (const auto& w : s1.warnings) out.warnings.push_back(w);
  for (const auto& w : s2.warnings) out.warnings.push_back(w);
  out.first = std::move(first);
  out.second = std::move(second);
  return out;
}

SensitivityResult correlation_sensitivity(const CorrelationMatrix& rho1, const CorrelationMatrix& rho2,
                                          const Eigen::VectorXd& xmax, const QuadratureConfig& quad,
                                          const EngineOptions& options) {
  return correlation_sensitivity(rho1, rho2, fit_one_factor(rho1), xmax, quad, options);
}

}  // namespace pcdf
