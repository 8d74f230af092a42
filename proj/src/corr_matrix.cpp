#include "pcdf/corr_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcdf/error.hpp"
#include "pcdf/special_fns.hpp"

namespace pcdf {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(const Eigen::MatrixXd& entries) {
  if (entries.rows() != entries.cols()) {
    throw Error(ErrorKind::InvalidArgument, "matrix is " + std::to_string(entries.rows()) + "x" +
                                                std::to_string(entries.cols()) + ", expected square");
  }
  const Eigen::Index n = entries.rows();
  if (n < 2) {
    throw Error(ErrorKind::DimensionTooSmall, "dimension " + std::to_string(n) + " < 2");
  }
  if (!entries.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
  }

  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kMaxAsymmetry) {
    throw Error(ErrorKind::NotSymmetric, "max |m_ij - m_ji| = " + fmt(asym));
  }
  entries_ = 0.5 * (entries + entries.transpose());
  if (asym > kWarnAsymmetry) {
    warnings_.push_back("matrix symmetrized, max asymmetry " + fmt(asym));
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(entries_(i, i) - 1.0) > kDiagonalTolerance) {
      throw Error(ErrorKind::NotUnitDiagonal,
                  "diagonal entry " + std::to_string(i) + " = " + fmt(entries_(i, i)));
    }
    entries_(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && !(std::abs(entries_(i, j)) < 1.0)) {
        throw Error(ErrorKind::OffDiagonalOutOfRange, "|m(" + std::to_string(i) + "," + std::to_string(j) +
                                                          ")| = " + fmt(entries_(i, j)) + " >= 1");
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "eigendecomposition failed");
  }
  // Eigen returns ascending order.
  eigenvalues_ = solver.eigenvalues().reverse();
  eigenvectors_ = solver.eigenvectors().rowwise().reverse();
  if (!(min_eigenvalue() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "min eigenvalue " + fmt(min_eigenvalue()));
  }

  const Eigen::VectorXd inv_lambda = eigenvalues_.cwiseInverse();
  inverse_ = eigenvectors_ * inv_lambda.asDiagonal() * eigenvectors_.transpose();
  inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
  determinant_ = eigenvalues_.prod();

  // Tiny positive eigenvalues can still leave the inverse too inaccurate to use.
  const double resid =
      (entries_ * inverse_ - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (resid > 1e-8) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "numerically singular: min eigenvalue " + fmt(min_eigenvalue()) + ", inverse residual " + fmt(resid));
  }
}

CorrelationMatrix build_correlation_matrix(const Eigen::MatrixXd& entries) { return CorrelationMatrix(entries); }

Eigen::MatrixXd clip_spectrum(const CorrelationMatrix& m, double cutoff) {
  const Eigen::VectorXd raised = m.eigenvalues().cwiseMax(cutoff);
  Eigen::MatrixXd out = m.eigenvectors() * raised.asDiagonal() * m.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

CorrelationMatrix regularize(const CorrelationMatrix& m, double cutoff) {
  if (!(cutoff > 0.0) || !(cutoff < 1.0)) {
    throw Error(ErrorKind::CutoffTooLarge, "cutoff " + fmt(cutoff) + " outside (0, 1)");
  }
  // Relative slack so the fixed point (and a second call on it) is stable.
  const double accept = cutoff * (1.0 - 1e-10);
  if (m.min_eigenvalue() >= accept) return m;

  CorrelationMatrix current = m;
  for (int pass = 0; pass < 100 && current.min_eigenvalue() < accept; ++pass) {
    Eigen::MatrixXd raised = clip_spectrum(current, cutoff);
    const Eigen::VectorXd scale = raised.diagonal().cwiseSqrt().cwiseInverse();
    raised = scale.asDiagonal() * raised * scale.asDiagonal();
    raised.diagonal().setOnes();
    try {
      current = CorrelationMatrix(raised);
    } catch (const Error& e) {
      throw Error(ErrorKind::CutoffTooLarge, std::string("regularized matrix invalid: ") + e.what());
    }
  }
  if (current.min_eigenvalue() < accept) {
    throw Error(ErrorKind::CutoffTooLarge, "regularization did not reach cutoff " + fmt(cutoff));
  }
  return current;
}

double internal_variance(const Eigen::MatrixXd& symmetric) {
  const Eigen::Index n = symmetric.rows();
  if (n < 3) {
    throw Error(ErrorKind::DimensionTooSmall, "internal variance needs n >= 3, got " + std::to_string(n));
  }
  // Shifted by the first entry so constant inputs give exactly zero.
  const double count = 0.5 * static_cast<double>(n * (n - 1));
  const double shift = symmetric(0, 1);
  double sum = 0.0, ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = symmetric(i, j) - shift;
      sum += d;
      ss += d * d;
    }
  return std::max(0.0, (ss - sum * sum / count) / (count - 1.0));
}

double distance_from_singular(const CorrelationMatrix& m) {
  return 1.0 / m.eigenvalues().cwiseInverse().sum();
}

double solve_zeta_star(double c_avg, double x_avg_max, int n) {
  if (!(std::abs(c_avg) < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "|c_avg| must be < 1");
  }
  if (c_avg == 0.0) return 0.0;
  const double s_avg = std::sqrt(1.0 - c_avg * c_avg);
  const double k = n * c_avg / s_avg;
  auto f = [&](double z) { return z + k * inverse_mills((x_avg_max - c_avg * z) / s_avg); };

  double lo = -20.0, hi = 20.0;
  double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw Error(ErrorKind::RootNotBracketed, "no sign change of the bump equation on [-20, 20]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

HeuristicEstimates heuristic_estimates(double c_avg, double x_avg_max, double eps_avg, int n, int order) {
  HeuristicEstimates out;
  out.beta_star = 0.5 * static_cast<double>(n) * n * eps_avg;
  try {
    out.zeta_star = solve_zeta_star(c_avg, x_avg_max, n);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RootNotBracketed) throw;
    out.warnings.emplace_back(e.what());
    return out;
  }
  const double s_avg = std::sqrt(1.0 - c_avg * c_avg);
  const double n_avg = normal_cdf((x_avg_max - c_avg * *out.zeta_star) / s_avg);
  const double log_inv = -std::log(n_avg);
  if (log_inv > 0.0 && std::isfinite(log_inv)) out.n_star = 2.0 * order / log_inv;
  return out;
}

}  // namespace pcdf
