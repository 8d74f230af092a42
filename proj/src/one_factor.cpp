#include "pcdf/one_factor.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "pcdf/error.hpp"

namespace pcdf {

OneFactorModel::OneFactorModel(Eigen::VectorXd loadings) : c_(std::move(loadings)) {
  const int n = static_cast<int>(c_.size());
  if (n < 1) throw Error(ErrorKind::DimensionTooSmall, "empty loading vector");
  s_.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!(std::abs(c_(i)) < 1.0)) {
      std::ostringstream os;
      os << "loading " << i << " = " << c_(i) << ", need |c| < 1";
      throw Error(ErrorKind::LoadingOutOfRange, os.str());
    }
    s_(i) = std::sqrt((1.0 - c_(i)) * (1.0 + c_(i)));
  }
  const Eigen::VectorXd s2 = s_.cwiseProduct(s_);
  const Eigen::VectorXd u = c_.cwiseQuotient(s2);  // c_i / s_i²
  sigma2_ = 1.0 + c_.cwiseProduct(u).sum();

  rho_f_ = c_ * c_.transpose();
  rho_f_.diagonal().setOnes();

  rho_f_inv_ = analytic_inverse(*this);
  det_ = sigma2_ * s2.prod();
}

Eigen::MatrixXd analytic_inverse(const OneFactorModel& model) {
  const Eigen::VectorXd s2 = model.s().cwiseProduct(model.s());
  const Eigen::VectorXd u = model.c().cwiseQuotient(s2);
  Eigen::MatrixXd inv = -(u * u.transpose()) / model.sigma2();
  inv.diagonal() += s2.cwiseInverse();
  return inv;
}

namespace {

double clip_loading(double c, int index, const FitOptions& options, std::vector<std::string>& warnings) {
  if (std::abs(c) < 1.0) return c;
  std::ostringstream os;
  os << "loading " << index << " = " << c << " has |c| >= 1";
  if (!options.clip) throw Error(ErrorKind::LoadingOutOfRange, os.str());
  const double clipped = std::copysign(options.clip_to, c);
  os << "; clipped to " << clipped;
  warnings.push_back(os.str());
  return clipped;
}

OneFactorModel finish(Eigen::VectorXd c, const FitOptions& options, std::vector<std::string> warnings) {
  OneFactorModel model(std::move(c));
  for (auto& w : warnings) model.add_warning(std::move(w));
  // s_i > 0 already makes diag + rank-one positive definite; check it anyway.
  if (options.explicit_pd_check) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.rho_f(), Eigen::EigenvaluesOnly);
    const double lmin = solver.eigenvalues()(0);
    if (!(lmin > 0.0)) {
      std::ostringstream os;
      os << "one-factor matrix has min eigenvalue " << lmin;
      throw Error(ErrorKind::RhoFNotPositiveDefinite, os.str());
    }
  }
  return model;
}

// Loadings reproducing ρ exactly when its off-diagonal part is rank one.
// c_i² = ρ_ij ρ_ik / ρ_jk with j, k the two partners of largest |ρ_ij|; the
// largest loading takes the sign of its row sum, the rest follow ρ_ia.
std::optional<Eigen::VectorXd> exact_loadings(const CorrelationMatrix& m) {
  const int n = m.n();
  const Eigen::MatrixXd& r = m.entries();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (n == 2) {
    c.setConstant(std::sqrt(std::abs(r(0, 1))));
  } else {
    for (int i = 0; i < n; ++i) {
      int j = -1, k = -1;
      for (int l = 0; l < n; ++l) {
        if (l == i) continue;
        if (j < 0 || std::abs(r(i, l)) > std::abs(r(i, j))) {
          k = j;
          j = l;
        } else if (k < 0 || std::abs(r(i, l)) > std::abs(r(i, k))) {
          k = l;
        }
      }
      if (r(j, k) != 0.0) c(i) = std::sqrt(std::abs(r(i, j) * r(i, k) / r(j, k)));
    }
  }
  int a = 0;
  for (int i = 1; i < n; ++i)
    if (c(i) > c(a)) a = i;
  if (!(c(a) < 1.0)) return std::nullopt;
  if (r.row(a).sum() - 1.0 < 0.0) c(a) = -c(a);
  for (int i = 0; i < n; ++i)
    if (i != a && r(i, a) * c(a) < 0.0) c(i) = -c(i);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!(std::abs(r(i, j) - c(i) * c(j)) <= kExactFitTolerance)) return std::nullopt;
  return c;
}

}  // namespace

OneFactorModel fit_one_factor(const CorrelationMatrix& m, const FitOptions& options) {
  const int n = m.n();
  if (options.exact_rank_one) {
    if (auto c = exact_loadings(m)) return finish(std::move(*c), options, {});
  }
  std::vector<std::string> warnings;
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    const double row = m.entries().row(i).sum() - 1.0;
    const double sgn = row > 0.0 ? 1.0 : (row < 0.0 ? -1.0 : 0.0);
    c(i) = clip_loading(sgn * std::sqrt(std::abs(row) / (n - 1)), i, options, warnings);
  }
  return finish(std::move(c), options, std::move(warnings));
}

OneFactorModel fit_constant_factor(const CorrelationMatrix& m, const FitOptions& options) {
  const int n = m.n();
  const double off = m.entries().sum() - n;
  std::vector<std::string> warnings;
  const double c = clip_loading(std::sqrt(std::abs(off) / (static_cast<double>(n) * (n - 1))), 0, options, warnings);
  return finish(Eigen::VectorXd::Constant(n, c), options, std::move(warnings));
}

Eigen::MatrixXd fit_pc_k_factor(const CorrelationMatrix& m, int k) {
  const int n = m.n();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::InvalidArgument, "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const Eigen::MatrixXd psi = m.eigenvectors().leftCols(k);
  const Eigen::VectorXd lambda = m.eigenvalues().head(k);
  Eigen::MatrixXd partial = psi * lambda.asDiagonal() * psi.transpose();
  Eigen::VectorXd gamma(n);
  for (int i = 0; i < n; ++i) {
    const double d = partial(i, i);
    if (!(d > 1e-300)) {
      throw Error(ErrorKind::ZeroDiagonalWeight, "row " + std::to_string(i) + " has no weight in the first " +
                                                     std::to_string(k) + " components");
    }
    gamma(i) = 1.0 / std::sqrt(d);
  }
  Eigen::MatrixXd out = gamma.asDiagonal() * partial * gamma.asDiagonal();
  out = 0.5 * (out + out.transpose()).eval();
  out.diagonal().setOnes();
  return out;
}

}  // namespace pcdf
