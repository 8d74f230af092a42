#pragma once

#include <Eigen/Dense>

#include <random>

#include "pcdf/corr_matrix.hpp"

namespace testutil {

inline Eigen::MatrixXd equicorrelated(int n, double r) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, r);
  m.diagonal().setOnes();
  return m;
}

inline Eigen::MatrixXd from_loadings(const Eigen::VectorXd& c) {
  Eigen::MatrixXd m = c * c.transpose();
  m.diagonal().setOnes();
  return m;
}

inline Eigen::VectorXd random_loadings(int n, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c(i) = u(rng);
  return c;
}

/// Equicorrelated base plus a symmetric uniform bump; regenerates until
/// positive definite with λ_min >= lmin.
inline Eigen::MatrixXd random_correlation(int n, double base_hi, double bump, double lmin, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ub(0.0, base_hi), ud(-bump, bump);
  for (;;) {
    Eigen::MatrixXd m = equicorrelated(n, ub(rng));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        m(i, j) += ud(rng);
        m(j, i) = m(i, j);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) >= lmin && m.cwiseAbs().maxCoeff() <= 1.0) return m;
  }
}

inline Eigen::VectorXd uniform_vector(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

}  // namespace testutil
