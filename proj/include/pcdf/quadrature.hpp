#pragma once

#include <span>
#include <vector>

namespace pcdf {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss–Legendre on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// Gauss–Legendre mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// `panels` equal panels on [a, b], `nodes_per_panel` Gauss–Legendre nodes each.
QuadratureRule composite_gauss_legendre(int panels, int nodes_per_panel, double a, double b);

/// Composite trapezoid with `nodes` equally spaced points including both ends.
QuadratureRule trapezoid(int nodes, double a, double b);

/// Pairwise (cascade) summation in index order. Result depends only on the
/// input order, never on how the values were produced.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace pcdf
