#pragma once

#include <optional>

#include "pcdf/gauss_engine.hpp"

namespace pcdf {

/// Grid for the outer radial integral ∫₀^∞ y^{ν-1} e^{-y²/2} (...) dy.
struct YQuadrature {
  std::optional<double> y_max;  // default √ν + 12
  int y_nodes = 128;
  int panels = 8;
};

struct StudentTRequest {
  CorrelationMatrix rho;
  Eigen::VectorXd xmax;
  double nu = 4.0;
  QuadratureConfig quad;
  YQuadrature y_quad;
};

/// Nodes and normalized weights of the radial measure
///   2^{1-ν/2}/Γ(ν/2) · y^{ν-1} e^{-y²/2} dy.
/// The window is [max(0, √ν - 12), y_max]; when it starts at zero the first
/// panel is mapped through y = h·u^m so the y^{ν-1} endpoint behaviour is
/// smooth in u.
struct RadialGrid {
  std::vector<double> y;
  std::vector<double> weight;
};
RadialGrid make_radial_grid(double nu, const YQuadrature& yq);

/// Σ weights of the radial grid; 1 up to truncation and rule error.
double radial_weight_normalization(double nu, const YQuadrature& yq);

/// Student-t orthant-type integral: the Gaussian expansion at limits
/// y·x_max/√ν, integrated order by order over y, then Padé on the
/// integrated terms.
ExpansionResult student_t_expand(const StudentTRequest& req, const EngineOptions& options = {});

/// |Student-t - Gaussian| for the same ρ and limits; meant for large ν.
double gaussian_limit_check(const StudentTRequest& req, const EngineOptions& options = {});

}  // namespace pcdf
