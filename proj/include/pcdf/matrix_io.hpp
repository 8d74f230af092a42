#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include <json.hpp>

#include "pcdf/one_factor.hpp"

namespace pcdf::io {

/// Plain CSV rows or JSON {"rho": [[...]]}; format chosen by content.
Eigen::MatrixXd parse_matrix(const std::string& text);
Eigen::MatrixXd read_matrix_file(const std::string& path);

/// 17 significant digits, so parse(write(m)) == m bit for bit.
std::string write_matrix_csv(const Eigen::MatrixXd& m);
std::string write_matrix_json(const Eigen::MatrixXd& m);

/// "0,1.5,inf,-inf" → vector. Tokens "inf", "+inf", "-inf" are accepted.
Eigen::VectorXd parse_limits(const std::string& text);

std::string format_double(double x);

/// FNV-1a 64 over the 17-digit CSV rendering.
std::uint64_t matrix_hash(const Eigen::MatrixXd& m);

/// c, s, sigma2, det_rho_f; ρ_f and its inverse are rebuilt on load.
nlohmann::json model_to_json(const OneFactorModel& model);
OneFactorModel model_from_json(const nlohmann::json& j);

}  // namespace pcdf::io
