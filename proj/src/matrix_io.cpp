#include "pcdf/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "pcdf/error.hpp"

namespace pcdf::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

double parse_number(const std::string& token) {
  const std::string t = lower(trim(token));
  if (t == "inf" || t == "+inf" || t == "infinity" || t == "+infinity") return std::numeric_limits<double>::infinity();
  if (t == "-inf" || t == "-infinity") return -std::numeric_limits<double>::infinity();
  if (t.empty()) throw Error(ErrorKind::ParseError, "empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || std::isnan(v)) throw Error(ErrorKind::ParseError, "bad number '" + token + "'");
  return v;
}

Eigen::MatrixXd from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorKind::ParseError, "matrix has no rows");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                             " entries, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd parse_json_matrix(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::ParseError, std::string("JSON: ") + ex.what());
  }
  if (j.is_object()) {
    if (!j.contains("rho")) throw Error(ErrorKind::ParseError, "JSON object lacks a \"rho\" field");
    j = j["rho"];
  }
  if (!j.is_array()) throw Error(ErrorKind::ParseError, "JSON matrix must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error(ErrorKind::ParseError, "JSON matrix row is not an array");
    std::vector<double> r;
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorKind::ParseError, "JSON matrix entry is not a number");
      r.push_back(x.get<double>());
    }
    rows.push_back(std::move(r));
  }
  return from_rows(rows);
}

Eigen::MatrixXd parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ';', ',');
    std::vector<double> r;
    std::string token;
    if (line.find(',') != std::string::npos) {
      std::istringstream fields(line);
      while (std::getline(fields, token, ',')) r.push_back(parse_number(token));
    } else {
      std::istringstream fields(line);
      while (fields >> token) r.push_back(parse_number(token));
    }
    rows.push_back(std::move(r));
  }
  return from_rows(rows);
}

}  // namespace

Eigen::MatrixXd parse_matrix(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw Error(ErrorKind::ParseError, "empty matrix input");
  if (t[0] == '{' || t[0] == '[') return parse_json_matrix(t);
  return parse_csv_matrix(t);
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix(buf.str());
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string write_matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string write_matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"rho", rows}}.dump();
}

Eigen::VectorXd parse_limits(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) values.push_back(parse_number(token));
  if (values.empty()) throw Error(ErrorKind::ParseError, "no limits given");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::uint64_t matrix_hash(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : write_matrix_csv(m)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json model_to_json(const OneFactorModel& model) {
  std::vector<double> c(model.c().data(), model.c().data() + model.n());
  std::vector<double> s(model.s().data(), model.s().data() + model.n());
  return {{"c", c}, {"s", s}, {"sigma2", model.sigma2()}, {"det_rho_f", model.det_rho_f()}};
}

OneFactorModel model_from_json(const nlohmann::json& j) {
  try {
    const auto c = j.at("c").get<std::vector<double>>();
    return OneFactorModel(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::ParseError, std::string("model record: ") + ex.what());
  }
}

}  // namespace pcdf::io
