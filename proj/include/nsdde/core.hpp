#pragma once

// Shared value types and the library error taxonomy.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsdde {

using Vec = std::vector<double>;

// Dense row-major matrix, only as large as a diffusion coefficient needs to be.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

// Frobenius norm; the operator norm is never needed at this precision.
inline double frob(const Matrix& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

inline Vec matvec(const Matrix& m, const Vec& v) {
  Vec out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

enum class errc {
  invalid_parameter,
  invalid_radius,
  inadmissible_gauge,
  below_domain,
  unbounded_search,
  mode_mismatch,
  grid_mismatch,
  invalid_increment,
  invalid_intensity,
  numerical_blowup,
  unsupported_assumption,
  inapplicable,
  not_fittable,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_parameter: return "invalid-parameter";
    case errc::invalid_radius: return "invalid-radius";
    case errc::inadmissible_gauge: return "inadmissible-gauge";
    case errc::below_domain: return "below-domain";
    case errc::unbounded_search: return "unbounded-search";
    case errc::mode_mismatch: return "mode-mismatch";
    case errc::grid_mismatch: return "grid-mismatch";
    case errc::invalid_increment: return "invalid-increment";
    case errc::invalid_intensity: return "invalid-intensity";
    case errc::numerical_blowup: return "numerical-blowup";
    case errc::unsupported_assumption: return "unsupported-assumption";
    case errc::inapplicable: return "inapplicable";
    case errc::not_fittable: return "not-fittable";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc c, const std::string& msg) { throw Error(c, msg); }

inline void require(bool ok, errc c, const std::string& msg) {
  if (!ok) raise(c, msg);
}

}  // namespace nsdde
