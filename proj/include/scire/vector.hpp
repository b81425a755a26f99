#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace scire {

using Vector = std::vector<double>;
using VectorView = std::span<const double>;

namespace vec {

inline void check_same_size(VectorView a, VectorView b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector dimension mismatch");
}

/// a * x + b * y
inline Vector axpby(double a, VectorView x, double b, VectorView y) {
  check_same_size(x, y);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

inline Vector scaled(double a, VectorView x) {
  Vector out(x.begin(), x.end());
  for (auto& v : out) v *= a;
  return out;
}

inline Vector sub(VectorView x, VectorView y) { return axpby(1.0, x, -1.0, y); }

/// x += a * y
inline void add_scaled(Vector& x, double a, VectorView y) {
  check_same_size(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * y[i];
}

inline double max_abs(VectorView x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double norm2(VectorView x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline bool all_finite(VectorView x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// Max-norm distance relative to max(|reference|_inf, 1).
inline double relative_max_error(VectorView value, VectorView reference) {
  check_same_size(value, reference);
  double d = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) d = std::max(d, std::abs(value[i] - reference[i]));
  return d / std::max(max_abs(reference), 1.0);
}

}  // namespace vec
}  // namespace scire
