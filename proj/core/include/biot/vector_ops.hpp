#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "biot/errors.hpp"

namespace biot {

using Vector = std::vector<double>;

inline double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw ShapeError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double nrm2(const Vector& x) { return std::sqrt(dot(x, x)); }

/// y += a*x
inline void axpy(double a, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw ShapeError("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scal(double a, Vector& x) {
  for (double& v : x) v *= a;
}

inline void fill(Vector& x, double a) {
  for (double& v : x) v = a;
}

}  // namespace biot
