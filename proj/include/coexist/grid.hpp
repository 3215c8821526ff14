#ifndef COEXIST_GRID_HPP
#define COEXIST_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "coexist/errors.hpp"

namespace coexist {

// A T-periodic scalar function sampled on the uniform grid
// t_i = i*T/n, i = 0..n-1 (the node t=T is identified with t=0).
struct GridFunction {
  double period = 0.0;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(double T, std::vector<double> v) : period(T), values(std::move(v)) {
    if (period <= 0.0) throw InputError("grid function: period must be positive");
    if (values.empty()) throw InputError("grid function: empty sample vector");
  }

  static GridFunction constant(double T, std::size_t n, double value) {
    return GridFunction(T, std::vector<double>(n, value));
  }

  static GridFunction sample(double T, std::size_t n, const std::function<double(double)>& f) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(T * double(i) / double(n));
    return GridFunction(T, std::move(v));
  }

  std::size_t size() const { return values.size(); }
  double node(std::size_t i) const { return period * double(i) / double(values.size()); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  // Periodic linear interpolation between samples.
  double interpolate(double t) const {
    const std::size_t n = values.size();
    double u = std::fmod(t, period);
    if (u < 0.0) u += period;
    const double pos = u * double(n) / period;
    std::size_t i = std::size_t(pos);
    if (i >= n) i = 0;  // fmod rounding at the seam
    const double frac = pos - double(i);
    const std::size_t j = (i + 1 == n) ? 0 : i + 1;
    return values[i] + frac * (values[j] - values[i]);
  }
};

inline double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::fabs(v));
  return m;
}

inline double min_value(const GridFunction& f) {
  return *std::min_element(f.values.begin(), f.values.end());
}

inline double max_value(const GridFunction& f) {
  return *std::max_element(f.values.begin(), f.values.end());
}

// Component pair (x, y) of a coupled system; the product norm is the
// maximum of the component sup norms.
using GridPair = std::array<GridFunction, 2>;

inline double pair_norm(const GridPair& p) {
  return std::max(sup_norm(p[0]), sup_norm(p[1]));
}

inline GridPair pair_constant(double T, std::size_t n, double a, double b) {
  return {GridFunction::constant(T, n, a), GridFunction::constant(T, n, b)};
}

}  // namespace coexist

#endif
