#ifndef COEXIST_CONE_HPP
#define COEXIST_CONE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <memory>

#include "coexist/errors.hpp"
#include "coexist/grid.hpp"

namespace coexist {

// Membership in the cone K_c = { u >= 0 : min u >= c * sup u }.
inline bool in_cone(const GridFunction& u, double c, double tol = 1e-9) {
  const double mn = min_value(u);
  const double nx = sup_norm(u);
  const double slack = tol * std::max(1.0, nx);
  if (mn < -slack) return false;
  return mn >= c * nx - slack;
}

// Per-component shell radii 0 < r_i < R_i.
struct ShellBounds {
  std::array<double, 2> r{0.0, 0.0};
  std::array<double, 2> R{0.0, 0.0};

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      if (!(r[i] > 0.0) || !(R[i] > r[i])) throw InputError("shell bounds: need 0 < r < R per component");
    }
  }
};

// Direction used to push short elements back to the inner sphere. Null seeds
// mean the constant-one function.
struct RetractionConfig {
  std::array<std::shared_ptr<const GridFunction>, 2> seeds{};

  const GridFunction* seed(int i) const { return seeds[std::size_t(i)].get(); }
};

// Pushes x to the sphere of radius r when |x| < r along
//   x  ->  r * (x + (r - |x|)^2 h) / |x + (r - |x|)^2 h|
// and leaves x untouched when |x| >= r. The returned sup norm equals r
// exactly at the argmax sample. Cone membership is preserved: the result is a
// positive multiple of a sum of cone elements.
inline GridFunction retract(const GridFunction& x, double r, const GridFunction* seed = nullptr) {
  if (!(r > 0.0)) throw InputError("retract: radius must be positive");
  const double nx = sup_norm(x);
  if (min_value(x) < -1e-12 * std::max(1.0, nx)) throw DomainError("retract: negative component sample");
  if (nx >= r) return x;

  GridFunction y = x;
  const double w = (r - nx) * (r - nx);
  if (seed != nullptr) {
    if (seed->size() != x.size()) throw InputError("retract: seed size mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * seed->values[i];
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w;
  }
  const double ny = sup_norm(y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = r * (y[i] / ny);
  return y;
}

// Counts evaluation events worth surfacing: radial rescales of inputs beyond
// the outer radius, and singular-floor clamps inside nonlinearity evaluation.
struct EvalCounters {
  long rescale = 0;
  long clamp = 0;
  void reset() { rescale = clamp = 0; }
};

// A two-component operator together with the shell its certificates refer
// to. cone_c carries the kernel cone ratios when known (zero means only
// nonnegativity of inputs can be checked).
struct OperatorHandle {
  using PairFn = std::function<GridPair(const GridPair&)>;

  PairFn eval;
  ShellBounds shell;
  std::array<double, 2> cone_c{0.0, 0.0};
  std::shared_ptr<EvalCounters> counters = std::make_shared<EvalCounters>();

  GridPair operator()(const GridPair& x) const { return eval(x); }
};

// Extends an operator from the shell to the full ball: components beyond R_i
// are radially rescaled onto the outer sphere (counted as an artifact event),
// components short of r_i are retracted onto the inner sphere, and the inner
// operator is evaluated at the adjusted point. Inputs must lie in the cone.
inline OperatorHandle extend_operator(const OperatorHandle& inner, const ShellBounds& shell,
                                      const RetractionConfig& cfg = {}) {
  shell.validate();
  OperatorHandle out = inner;
  out.shell = shell;
  out.eval = [inner_eval = inner.eval, shell, cfg, counters = inner.counters,
              cone_c = inner.cone_c](const GridPair& x) -> GridPair {
    GridPair z = x;
    for (int i = 0; i < 2; ++i) {
      const double nx = sup_norm(z[i]);
      // Guard slack, not certificate slack: wide enough that finite-difference
      // probes of an iterate sitting on the cone boundary still pass.
      const double slack = 1e-5 * std::max(1.0, nx);
      if (min_value(z[i]) < -1e-12 * std::max(1.0, nx)) {
        throw DomainError("extension: input component has negative samples");
      }
      if (cone_c[i] > 0.0 && min_value(z[i]) < cone_c[i] * nx - slack) {
        throw DomainError("extension: input component outside the cone");
      }
      if (nx > shell.R[i]) {
        const double sc = shell.R[i] / nx;
        for (auto& v : z[i].values) v *= sc;
        ++counters->rescale;
      }
      if (sup_norm(z[i]) < shell.r[i]) {
        z[i] = retract(z[i], shell.r[i], cfg.seed(i));
      }
    }
    return inner_eval(z);
  };
  return out;
}

// Replaces component `comp` by its star transform
//   sigma(x_c) = (R_c + r_c)/|x_c| - 1,
// which swaps the roles of the two spheres: the operator is evaluated at the
// argument with component `comp` scaled by sigma, and component `comp` of the
// value is divided by sigma. A fixed point v of the transformed operator
// pulls back to the fixed point with component sigma(v_c) * v_c of the
// original (see unstar_fixed_point).
inline OperatorHandle star_transform(const OperatorHandle& op, int comp) {
  if (comp < 0 || comp > 1) throw InputError("star_transform: component index out of range");
  op.shell.validate();
  const double r = op.shell.r[std::size_t(comp)];
  const double R = op.shell.R[std::size_t(comp)];
  OperatorHandle out = op;
  out.eval = [inner_eval = op.eval, comp, r, R](const GridPair& x) -> GridPair {
    const double nx = sup_norm(x[std::size_t(comp)]);
    if (nx < r * (1.0 - 1e-9)) {
      throw DomainError("star transform: component norm below the inner radius");
    }
    const double sigma = (R + r) / nx - 1.0;
    GridPair scaled = x;
    for (auto& v : scaled[std::size_t(comp)].values) v *= sigma;
    GridPair val = inner_eval(scaled);
    for (auto& v : val[std::size_t(comp)].values) v /= sigma;
    return val;
  };
  return out;
}

// Maps a fixed point of the starred operator back to a fixed point of the
// original operator: starred components are scaled by sigma(v_i).
inline GridPair unstar_fixed_point(const GridPair& v, std::array<bool, 2> starred, const ShellBounds& shell) {
  shell.validate();
  GridPair u = v;
  for (int i = 0; i < 2; ++i) {
    if (!starred[std::size_t(i)]) continue;
    const double nv = sup_norm(v[std::size_t(i)]);
    if (!(nv > 0.0)) throw DomainError("unstar: zero component");
    const double sigma = (shell.R[std::size_t(i)] + shell.r[std::size_t(i)]) / nv - 1.0;
    for (auto& val : u[std::size_t(i)].values) val *= sigma;
  }
  return u;
}

}  // namespace coexist

#endif
