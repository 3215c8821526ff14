#ifndef COEXIST_HAMMERSTEIN_HPP
#define COEXIST_HAMMERSTEIN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coexist/cone.hpp"
#include "coexist/errors.hpp"
#include "coexist/green.hpp"
#include "coexist/grid.hpp"
#include "coexist/hill.hpp"
#include "coexist/nonlinearity.hpp"

namespace coexist {

// A coupled two-component periodic problem:
//   x_i'' + a_i(t) x_i = f_i(t, x_1, x_2),  x_i T-periodic,
// discretized on n equispaced nodes.
struct ProblemSpec {
  double period = 0.0;
  int n = 0;
  std::array<HillCoefficient, 2> coeff{};
  std::array<Nonlinearity, 2> f{};
};

// Builds the integral operator
//   (T x)_i (t) = \int_0^T G_i(t,s) f_i(s, x_1(s), x_2(s)) ds
// over the shared node grid. Each component's kernel sign must match the
// declared sign of its nonlinearity, so that T maps into the nonnegative
// functions. `floors` > 0 turns on floored evaluation of singular terms;
// engaged clamps are counted in `counters->clamp`.
inline OperatorHandle assemble(const ProblemSpec& spec,
                               const std::array<std::shared_ptr<const GreenKernel>, 2>& kernels,
                               std::array<double, 2> floors = {0.0, 0.0},
                               std::shared_ptr<EvalCounters> counters = nullptr) {
  if (!(spec.period > 0.0) || spec.n < 32) throw InputError("assemble: bad grid");
  for (int i = 0; i < 2; ++i) {
    if (kernels[i] == nullptr) throw InputError("assemble: missing kernel");
    if (kernels[i]->n != spec.n || std::fabs(kernels[i]->period - spec.period) > 1e-12 * spec.period) {
      throw InputError("assemble: kernel grid does not match the problem grid");
    }
    if (kernels[i]->sign != spec.f[i].sign) {
      throw MixedSignError("assemble: kernel sign and nonlinearity sign disagree in component " +
                           std::to_string(i + 1));
    }
  }
  if (counters == nullptr) counters = std::make_shared<EvalCounters>();

  OperatorHandle op;
  op.counters = counters;
  op.cone_c = {kernels[0]->cone_ratio, kernels[1]->cone_ratio};
  const double T = spec.period;
  const int n = spec.n;
  const double h = T / n;
  auto f0 = spec.f[0];
  auto f1 = spec.f[1];
  op.eval = [kernels, f0, f1, floors, counters, T, n, h](const GridPair& x) {
    if (x[0].size() != std::size_t(n) || x[1].size() != std::size_t(n)) {
      throw InputError("operator: grid size mismatch");
    }
    GridPair out{GridFunction::constant(T, n, 0.0), GridFunction::constant(T, n, 0.0)};
    std::array<const Nonlinearity*, 2> fs{&f0, &f1};
    std::vector<double> fv(n);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < n; ++j) {
        const double s = T * j / n;
        fv[j] = evaluate_singular(*fs[i], s, x[0][j], x[1][j], floors[i],
                                  counters ? &counters->clamp : nullptr);
      }
      const GreenKernel& G = *kernels[i];
      for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += G.at(r, j) * fv[j];
        out[i].values[r] = h * acc;
      }
    }
    return out;
  };
  return op;
}

struct SolverConfig {
  double residual_tol = 1e-8;
  double damping = 0.5;     // Picard relaxation weight on the new iterate
  int max_picard = 300;
  int max_newton = 40;
  int stall_window = 10;    // Picard hands over to Newton after this many
  double stall_factor = 0.99;  // iterations shrink the residual by < 1%
  double fd_step = 1e-6;
};

struct SolveResult {
  GridPair solution;        // on the original (unstarred) variables
  double residual = std::numeric_limits<double>::infinity();
  std::array<double, 2> norms{0.0, 0.0};
  bool localized = false;   // sup norms inside the prescribed shell
  bool cone_ok = false;
  bool clamp_activity = false;
  bool success = false;
  int iterations = 0;
  long rescale_events = 0;  // extension artifacts engaged while iterating
  std::string strategy;
  std::array<bool, 2> expansive{false, false};
};

namespace detail {

inline double pair_residual(const GridPair& x, const GridPair& nx) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < x[i].values.size(); ++j) {
      m = std::max(m, std::fabs(x[i].values[j] - nx[i].values[j]));
    }
  }
  return m;
}

// Pushes an iterate back into the cones: negative samples are zeroed and a
// constant lift restores min >= c * max. A converged iterate already inside
// the cone is left bitwise untouched.
inline void heal_to_cone(GridPair& x, const std::array<double, 2>& c) {
  for (int i = 0; i < 2; ++i) {
    double mx = 0.0;
    for (double& v : x[i].values) {
      if (v < 0.0) v = 0.0;
      mx = std::max(mx, v);
    }
    if (c[i] <= 0.0 || c[i] >= 1.0 || mx == 0.0) continue;
    const double mn = *std::min_element(x[i].values.begin(), x[i].values.end());
    if (mn >= c[i] * mx) continue;
    const double lift = (c[i] * mx - mn) / (1.0 - c[i]) * (1.0 + 1e-12);
    for (double& v : x[i].values) v += lift;
  }
}

inline Eigen::VectorXd pack(const GridPair& x) {
  const int n = int(x[0].values.size());
  Eigen::VectorXd v(2 * n);
  for (int i = 0; i < n; ++i) v[i] = x[0].values[i];
  for (int i = 0; i < n; ++i) v[n + i] = x[1].values[i];
  return v;
}

inline GridPair unpack(const Eigen::VectorXd& v, double T) {
  const int n = int(v.size()) / 2;
  GridPair x{GridFunction::constant(T, n, 0.0), GridFunction::constant(T, n, 0.0)};
  for (int i = 0; i < n; ++i) x[0].values[i] = v[i];
  for (int i = 0; i < n; ++i) x[1].values[i] = v[n + i];
  return x;
}

// One Newton stage on F(x) = x - N(x) with a forward-difference Jacobian.
// Iterates are healed into the cones after every step. Returns the best
// residual reached and leaves the matching iterate in `x`.
inline double newton_stage(const OperatorHandle& N, GridPair& x, const std::array<double, 2>& cone_c,
                           const SolverConfig& cfg, int& iterations) {
  const double T = x[0].period;
  const int n = int(x[0].values.size());
  const int dim = 2 * n;
  Eigen::VectorXd xv = pack(x);
  auto F = [&](const Eigen::VectorXd& v) {
    GridPair p = unpack(v, T);
    GridPair np = N(p);
    return (v - pack(np)).eval();
  };
  Eigen::VectorXd fv = F(xv);
  double best = fv.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd best_x = xv;
  for (int it = 0; it < cfg.max_newton && best > cfg.residual_tol; ++it) {
    ++iterations;
    Eigen::MatrixXd J(dim, dim);
    for (int j = 0; j < dim; ++j) {
      const double step = cfg.fd_step * (1.0 + std::fabs(xv[j]));
      Eigen::VectorXd xp = xv;
      xp[j] += step;
      J.col(j) = (F(xp) - fv) / step;
    }
    Eigen::VectorXd d = J.partialPivLu().solve(-fv);
    if (!d.allFinite()) break;
    xv += d;
    GridPair healed = unpack(xv, T);
    heal_to_cone(healed, cone_c);
    xv = pack(healed);
    fv = F(xv);
    const double res = fv.lpNorm<Eigen::Infinity>();
    if (res < best) {
      best = res;
      best_x = xv;
    } else if (res > 1e3 * (best + 1.0)) {
      break;  // diverging
    }
  }
  x = unpack(best_x, T);
  return best;
}

}  // namespace detail

// Looks for a positive periodic solution pair inside `shell`. Components
// flagged expansive are solved through their star transform; the iteration
// runs on the retracted/rescaled extension so every start is admissible.
// The reported residual, localization, cone, and clamp flags come from a
// fresh certification pass on the plain operator.
inline SolveResult solve_fixed_point(const ProblemSpec& spec,
                                     const std::array<std::shared_ptr<const GreenKernel>, 2>& kernels,
                                     const ShellBounds& shell,
                                     std::array<bool, 2> expansive = {false, false},
                                     const SolverConfig& cfg = {}) {
  shell.validate();
  const double T = spec.period;
  const int n = spec.n;
  const std::array<double, 2> floors{kernels[0]->cone_ratio * shell.r[0] / 2.0,
                                     kernels[1]->cone_ratio * shell.r[1] / 2.0};

  auto iter_counters = std::make_shared<EvalCounters>();
  OperatorHandle base = assemble(spec, kernels, floors, iter_counters);
  const std::array<double, 2> cone_c{kernels[0]->cone_ratio, kernels[1]->cone_ratio};

  // Star components that expand, then extend over the shell. The starred
  // variable lives on the same shell: ||v|| -> R + r - ||v|| maps [r, R]
  // onto itself.
  OperatorHandle starred = base;
  starred.shell = shell;
  for (int i = 0; i < 2; ++i) {
    if (expansive[i]) starred = star_transform(starred, i);
  }
  OperatorHandle N = extend_operator(starred, shell);

  SolveResult out;
  out.expansive = expansive;

  // Deterministic constant starts: all norm combinations of {r, sqrt(rR), R}.
  std::array<std::array<double, 3>, 2> levels;
  for (int i = 0; i < 2; ++i) {
    levels[i] = {shell.r[i], std::sqrt(shell.r[i] * shell.R[i]), shell.R[i]};
  }

  GridPair best_x{GridFunction::constant(T, n, levels[0][1]), GridFunction::constant(T, n, levels[1][1])};
  double best_res = std::numeric_limits<double>::infinity();
  int best_iters = 0;
  std::string best_strategy = "none";

  for (int s0 = 0; s0 < 3; ++s0) {
    for (int s1 = 0; s1 < 3; ++s1) {
      GridPair x{GridFunction::constant(T, n, levels[0][s0]),
                 GridFunction::constant(T, n, levels[1][s1])};
      int iters = 0;
      std::string strategy = "picard";
      std::vector<double> history;
      GridPair nx = N(x);
      double res = detail::pair_residual(x, nx);
      bool stalled = false;
      while (iters < cfg.max_picard && res > cfg.residual_tol) {
        ++iters;
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < n; ++j) {
            x[i].values[j] = (1.0 - cfg.damping) * x[i].values[j] + cfg.damping * nx[i].values[j];
          }
        }
        nx = N(x);
        res = detail::pair_residual(x, nx);
        history.push_back(res);
        const int w = cfg.stall_window;
        if (int(history.size()) > w && res > cfg.stall_factor * history[history.size() - 1 - w]) {
          stalled = true;
          break;
        }
      }
      if (res > cfg.residual_tol && (stalled || iters >= cfg.max_picard)) {
        strategy = "picard+newton";
        res = detail::newton_stage(N, x, cone_c, cfg, iters);
      }
      if (res < best_res) {
        best_res = res;
        best_x = x;
        best_iters = iters;
        best_strategy = strategy;
      }
      if (best_res <= cfg.residual_tol) break;
    }
    if (best_res <= cfg.residual_tol) break;
  }

  // Back to the original variables.
  GridPair u = unstar_fixed_point(best_x, expansive, shell);

  // The star substitution scales residuals by up to R/r, so a solution of the
  // starred system may need a short polish on the plain operator.
  auto cert_counters = std::make_shared<EvalCounters>();
  OperatorHandle plain = assemble(spec, kernels, floors, cert_counters);
  GridPair pu = plain(u);
  double plain_res = detail::pair_residual(u, pu);
  int polish_iters = 0;
  if (plain_res > cfg.residual_tol && best_res <= 1e-4) {
    SolverConfig pcfg = cfg;
    pcfg.max_newton = 12;
    plain_res = detail::newton_stage(plain, u, cone_c, pcfg, polish_iters);
    if (polish_iters > 0) best_strategy += "+polish";
  }

  // Certification pass: fresh counters, floored operator, plain variables.
  cert_counters->reset();
  pu = plain(u);
  out.solution = u;
  out.residual = detail::pair_residual(u, pu);
  out.iterations = best_iters + polish_iters;
  out.rescale_events = iter_counters->rescale;
  out.strategy = best_strategy;
  out.clamp_activity = cert_counters->clamp > 0;
  out.localized = true;
  out.cone_ok = true;
  for (int i = 0; i < 2; ++i) {
    out.norms[i] = sup_norm(u[i]);
    if (out.norms[i] < shell.r[i] * (1.0 - 1e-6) || out.norms[i] > shell.R[i] * (1.0 + 1e-6)) {
      out.localized = false;
    }
    if (!in_cone(u[i], cone_c[i])) out.cone_ok = false;
  }
  out.success = out.residual <= cfg.residual_tol && out.localized && out.cone_ok && !out.clamp_activity;
  return out;
}

}  // namespace coexist

#endif
