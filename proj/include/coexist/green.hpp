#ifndef COEXIST_GREEN_HPP
#define COEXIST_GREEN_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "coexist/errors.hpp"
#include "coexist/grid.hpp"
#include "coexist/hill.hpp"

namespace coexist {

// Periodic kernel G of z'' + a(t) z = f on the uniform n x n grid:
// x(t) = integral of G(t,s) f(s) ds solves the periodic problem.
// Entries are stored row-major, values[i*n + j] = G(t_i, s_j).
struct GreenKernel {
  double period = 0.0;
  int n = 0;
  std::vector<double> values;
  double min_entry = 0.0;   // m
  double max_entry = 0.0;   // M
  int sign = 0;             // +1 strictly positive kernel, -1 strictly negative
  double cone_ratio = 0.0;  // c = min(m/M, M/m), in (0,1)
  double trace = 0.0;       // monodromy trace of the underlying linear problem

  double at(int i, int j) const { return values[std::size_t(i) * std::size_t(n) + std::size_t(j)]; }
  double step() const { return period / double(n); }
};

// Builds the kernel column by column: the particular part is the Cauchy
// kernel k(t,s) = phi(s) psi(t) - psi(s) phi(t) switched on at t >= s, and a
// homogeneous correction alpha*phi + beta*psi enforces periodic value and
// slope via a 2x2 solve against (I - monodromy).
inline GreenKernel build_green(const HillCoefficient& a, double T, int n) {
  const FundamentalPair fp = integrate_hill(a, T, n);
  if (!is_nonresonant(fp)) {
    throw ResonanceError("build_green: periodic problem is resonant (monodromy trace within 1e-6 of 2)");
  }

  const std::size_t N = std::size_t(n);
  const double phiT = fp.phi[N], psiT = fp.psi[N];
  const double dphiT = fp.dphi[N], dpsiT = fp.dpsi[N];
  // det(I - M) = 2 - trace for a unit-Wronskian pair.
  const double a11 = 1.0 - phiT, a12 = -psiT;
  const double a21 = -dphiT, a22 = 1.0 - dpsiT;
  const double det = a11 * a22 - a12 * a21;

  GreenKernel g;
  g.period = T;
  g.n = n;
  g.trace = fp.monodromy_trace();
  g.values.assign(N * N, 0.0);

  for (std::size_t j = 0; j < N; ++j) {
    const double pj = fp.phi[j], qj = fp.psi[j];
    const double kT = pj * psiT - qj * phiT;        // k(T, s_j)
    const double dkT = pj * dpsiT - qj * dphiT;     // k_t(T, s_j)
    const double alpha = (kT * a22 - a12 * dkT) / det;
    const double beta = (a11 * dkT - kT * a21) / det;
    for (std::size_t i = 0; i < N; ++i) {
      double v = alpha * fp.phi[i] + beta * fp.psi[i];
      if (i >= j) v += pj * fp.psi[i] - qj * fp.phi[i];
      g.values[i * N + j] = v;
    }
    // Periodicity of the column: the value at t = T must reproduce row 0.
    const double vT = alpha * phiT + beta * psiT + kT;
    if (std::fabs(vT - g.values[j]) > 1e-8 * (1.0 + std::fabs(g.values[j]))) {
      throw ResonanceError("build_green: periodic correction failed (ill-conditioned monodromy solve)");
    }
  }

  double mn = g.values[0], mx = g.values[0];
  for (double v : g.values) {
    if (v < mn) mn = v;
    if (v > mx) mx = v;
  }
  g.min_entry = mn;
  g.max_entry = mx;
  const double sign_tol = 1e-10;
  const bool has_pos = mx > sign_tol, has_neg = mn < -sign_tol;
  if (has_pos && has_neg) {
    throw MixedSignError("build_green: kernel has entries of both signs beyond 1e-10");
  }
  if (!has_pos && !has_neg) {
    throw MixedSignError("build_green: kernel is numerically zero");
  }
  g.sign = has_pos ? +1 : -1;
  const double r1 = g.min_entry / g.max_entry;
  const double r2 = g.max_entry / g.min_entry;
  g.cone_ratio = r1 < r2 ? r1 : r2;
  return g;
}

// Rectangle-rule quadrature on the periodic grid:
// (Qf)(t_i) = h * sum_j G(t_i, s_j) f(s_j).
inline GridFunction apply_kernel(const GreenKernel& g, const GridFunction& f) {
  const std::size_t N = std::size_t(g.n);
  if (f.size() != N) throw InputError("apply_kernel: grid size mismatch");
  const double h = g.step();
  std::vector<double> out(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    const double* row = g.values.data() + i * N;
    for (std::size_t j = 0; j < N; ++j) acc += row[j] * f.values[j];
    out[i] = h * acc;
  }
  return GridFunction(g.period, std::move(out));
}

// Defining-property check: runs the quadrature on a probe forcing and
// measures how well the result solves z'' + a z = probe, with the second
// derivative taken as the periodic three-point difference. Returns the
// max-norm of the defect over the grid.
inline double green_residual(const GreenKernel& g, const HillCoefficient& a, const GridFunction& probe) {
  const GridFunction x = apply_kernel(g, probe);
  const std::size_t N = std::size_t(g.n);
  const double h = g.step();
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t ip = (i + 1 == N) ? 0 : i + 1;
    const std::size_t im = (i == 0) ? N - 1 : i - 1;
    const double d2 = (x.values[ip] - 2.0 * x.values[i] + x.values[im]) / (h * h);
    const double defect = d2 + a(x.node(i)) * x.values[i] - probe.values[i];
    worst = std::max(worst, std::fabs(defect));
  }
  return worst;
}

}  // namespace coexist

#endif
