#ifndef COEXIST_HILL_HPP
#define COEXIST_HILL_HPP

#include <array>
#include <cmath>
#include <vector>

#include "coexist/errors.hpp"
#include "coexist/grid.hpp"

namespace coexist {

// Coefficient a(t) of z'' + a(t) z = 0. Either a constant (which may be
// negative) or one period of samples. Sampled coefficients are evaluated by
// periodic linear interpolation, so the integrator's fourth order is only
// realized when the underlying function is smooth enough; constants always
// are.
struct HillCoefficient {
  bool is_constant = true;
  double value = 0.0;
  GridFunction samples;

  static HillCoefficient constant(double v) {
    HillCoefficient c;
    c.is_constant = true;
    c.value = v;
    return c;
  }

  static HillCoefficient sampled(GridFunction f) {
    HillCoefficient c;
    c.is_constant = false;
    c.samples = std::move(f);
    return c;
  }

  double operator()(double t) const {
    return is_constant ? value : samples.interpolate(t);
  }
};

// Fundamental pair phi, psi of z'' + a(t) z = 0 with
// phi(0)=1, phi'(0)=0 and psi(0)=0, psi'(0)=1, sampled at the n+1 nodes
// t_i = i*T/n (so index n holds the values at t = T).
struct FundamentalPair {
  double period = 0.0;
  std::vector<double> phi, dphi, psi, dpsi;

  std::size_t steps() const { return phi.empty() ? 0 : phi.size() - 1; }

  std::array<std::array<double, 2>, 2> monodromy() const {
    const std::size_t n = steps();
    return {{{phi[n], psi[n]}, {dphi[n], dpsi[n]}}};
  }

  double monodromy_trace() const {
    const std::size_t n = steps();
    return phi[n] + dpsi[n];
  }

  // Wronskian phi*psi' - psi*phi'; identically 1 for the exact flow.
  double monodromy_det() const {
    const std::size_t n = steps();
    return phi[n] * dpsi[n] - psi[n] * dphi[n];
  }
};

namespace detail {

// One classical RK4 step for the first-order system (z, w)' = (w, -a(t) z).
inline void rk4_step(const HillCoefficient& a, double t, double h, double& z, double& w) {
  const auto f = [&a](double s, double z_, double w_, double& dz, double& dw) {
    dz = w_;
    dw = -a(s) * z_;
  };
  double k1z, k1w, k2z, k2w, k3z, k3w, k4z, k4w;
  f(t, z, w, k1z, k1w);
  f(t + 0.5 * h, z + 0.5 * h * k1z, w + 0.5 * h * k1w, k2z, k2w);
  f(t + 0.5 * h, z + 0.5 * h * k2z, w + 0.5 * h * k2w, k3z, k3w);
  f(t + h, z + h * k3z, w + h * k3w, k4z, k4w);
  z += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
  w += (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
}

}  // namespace detail

// Integrates the two initial value problems across one period with fixed-step
// RK4 on the uniform grid h = T/n. Requires n >= 32 and even.
inline FundamentalPair integrate_hill(const HillCoefficient& a, double T, int n) {
  if (T <= 0.0) throw InputError("integrate_hill: period must be positive");
  if (n < 32 || (n % 2) != 0) throw InputError("integrate_hill: grid size must be even and at least 32");

  FundamentalPair fp;
  fp.period = T;
  fp.phi.resize(std::size_t(n) + 1);
  fp.dphi.resize(std::size_t(n) + 1);
  fp.psi.resize(std::size_t(n) + 1);
  fp.dpsi.resize(std::size_t(n) + 1);

  const double h = T / double(n);
  double z1 = 1.0, w1 = 0.0;  // phi
  double z2 = 0.0, w2 = 1.0;  // psi
  fp.phi[0] = z1;
  fp.dphi[0] = w1;
  fp.psi[0] = z2;
  fp.dpsi[0] = w2;
  for (int i = 0; i < n; ++i) {
    const double t = T * double(i) / double(n);
    detail::rk4_step(a, t, h, z1, w1);
    detail::rk4_step(a, t, h, z2, w2);
    fp.phi[std::size_t(i) + 1] = z1;
    fp.dphi[std::size_t(i) + 1] = w1;
    fp.psi[std::size_t(i) + 1] = z2;
    fp.dpsi[std::size_t(i) + 1] = w2;
  }
  return fp;
}

// The periodic problem is invertible exactly when 2 is not an eigenvalue sum
// of the monodromy matrix; numerically: |trace - 2| > 1e-6.
inline bool is_nonresonant(const FundamentalPair& fp) {
  return std::fabs(fp.monodromy_trace() - 2.0) > 1e-6;
}

}  // namespace coexist

#endif
