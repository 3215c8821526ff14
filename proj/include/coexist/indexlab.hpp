#ifndef COEXIST_INDEXLAB_HPP
#define COEXIST_INDEXLAB_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "coexist/errors.hpp"

namespace coexist {

// Planar laboratory: every cone index of the two-component machinery becomes
// a Brouwer degree of a map of the closed first quadrant, computable as a
// boundary winding number over rectangles.

struct Rect {
  std::array<double, 2> a{0.0, 0.0};
  std::array<double, 2> b{1.0, 1.0};

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      if (!(a[i] >= 0.0) || !(a[i] < b[i])) {
        throw InputError("rect: need 0 <= a_i < b_i");
      }
    }
  }
  std::array<double, 2> center() const { return {(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0}; }
};

using Point2 = std::array<double, 2>;

struct PlanarMap {
  std::function<Point2(Point2)> eval;
  // Set when the map is a product of scalar profiles N_i(x) = g_i(x_i).
  std::array<std::function<double(double)>, 2> profile{};

  Point2 operator()(Point2 x) const { return eval(x); }

  static PlanarMap separable(std::function<double(double)> g1, std::function<double(double)> g2) {
    PlanarMap m;
    m.profile = {g1, g2};
    m.eval = [g1, g2](Point2 x) -> Point2 { return {g1(x[0]), g2(x[1])}; };
    return m;
  }

  static PlanarMap general(std::function<Point2(Point2)> f) {
    PlanarMap m;
    m.eval = std::move(f);
    return m;
  }
};

// Sampled check that the map sends the closed first quadrant (restricted to
// the rect) into itself.
inline void validate_quadrant(const PlanarMap& m, const Rect& rect, int samples = 32) {
  rect.validate();
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; j <= samples; ++j) {
      Point2 x{rect.a[0] + (rect.b[0] - rect.a[0]) * i / samples,
               rect.a[1] + (rect.b[1] - rect.a[1]) * j / samples};
      Point2 y = m(x);
      if (!(y[0] >= 0.0) || !(y[1] >= 0.0)) {
        throw DomainError("planar map leaves the first quadrant");
      }
    }
  }
}

// Displacement field x - N(x), the map whose winding is the degree.
inline PlanarMap displacement(const PlanarMap& N) {
  return PlanarMap::general([N](Point2 x) -> Point2 {
    Point2 y = N(x);
    return {x[0] - y[0], x[1] - y[1]};
  });
}

// One-dimensional band retraction per component: arguments below r_i are
// clamped up to r_i. Rectangles touching the axes become admissible because
// the composed map has no fixed points with a component in (0, r_i) unless
// the profile puts one there.
inline PlanarMap extended_map(const PlanarMap& N, std::array<double, 2> r) {
  if (!(r[0] > 0.0) || !(r[1] > 0.0)) throw InputError("extended map: radii must be positive");
  PlanarMap m;
  m.eval = [N, r](Point2 x) -> Point2 {
    return N(Point2{std::max(x[0], r[0]), std::max(x[1], r[1])});
  };
  return m;
}

// Winding number of F along the positively oriented boundary of the rect:
// total signed angle divided by 2 pi. Rejects boundaries that pass too close
// to a zero of F and samplings too coarse to track the angle.
inline int winding_degree(const PlanarMap& F, const Rect& rect, int steps = 4096) {
  rect.validate();
  if (steps < 8) throw InputError("winding: need at least 8 steps per edge");
  const double scale = std::max({1.0, rect.b[0], rect.b[1]});
  const double floor = 1e-6 * scale;

  const std::array<Point2, 4> corner{Point2{rect.a[0], rect.a[1]}, Point2{rect.b[0], rect.a[1]},
                                     Point2{rect.b[0], rect.b[1]}, Point2{rect.a[0], rect.b[1]}};
  constexpr double pi = 3.14159265358979323846;
  double total = 0.0;
  double prev = 0.0;
  bool have_prev = false;
  double first = 0.0;

  for (int e = 0; e < 4; ++e) {
    const Point2& p0 = corner[e];
    const Point2& p1 = corner[(e + 1) % 4];
    for (int k = 0; k < steps; ++k) {
      const double u = double(k) / steps;
      Point2 p{p0[0] + (p1[0] - p0[0]) * u, p0[1] + (p1[1] - p0[1]) * u};
      Point2 v = F(p);
      const double mag = std::hypot(v[0], v[1]);
      if (!(mag > floor)) {
        throw BoundaryFixedPointError("winding: |F| = " + std::to_string(mag) +
                                      " at boundary point (" + std::to_string(p[0]) + ", " +
                                      std::to_string(p[1]) + ")");
      }
      const double ang = std::atan2(v[1], v[0]);
      if (have_prev) {
        double d = ang - prev;
        while (d > pi) d -= 2.0 * pi;
        while (d <= -pi) d += 2.0 * pi;
        if (std::fabs(d) > pi / 2.0) {
          throw RefinementError("winding: angular step exceeds pi/2; refine the boundary sampling");
        }
        total += d;
      } else {
        first = ang;
        have_prev = true;
      }
      prev = ang;
    }
  }
  // Close the loop back to the first sample.
  double d = first - prev;
  while (d > pi) d -= 2.0 * pi;
  while (d <= -pi) d += 2.0 * pi;
  if (std::fabs(d) > pi / 2.0) {
    throw RefinementError("winding: angular step exceeds pi/2 at loop closure");
  }
  total += d;

  const double turns = total / (2.0 * pi);
  const long k = std::lround(turns);
  if (std::fabs(turns - double(k)) > 0.05) {
    throw RefinementError("winding: total angle is not an integer multiple of 2 pi");
  }
  return int(k);
}

// The five-rectangle index ledger of a shell: degrees over the outer box,
// the inner box, the two mixed boxes, and the shell itself. The shell value
// is computed directly and re-derived through the additivity decomposition
// of the outer box; a disagreement throws.
struct IndexLedger {
  int outer = 0;       // [0, R1] x [0, R2]
  int inner = 0;       // [0, r1] x [0, r2]
  int low_second = 0;  // [0, R1] x [0, r2]
  int low_first = 0;   // [0, r1] x [0, R2]
  int shell = 0;       // [r1, R1] x [r2, R2]
};

inline IndexLedger ledger_check(const PlanarMap& N, std::array<double, 2> r,
                                std::array<double, 2> R, int steps = 4096) {
  for (int i = 0; i < 2; ++i) {
    if (!(r[i] > 0.0) || !(R[i] > r[i])) throw InputError("ledger: need 0 < r < R");
  }
  PlanarMap F = displacement(extended_map(N, r));
  auto deg = [&](double a1, double b1, double a2, double b2) {
    Rect rect;
    rect.a = {a1, a2};
    rect.b = {b1, b2};
    return winding_degree(F, rect, steps);
  };

  IndexLedger led;
  led.outer = deg(0.0, R[0], 0.0, R[1]);
  led.inner = deg(0.0, r[0], 0.0, r[1]);
  led.low_second = deg(0.0, R[0], 0.0, r[1]);
  led.low_first = deg(0.0, r[0], 0.0, R[1]);
  led.shell = deg(r[0], R[0], r[1], R[1]);

  // [0,R1]x[0,r2] splits into the inner box and [r1,R1]x[0,r2].
  const int strip = deg(r[0], R[0], 0.0, r[1]);
  if (led.low_second != led.inner + strip) {
    throw MismatchError("ledger: additivity of the lower strip fails");
  }
  // The outer box splits into [0,r1]x[0,R2], the strip, and the shell.
  const int shell_additive = led.outer - led.low_first - strip;
  if (shell_additive != led.shell) {
    throw MismatchError("ledger: direct and additive shell degrees disagree");
  }
  return led;
}

// Homotopy probe H(x,t) = (t N1(x), N2(x) + (1-t) mu0 S2(x)): if the second
// component is pushed strictly above the region for every t, the degree is 0
// at every stage, matching the degenerate t = 0 endpoint.
struct HomotopyConfig {
  PlanarMap N;
  PlanarMap S;  // only the second component is used; must stay bounded away from 0
  double mu0 = 0.0;
  Rect region;
  int hypothesis_samples = 128;
};

// alpha = sup x2, beta = sup N2, gamma = inf S2 over the region: the probe
// requires mu0 > (alpha + beta) / gamma.
inline void validate_homotopy(const HomotopyConfig& cfg) {
  cfg.region.validate();
  const int s = cfg.hypothesis_samples;
  if (s < 8) throw InputError("homotopy: need at least 8 hypothesis samples per axis");
  double beta = 0.0;
  double gamma = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= s; ++i) {
    for (int j = 0; j <= s; ++j) {
      Point2 x{cfg.region.a[0] + (cfg.region.b[0] - cfg.region.a[0]) * i / s,
               cfg.region.a[1] + (cfg.region.b[1] - cfg.region.a[1]) * j / s};
      beta = std::max(beta, std::fabs(cfg.N(x)[1]));
      gamma = std::min(gamma, std::fabs(cfg.S(x)[1]));
    }
  }
  if (!(gamma > 0.0)) throw ConfigError("homotopy: auxiliary map vanishes on the region");
  const double alpha = cfg.region.b[1];
  if (!(cfg.mu0 > (alpha + beta) / gamma)) {
    throw ConfigError("homotopy: mu0 must exceed (alpha + beta) / gamma = " +
                      std::to_string((alpha + beta) / gamma));
  }
  // Sampled admissibility: N1 < x1 on the right edge (no outward eigenvector
  // there), and on the horizontal edges x2 - N2 must not lie in [0, mu0 S2],
  // or some stage of the homotopy pins a boundary point.
  for (int j = 0; j <= s; ++j) {
    const double x2 = cfg.region.a[1] + (cfg.region.b[1] - cfg.region.a[1]) * j / s;
    Point2 x{cfg.region.b[0], x2};
    if (!(cfg.N(x)[0] < x[0])) {
      throw ConfigError("homotopy: first component reaches the outer face");
    }
  }
  for (int i = 0; i <= s; ++i) {
    const double x1 = cfg.region.a[0] + (cfg.region.b[0] - cfg.region.a[0]) * i / s;
    for (double x2 : {cfg.region.a[1], cfg.region.b[1]}) {
      Point2 x{x1, x2};
      const double gap = x2 - cfg.N(x)[1];
      const double reach = cfg.mu0 * cfg.S(x)[1];
      if (gap >= 0.0 && gap <= reach) {
        throw ConfigError("homotopy: horizontal edge is pinned at some stage");
      }
    }
  }
}

struct HomotopyReport {
  bool passed = false;
  std::array<double, 5> t{0.0, 0.25, 0.5, 0.75, 1.0};
  std::array<int, 5> winding{};
  int direct = 0;  // winding of I - N over the region, the t = 1 endpoint
};

inline HomotopyReport homotopy_invariance_probe(const HomotopyConfig& cfg, int steps = 4096) {
  validate_homotopy(cfg);
  HomotopyReport rep;
  for (int k = 0; k < 5; ++k) {
    const double t = rep.t[k];
    PlanarMap H = PlanarMap::general([&cfg, t](Point2 x) -> Point2 {
      Point2 n = cfg.N(x);
      return {t * n[0], n[1] + (1.0 - t) * cfg.mu0 * cfg.S(x)[1]};
    });
    try {
      rep.winding[k] = winding_degree(displacement(H), cfg.region, steps);
    } catch (const BoundaryFixedPointError& e) {
      throw BoundaryFixedPointError("homotopy stage t = " + std::to_string(t) + ": " + e.what());
    }
  }
  rep.direct = winding_degree(displacement(cfg.N), cfg.region, steps);
  rep.passed = rep.direct == rep.winding[4];
  for (int w : rep.winding) {
    if (w != 0) rep.passed = false;
  }
  return rep;
}

// Multiplicity probe: two disjoint certified shells inside a big one. Degrees
// are computed per shell; the remainder degree comes from additivity and must
// be odd (hence nonzero), which is what forces the third fixed point.
struct MultiplicityReport {
  std::array<int, 3> degree{};  // inner shell 1, inner shell 2, outer shell
  int remainder = 0;
  std::vector<Point2> fixed_points;
};

namespace detail_lab {

// Planar Newton on F(x) = x - N(x) with a central-difference Jacobian.
inline bool newton_fixed_point(const PlanarMap& N, Point2& x, int iters = 60, double tol = 1e-11) {
  for (int it = 0; it < iters; ++it) {
    Point2 nx = N(x);
    const double f0 = x[0] - nx[0];
    const double f1 = x[1] - nx[1];
    if (std::fabs(f0) < tol && std::fabs(f1) < tol) return true;
    double J[2][2];
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-6 * (1.0 + std::fabs(x[j]));
      Point2 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      if (xm[j] < 0.0) xm[j] = 0.0;
      Point2 np = N(xp), nm = N(xm);
      const double dx = xp[j] - xm[j];
      J[0][j] = ((xp[0] - np[0]) - (xm[0] - nm[0])) / dx;
      J[1][j] = ((xp[1] - np[1]) - (xm[1] - nm[1])) / dx;
    }
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (std::fabs(det) < 1e-14) return false;
    const double d0 = (f0 * J[1][1] - f1 * J[0][1]) / det;
    const double d1 = (f1 * J[0][0] - f0 * J[1][0]) / det;
    x[0] -= d0;
    x[1] -= d1;
    if (x[0] < 0.0) x[0] = 0.0;
    if (x[1] < 0.0) x[1] = 0.0;
  }
  Point2 nx = N(x);
  return std::fabs(x[0] - nx[0]) < tol && std::fabs(x[1] - nx[1]) < tol;
}

}  // namespace detail_lab

inline MultiplicityReport multiplicity_probe(const PlanarMap& N, const std::array<Rect, 3>& shells,
                                             int steps = 4096) {
  for (const Rect& s : shells) s.validate();
  // For separable profiles, demand a genuine diagonal crossing on each shell
  // edge pair: without it the shell is not certifiable and the probe refuses.
  if (N.profile[0] && N.profile[1]) {
    for (int i = 0; i < 2; ++i) {
      const auto& g = N.profile[i];
      for (const Rect& s : {shells[0], shells[1]}) {
        const double lo = g(s.a[i]) - s.a[i];
        const double hi = g(s.b[i]) - s.b[i];
        if (!(lo * hi < 0.0)) {
          throw ConfigError("multiplicity: profile does not cross the diagonal on a shell");
        }
      }
    }
  }

  MultiplicityReport rep;
  PlanarMap F = displacement(N);
  for (int k = 0; k < 3; ++k) rep.degree[k] = winding_degree(F, shells[k], steps);
  rep.remainder = rep.degree[2] - rep.degree[0] - rep.degree[1];

  for (const Rect& s : shells) {
    Point2 x = s.center();
    if (detail_lab::newton_fixed_point(N, x)) {
      bool fresh = true;
      for (const Point2& p : rep.fixed_points) {
        if (std::hypot(p[0] - x[0], p[1] - x[1]) < 1e-6) fresh = false;
      }
      if (fresh) rep.fixed_points.push_back(x);
    }
  }
  return rep;
}

}  // namespace coexist

#endif
