#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "coexist/indexlab.hpp"

using namespace coexist;

namespace {

Rect box(double a1, double b1, double a2, double b2) {
  Rect r;
  r.a = {a1, a2};
  r.b = {b1, b2};
  return r;
}

PlanarMap sqrt_pair() {
  auto g = [](double s) { return std::sqrt(s); };
  return PlanarMap::separable(g, g);
}

PlanarMap square_pair() {
  auto g = [](double s) { return s * s; };
  return PlanarMap::separable(g, g);
}

// Cubic profile crossing the diagonal at 1, 3, 9 with slopes < 1, > 1, < 1.
double cubic_profile(double s) {
  return s - 0.005 * (s - 1.0) * (s - 3.0) * (s - 9.0);
}

}  // namespace

TEST_CASE("winding degree basics") {
  // Halving map: no fixed point in [1,2]^2.
  PlanarMap half = PlanarMap::separable([](double s) { return 0.5 * s; },
                                        [](double s) { return 0.5 * s; });
  REQUIRE(winding_degree(displacement(half), box(1, 2, 1, 2)) == 0);

  // Compressive pair: unique fixed point (1,1), I - N Jacobian diag(1/2).
  REQUIRE(winding_degree(displacement(sqrt_pair()), box(0.25, 4, 0.25, 4)) == 1);

  // Mixed pair: determinant (1/2)(1-2) < 0 at (1,1).
  PlanarMap mixed = PlanarMap::separable([](double s) { return std::sqrt(s); },
                                         [](double s) { return s * s; });
  REQUIRE(winding_degree(displacement(mixed), box(0.25, 4, 0.5, 2)) == -1);
}

TEST_CASE("constant map normalization") {
  PlanarMap c = PlanarMap::general([](Point2) -> Point2 { return {1.5, 1.5}; });
  REQUIRE(winding_degree(displacement(c), box(1, 2, 1, 2)) == 1);
  REQUIRE(winding_degree(displacement(c), box(2, 3, 2, 3)) == 0);
  REQUIRE(winding_degree(displacement(c), box(2, 3, 1, 2)) == 0);
}

TEST_CASE("winding is stable once the sampling is accepted") {
  PlanarMap mixed = PlanarMap::separable([](double s) { return std::sqrt(s); },
                                         [](double s) { return s * s; });
  const Rect r = box(0.25, 4, 0.5, 2);
  const int coarse = winding_degree(displacement(mixed), r, 1024);
  const int fine = winding_degree(displacement(mixed), r, 2048);
  const int finer = winding_degree(displacement(mixed), r, 4096);
  REQUIRE(coarse == fine);
  REQUIRE(fine == finer);
}

TEST_CASE("winding guards") {
  // Fixed point sitting on the rectangle corner.
  REQUIRE_THROWS_AS(winding_degree(displacement(sqrt_pair()), box(1, 2, 1, 2)),
                    BoundaryFixedPointError);

  // Angular velocity too high for 8 samples per edge: 22/8 radians per step.
  PlanarMap spin = PlanarMap::general(
      [](Point2 p) -> Point2 { return {std::cos(22.0 * p[0]), std::sin(22.0 * p[0])}; });
  REQUIRE_THROWS_AS(winding_degree(spin, box(0, 1, 0, 1), 8), RefinementError);

  REQUIRE_THROWS_AS(winding_degree(spin, box(0, 1, 0, 1), 4), InputError);
  REQUIRE_THROWS_AS(box(1, 1, 0, 2).validate(), InputError);
  REQUIRE_THROWS_AS(box(-0.5, 1, 0, 2).validate(), InputError);
}

TEST_CASE("degree additivity across a clean vertical cut") {
  PlanarMap N = extended_map(sqrt_pair(), {0.25, 0.25});
  PlanarMap F = displacement(N);
  const int whole = winding_degree(F, box(0, 4, 0, 4));
  const int left = winding_degree(F, box(0, 2, 0, 4));
  const int right = winding_degree(F, box(2, 4, 0, 4));
  REQUIRE(whole == left + right);
  REQUIRE(whole == 1);
}

TEST_CASE("retraction probes for the index of the trivial region") {
  // Contraction through the band retraction: fixed point (0.25, 0.25) below
  // the band, where the composed map is locally constant, so degree +1.
  PlanarMap half = PlanarMap::separable([](double s) { return 0.5 * s; },
                                        [](double s) { return 0.5 * s; });
  PlanarMap half_ext = extended_map(half, {0.5, 0.5});
  REQUIRE(winding_degree(displacement(half_ext), box(0, 2, 0, 2)) == 1);

  // Expansion: 2s + 1 has no fixed point anywhere in the band picture.
  PlanarMap expand = PlanarMap::separable([](double s) { return 2.0 * s + 1.0; },
                                          [](double s) { return 2.0 * s + 1.0; });
  PlanarMap expand_ext = extended_map(expand, {0.5, 0.5});
  REQUIRE(winding_degree(displacement(expand_ext), box(0, 2, 0, 2)) == 0);
}

TEST_CASE("quadrant membership is sampled") {
  PlanarMap bad = PlanarMap::general([](Point2 p) -> Point2 { return {p[0] - 5.0, p[1]}; });
  REQUIRE_THROWS_AS(validate_quadrant(bad, box(0, 4, 0, 4)), DomainError);
  PlanarMap good = PlanarMap::separable(cubic_profile, cubic_profile);
  REQUIRE_NOTHROW(validate_quadrant(good, box(0.2, 20, 0.2, 20)));
}

TEST_CASE("shell ledgers for the four growth configurations") {
  // Compressive-compressive: sqrt profiles on [0.25, 4]^2.
  IndexLedger cc = ledger_check(sqrt_pair(), {0.25, 0.25}, {4.0, 4.0});
  REQUIRE(cc.outer == 1);
  REQUIRE(cc.inner == 0);
  REQUIRE(cc.low_second == 0);
  REQUIRE(cc.low_first == 0);
  REQUIRE(cc.shell == 1);

  // Expansive-expansive: squares on [0.5, 2]^2. The band retraction parks an
  // extra fixed point at 0.25 per component, inside the inner box.
  IndexLedger ee = ledger_check(square_pair(), {0.5, 0.5}, {2.0, 2.0});
  REQUIRE(ee.outer == 0);
  REQUIRE(ee.inner == 1);
  REQUIRE(ee.low_second == 0);
  REQUIRE(ee.low_first == 0);
  REQUIRE(ee.shell == 1);

  // Expansive-compressive and its mirror.
  PlanarMap ec_map = PlanarMap::separable([](double s) { return s * s; },
                                          [](double s) { return std::sqrt(s); });
  IndexLedger ec = ledger_check(ec_map, {0.5, 0.25}, {2.0, 4.0});
  REQUIRE(ec.outer == 0);
  REQUIRE(ec.inner == 0);
  REQUIRE(ec.low_second == 0);
  REQUIRE(ec.low_first == 1);
  REQUIRE(ec.shell == -1);

  PlanarMap ce_map = PlanarMap::separable([](double s) { return std::sqrt(s); },
                                          [](double s) { return s * s; });
  IndexLedger ce = ledger_check(ce_map, {0.25, 0.5}, {4.0, 2.0});
  REQUIRE(ce.outer == 0);
  REQUIRE(ce.inner == 0);
  REQUIRE(ce.low_second == 1);
  REQUIRE(ce.low_first == 0);
  REQUIRE(ce.shell == -1);

  // Shell sign = (-1)^(number of expansive components).
  REQUIRE(cc.shell == 1);
  REQUIRE(ec.shell == -1);
  REQUIRE(ce.shell == -1);
  REQUIRE(ee.shell == 1);

  REQUIRE_THROWS_AS(ledger_check(sqrt_pair(), {0.0, 0.25}, {4.0, 4.0}), InputError);
}

TEST_CASE("homotopy probe: degree zero at every stage") {
  HomotopyConfig cfg;
  cfg.N = PlanarMap::general([](Point2 x) -> Point2 {
    return {0.5 * x[0] * (1.0 + x[1] / 10.0), 3.5 + 0.1 * std::sin(x[0])};
  });
  cfg.S = PlanarMap::general([](Point2) -> Point2 { return {0.0, 1.0}; });
  cfg.mu0 = 7.0;  // threshold (alpha + beta) / gamma = (3 + 3.6) / 1 = 6.6
  cfg.region = box(0, 1, 1, 3);

  HomotopyReport rep = homotopy_invariance_probe(cfg);
  REQUIRE(rep.passed);
  for (int w : rep.winding) REQUIRE(w == 0);
  REQUIRE(rep.direct == 0);
  REQUIRE(rep.direct == rep.winding[4]);
}

TEST_CASE("homotopy probe rejects bad configurations") {
  HomotopyConfig cfg;
  cfg.N = PlanarMap::general([](Point2 x) -> Point2 {
    return {0.5 * x[0] * (1.0 + x[1] / 10.0), 3.5 + 0.1 * std::sin(x[0])};
  });
  cfg.S = PlanarMap::general([](Point2) -> Point2 { return {0.0, 1.0}; });
  cfg.region = box(0, 1, 1, 3);

  // mu0 below the (alpha + beta) / gamma threshold.
  cfg.mu0 = 6.0;
  REQUIRE_THROWS_AS(homotopy_invariance_probe(cfg), ConfigError);

  // Second component crossing the top edge at some homotopy stage: the
  // sampled admissibility check refuses before any winding runs.
  HomotopyConfig pinned = cfg;
  pinned.mu0 = 7.0;
  pinned.N = PlanarMap::general([](Point2 x) -> Point2 {
    return {0.5 * x[0] * (1.0 + x[1] / 10.0), 2.0 + 0.1 * std::sin(x[0])};
  });
  REQUIRE_THROWS_AS(homotopy_invariance_probe(pinned), ConfigError);

  // Vanishing auxiliary map.
  HomotopyConfig degenerate = cfg;
  degenerate.mu0 = 7.0;
  degenerate.S = PlanarMap::general([](Point2 x) -> Point2 { return {0.0, x[0]}; });
  REQUIRE_THROWS_AS(homotopy_invariance_probe(degenerate), ConfigError);
}

TEST_CASE("multiplicity probe finds three fixed points across nested shells") {
  PlanarMap N = PlanarMap::separable(cubic_profile, cubic_profile);
  std::array<Rect, 3> shells{box(0.5, 2, 0.5, 2), box(2.5, 5, 2.5, 5), box(0.2, 20, 0.2, 20)};
  MultiplicityReport rep = multiplicity_probe(N, shells);

  REQUIRE(rep.degree[0] == 1);
  REQUIRE(rep.degree[1] == 1);
  REQUIRE(rep.degree[2] == 1);
  REQUIRE(rep.remainder == -1);
  REQUIRE(rep.remainder % 2 != 0);

  REQUIRE(rep.fixed_points.size() == 3);
  std::vector<Point2> pts = rep.fixed_points;
  std::sort(pts.begin(), pts.end(),
            [](const Point2& p, const Point2& q) { return p[0] < q[0]; });

  // Independent oracle: dense 1-D scan of the diagonal crossings.
  std::vector<double> roots;
  double prev_s = 0.2, prev_v = cubic_profile(0.2) - 0.2;
  for (double s = 0.2 + 1e-3; s <= 20.0; s += 1e-3) {
    const double v = cubic_profile(s) - s;
    if (v == 0.0) {
      // Sample landed on a root (the cubic term underflows near s = 1).
      roots.push_back(s);
    } else if (prev_v * v < 0.0) {
      double lo = prev_s, hi = s;
      for (int it = 0; it < 60; ++it) {
        const double mid = (lo + hi) / 2.0;
        ((cubic_profile(lo) - lo) * (cubic_profile(mid) - mid) <= 0.0 ? hi : lo) = mid;
      }
      roots.push_back((lo + hi) / 2.0);
    }
    prev_s = s;
    prev_v = v;
  }
  REQUIRE(roots.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(pts[k][0] == Catch::Approx(roots[k]).margin(1e-6));
    REQUIRE(pts[k][1] == Catch::Approx(roots[k]).margin(1e-6));
  }

  // The third point lies in the big shell but outside both small ones.
  const Point2& far = pts[2];
  REQUIRE(far[0] > shells[1].b[0]);
  REQUIRE(far[0] < shells[2].b[0]);

  // A shell without a diagonal crossing is refused.
  std::array<Rect, 3> bad{box(1.5, 2, 1.5, 2), box(2.5, 5, 2.5, 5), box(0.2, 20, 0.2, 20)};
  REQUIRE_THROWS_AS(multiplicity_probe(N, bad), ConfigError);
}
