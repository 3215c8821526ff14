#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "coexist/green.hpp"
#include "oracle_green.hpp"

using namespace coexist;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double max_deviation_from_oracle(const GreenKernel& g, double k, double T, bool positive) {
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double t = T * double(i) / double(g.n);
    for (int j = 0; j < g.n; ++j) {
      const double s = T * double(j) / double(g.n);
      const double ref = positive ? oracle::green_positive(k, T, t, s) : oracle::green_negative(k, T, t, s);
      worst = std::max(worst, std::fabs(g.at(i, j) - ref));
    }
  }
  return worst;
}
}  // namespace

TEST_CASE("constant positive kernel matches the closed form") {
  const double k = 1.0 / 3.0, T = kTwoPi;
  const GreenKernel g = build_green(HillCoefficient::constant(k * k), T, 512);

  REQUIRE(g.sign == +1);
  REQUIRE(max_deviation_from_oracle(g, k, T, true) <= 1e-6);

  REQUIRE(g.min_entry == Catch::Approx(oracle::min_positive(k, T)).margin(1e-7));
  REQUIRE(g.max_entry == Catch::Approx(oracle::max_positive(k, T)).margin(1e-7));
  REQUIRE(g.cone_ratio == Catch::Approx(oracle::cone_ratio_positive(k, T)).margin(1e-7));
  // And the frozen numbers for this configuration.
  REQUIRE(g.min_entry == Catch::Approx(0.8660254037844386).margin(1e-6));
  REQUIRE(g.max_entry == Catch::Approx(1.7320508075688772).margin(1e-6));
  REQUIRE(g.cone_ratio == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("constant negative kernel matches the closed form") {
  const double k = 1.0, T = kTwoPi;
  const GreenKernel g = build_green(HillCoefficient::constant(-1.0), T, 256);

  REQUIRE(g.sign == -1);
  REQUIRE(g.max_entry < 0.0);
  REQUIRE(max_deviation_from_oracle(g, k, T, false) <= 1e-6);
  REQUIRE(g.min_entry == Catch::Approx(oracle::min_negative(k, T)).margin(1e-7));
  REQUIRE(g.max_entry == Catch::Approx(oracle::max_negative(k, T)).margin(1e-7));
  REQUIRE(g.cone_ratio == Catch::Approx(1.0 / std::cosh(3.141592653589793)).margin(1e-7));
}

TEST_CASE("monodromy traces of constant problems") {
  const double T = kTwoPi;

  const FundamentalPair resonant = integrate_hill(HillCoefficient::constant(1.0), T, 512);
  REQUIRE(resonant.monodromy_trace() == Catch::Approx(2.0).margin(1e-6));
  REQUIRE_FALSE(is_nonresonant(resonant));

  const FundamentalPair fine = integrate_hill(HillCoefficient::constant(1.0 / 9.0), T, 512);
  REQUIRE(fine.monodromy_trace() == Catch::Approx(-1.0).margin(1e-6));
  REQUIRE(is_nonresonant(fine));

  const FundamentalPair hyper = integrate_hill(HillCoefficient::constant(-1.0), T, 512);
  REQUIRE(hyper.monodromy_trace() == Catch::Approx(oracle::trace_negative(1.0, T)).margin(1e-5));
}

TEST_CASE("unit Wronskian for constant and sampled coefficients") {
  const double T = kTwoPi;
  REQUIRE(integrate_hill(HillCoefficient::constant(1.0 / 9.0), T, 256).monodromy_det() ==
          Catch::Approx(1.0).margin(1e-8));
  REQUIRE(integrate_hill(HillCoefficient::constant(-2.0), T, 256).monodromy_det() ==
          Catch::Approx(1.0).margin(1e-8));

  const auto wavy = GridFunction::sample(T, 512, [](double t) { return 0.1 + 0.05 * std::sin(t); });
  REQUIRE(integrate_hill(HillCoefficient::sampled(wavy), T, 512).monodromy_det() ==
          Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("resonant coefficient is rejected") {
  REQUIRE_THROWS_AS(build_green(HillCoefficient::constant(1.0), kTwoPi, 128), ResonanceError);
  REQUIRE_NOTHROW(build_green(HillCoefficient::constant(1.0 / 9.0), kTwoPi, 128));
}

TEST_CASE("sign-changing kernel is rejected") {
  // kT in (pi, 2pi): nonresonant but the kernel genuinely changes sign.
  REQUIRE_THROWS_AS(build_green(HillCoefficient::constant(0.75 * 0.75), kTwoPi, 128), MixedSignError);
}

TEST_CASE("kernel is symmetric and positive for small constant coefficients") {
  const double T = kTwoPi;
  for (double k : {0.1, 0.25, 0.45}) {
    const GreenKernel g = build_green(HillCoefficient::constant(k * k), T, 128);
    REQUIRE(g.sign == +1);
    REQUIRE(g.min_entry > 0.0);
    double asym = 0.0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < i; ++j) asym = std::max(asym, std::fabs(g.at(i, j) - g.at(j, i)));
    REQUIRE(asym <= 1e-8);
  }
}

TEST_CASE("sampled constant coefficient reproduces the constant kernel") {
  const double T = kTwoPi;
  const int n = 128;
  const GreenKernel direct = build_green(HillCoefficient::constant(1.0 / 9.0), T, n);
  const GreenKernel viaSamples =
      build_green(HillCoefficient::sampled(GridFunction::constant(T, n, 1.0 / 9.0)), T, n);
  double dev = 0.0;
  for (std::size_t i = 0; i < direct.values.size(); ++i)
    dev = std::max(dev, std::fabs(direct.values[i] - viaSamples.values[i]));
  REQUIRE(dev <= 1e-12);
}

TEST_CASE("smooth sampled coefficient yields a one-signed kernel") {
  const double T = kTwoPi;
  const auto wavy = GridFunction::sample(T, 256, [](double t) { return 0.1 + 0.05 * std::sin(t); });
  const GreenKernel g = build_green(HillCoefficient::sampled(wavy), T, 256);
  REQUIRE(g.sign == +1);
  REQUIRE(g.min_entry > 0.0);
  REQUIRE(g.cone_ratio > 0.0);
  REQUIRE(g.cone_ratio < 1.0);
}

TEST_CASE("defect probe converges at second order") {
  // Forcing manufactured so that 9 + cos t solves z'' + z/9 = probe.
  const double T = kTwoPi;
  const HillCoefficient a = HillCoefficient::constant(1.0 / 9.0);
  const auto probe = [](double t) { return 1.0 - (8.0 / 9.0) * std::cos(t); };

  double res[3];
  int idx = 0;
  for (int n : {128, 256, 512}) {
    const GreenKernel g = build_green(a, T, n);
    res[idx++] = green_residual(g, a, GridFunction::sample(T, std::size_t(n), probe));
  }
  REQUIRE(res[1] <= 1e-2);
  const double ratio01 = res[0] / res[1];
  const double ratio12 = res[1] / res[2];
  REQUIRE(ratio01 >= 3.0);
  REQUIRE(ratio01 <= 5.0);
  REQUIRE(ratio12 >= 3.0);
  REQUIRE(ratio12 <= 5.0);

  // The quadrature solution itself should track the manufactured solution.
  const GreenKernel g = build_green(a, T, 256);
  const GridFunction x = apply_kernel(g, GridFunction::sample(T, 256, probe));
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    err = std::max(err, std::fabs(x[i] - (9.0 + std::cos(x.node(i)))));
  REQUIRE(err <= 5e-3);
}

TEST_CASE("grid preconditions are enforced") {
  REQUIRE_THROWS_AS(integrate_hill(HillCoefficient::constant(0.1), kTwoPi, 16), InputError);
  REQUIRE_THROWS_AS(integrate_hill(HillCoefficient::constant(0.1), kTwoPi, 33), InputError);
  REQUIRE_THROWS_AS(integrate_hill(HillCoefficient::constant(0.1), -1.0, 64), InputError);
  REQUIRE_NOTHROW(integrate_hill(HillCoefficient::constant(0.1), kTwoPi, 32));
}
