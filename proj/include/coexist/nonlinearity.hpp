#ifndef COEXIST_NONLINEARITY_HPP
#define COEXIST_NONLINEARITY_HPP

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "coexist/errors.hpp"

namespace coexist {

using ScalarField = std::function<double(double, double, double)>;  // (t, x, y)

// Right-hand side f_i(t, x, y) of one component, with its declared sign and
// an optional singular structure
//   f(t,x,y) = sign * ( factor(t,x,y) / v^exponent + perturbation(t,x,y) ),
// where v is the component's own variable. The factor must stay positive and
// the perturbation nonnegative; the declared sign then matches the kernel
// sign the component is paired with.
struct Nonlinearity {
  ScalarField fn;  // plain form; unused when singular
  int sign = +1;   // +1 nonnegative values, -1 nonpositive values

  bool singular = false;
  int own = 0;              // index of the variable carrying the singularity (0 = x, 1 = y)
  double exponent = 0.0;    // > 0
  ScalarField factor;       // g(t,x,y) > 0
  ScalarField perturbation; // h(t,x,y) >= 0, may be null (= 0)

  static Nonlinearity plain(ScalarField f, int sign) {
    Nonlinearity n;
    n.fn = std::move(f);
    n.sign = sign;
    return n;
  }

  static Nonlinearity singular_form(int own, double exponent, ScalarField factor,
                                    ScalarField perturbation, int sign) {
    if (!(exponent > 0.0)) throw InputError("nonlinearity: singular exponent must be positive");
    if (own < 0 || own > 1) throw InputError("nonlinearity: singular variable index out of range");
    Nonlinearity n;
    n.sign = sign;
    n.singular = true;
    n.own = own;
    n.exponent = exponent;
    n.factor = std::move(factor);
    n.perturbation = std::move(perturbation);
    return n;
  }

  double raw(double t, double x, double y) const {
    if (!singular) return fn(t, x, y);
    const double v = own == 0 ? x : y;
    if (v <= 0.0) throw EvaluationError("nonlinearity: singular term evaluated at a nonpositive argument");
    const double g = factor(t, x, y);
    const double h = perturbation ? perturbation(t, x, y) : 0.0;
    return double(sign) * (g / std::pow(v, exponent) + h);
  }
};

// Evaluates f at the point whose singular variable is floored at `floor`;
// counts every engaged clamp. A floor of zero is the raw evaluation.
inline double evaluate_singular(const Nonlinearity& f, double t, double x, double y, double floor,
                                long* clamp_events = nullptr) {
  if (f.singular && floor > 0.0) {
    double& v = (f.own == 0) ? x : y;
    if (v < floor) {
      v = floor;
      if (clamp_events != nullptr) ++*clamp_events;
    }
  }
  return f.raw(t, x, y);
}

// Sample region for the construction-time sign check.
struct SampleBox {
  std::array<double, 2> x{1e-2, 1e2};
  std::array<double, 2> y{1e-2, 1e2};
};

// Randomized check that evaluations respect the declared sign (and the
// structural sign constraints of the singular form) over the box.
inline void validate_sign(const Nonlinearity& f, double period, const SampleBox& box = {},
                          int samples = 256, unsigned seed = 916842u) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, period);
  std::uniform_real_distribution<double> ux(box.x[0], box.x[1]);
  std::uniform_real_distribution<double> uy(box.y[0], box.y[1]);
  for (int k = 0; k < samples; ++k) {
    const double t = ut(rng), x = ux(rng), y = uy(rng);
    const double v = f.raw(t, x, y);
    if (double(f.sign) * v < -1e-9 * (1.0 + std::fabs(v))) {
      throw MixedSignError("nonlinearity: sampled value of sign opposite to the declared one");
    }
    if (f.singular) {
      if (!(f.factor(t, x, y) > 0.0)) {
        throw MixedSignError("nonlinearity: singular factor must stay positive");
      }
      if (f.perturbation && f.perturbation(t, x, y) < 0.0) {
        throw MixedSignError("nonlinearity: singular perturbation must be nonnegative");
      }
    }
  }
}

}  // namespace coexist

#endif
