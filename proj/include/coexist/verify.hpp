#ifndef COEXIST_VERIFY_HPP
#define COEXIST_VERIFY_HPP

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "coexist/cone.hpp"
#include "coexist/errors.hpp"
#include "coexist/green.hpp"
#include "coexist/hammerstein.hpp"
#include "coexist/nonlinearity.hpp"

namespace coexist {

enum class BandKind { alpha, beta };
enum class GrowthMode { sub, super };

struct BandOptions {
  int density = 64;    // samples per axis (t, own variable, other variable)
  double slack = 1e-9; // strictness scale: pass needs margin >= slack * bound scale
  bool early_exit = false;
};

struct BandCheckReport {
  int component = 0;
  BandKind kind = BandKind::alpha;
  double radius = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  long samples = 0;
  bool pass = false;
  std::array<double, 3> worst{0.0, 0.0, 0.0};  // (t, own, other) attaining the margin
};

// Linear rate of the band bound: the alpha bound divides by the kernel entry
// of smaller magnitude (and by c), the beta bound by the entry of larger
// magnitude, for either kernel sign.
inline double band_bound_rate(const GreenKernel& K, BandKind kind) {
  const double T = K.period;
  if (K.sign > 0) {
    return kind == BandKind::alpha ? 1.0 / (K.min_entry * T * K.cone_ratio)
                                   : 1.0 / (K.max_entry * T);
  }
  return kind == BandKind::alpha ? 1.0 / (K.max_entry * T * K.cone_ratio)
                                 : 1.0 / (K.min_entry * T);
}

// Scans f over [0,T) x [c*radius, radius] x other_box and reports the worst
// slack of the band inequality. The inequality direction depends on the band
// and the kernel sign; margins are oriented so that positive means pass.
inline BandCheckReport check_band(const Nonlinearity& f, int comp, const GreenKernel& K,
                                  BandKind kind, double radius, std::array<double, 2> other_box,
                                  const BandOptions& opt = {}) {
  if (!(radius > 0.0)) throw InputError("band check: radius must be positive");
  if (!(other_box[0] <= other_box[1])) throw InputError("band check: bad box");
  if (comp < 0 || comp > 1) throw InputError("band check: component index out of range");
  if (opt.density < 2) throw InputError("band check: density too small");

  const double rate = band_bound_rate(K, kind);
  // s * (f - rate * own) >= 0 is the band inequality for all four cases.
  const double s = (kind == BandKind::alpha ? 1.0 : -1.0) * double(K.sign);
  const double scale = std::max(1.0, std::fabs(rate) * radius);
  const double eps = opt.slack * scale;

  BandCheckReport rep;
  rep.component = comp;
  rep.kind = kind;
  rep.radius = radius;

  const double T = K.period;
  const int d = opt.density;
  const double own_lo = K.cone_ratio * radius;
  for (int it = 0; it < d; ++it) {
    const double t = T * it / d;
    for (int io = 0; io <= d; ++io) {
      const double own = own_lo + (radius - own_lo) * io / d;
      for (int ix = 0; ix <= d; ++ix) {
        const double other = other_box[0] + (other_box[1] - other_box[0]) * ix / d;
        const double x1 = comp == 0 ? own : other;
        const double x2 = comp == 0 ? other : own;
        const double diff = s * (f.raw(t, x1, x2) - rate * own);
        ++rep.samples;
        if (diff < rep.min_margin) {
          rep.min_margin = diff;
          rep.worst = {t, own, other};
          if (opt.early_exit && diff < eps) {
            rep.pass = false;
            return rep;
          }
        }
      }
    }
  }
  rep.pass = rep.min_margin >= eps;
  return rep;
}

inline BandCheckReport check_alpha_band(const Nonlinearity& f, int comp, const GreenKernel& K,
                                        double radius, std::array<double, 2> other_box,
                                        const BandOptions& opt = {}) {
  return check_band(f, comp, K, BandKind::alpha, radius, other_box, opt);
}

inline BandCheckReport check_beta_band(const Nonlinearity& f, int comp, const GreenKernel& K,
                                       double radius, std::array<double, 2> other_box,
                                       const BandOptions& opt = {}) {
  return check_band(f, comp, K, BandKind::beta, radius, other_box, opt);
}

// The negative-kernel variant: same sampling, with the inequality directions
// flipped by the kernel sign (which check_band dispatches on). Split out so
// callers state which regime they are in; rejects a positive kernel.
inline BandCheckReport check_negative_bands(const Nonlinearity& f, int comp, const GreenKernel& K,
                                            BandKind kind, double radius,
                                            std::array<double, 2> other_box,
                                            const BandOptions& opt = {}) {
  if (K.sign >= 0) throw InputError("negative band check: kernel is not negative");
  return check_band(f, comp, K, kind, radius, other_box, opt);
}

struct SweepOptions {
  double lo = 1e-4;
  double hi = 1e6;
  double ratio = 2.0;
  int sweep_density = 32;  // early-exit scans while sweeping candidates
  int max_rounds = 20;
  BandOptions confirm{};   // full scan of the chosen radii
};

struct RadiiCertificate {
  bool found = false;
  std::array<double, 2> alpha{0.0, 0.0};
  std::array<double, 2> beta{0.0, 0.0};
  std::array<GrowthMode, 2> mode{GrowthMode::sub, GrowthMode::sub};
  ShellBounds shell;
  std::array<BandCheckReport, 2> alpha_report{};
  std::array<BandCheckReport, 2> beta_report{};
  int rounds = 0;
  // Best margins seen during the sweep; meaningful diagnostics when !found.
  std::array<double, 2> best_alpha_margin{-std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity()};
  std::array<double, 2> best_beta_margin{-std::numeric_limits<double>::infinity(),
                                         -std::numeric_limits<double>::infinity()};
};

// Geometric sweep for radii alpha_i, beta_i making both band inequalities
// hold, alternating between the components because each check boxes the
// other component by its current shell. Sub mode seeks alpha < beta
// (compression), super mode beta < alpha (expansion). Radii are confirmed by
// a full-density scan before the certificate is issued.
inline RadiiCertificate find_radii(const ProblemSpec& spec,
                                   const std::array<std::shared_ptr<const GreenKernel>, 2>& kernels,
                                   std::array<GrowthMode, 2> modes, const SweepOptions& opt = {}) {
  if (!(opt.lo > 0.0) || !(opt.hi / opt.lo >= 100.0)) {
    throw InputError("radius sweep: need lo > 0 and hi/lo >= 100");
  }
  if (!(opt.ratio > 1.0)) throw InputError("radius sweep: ratio must exceed 1");

  std::vector<double> candidates;
  for (double c = opt.lo; c <= opt.hi * (1.0 + 1e-12); c *= opt.ratio) candidates.push_back(c);

  RadiiCertificate out;
  out.mode = modes;

  std::array<std::optional<double>, 2> alpha{}, beta{};
  std::array<std::array<double, 2>, 2> boxes;
  for (int j = 0; j < 2; ++j) boxes[j] = {kernels[j]->cone_ratio * opt.lo, opt.hi};

  BandOptions sweep;
  sweep.density = opt.sweep_density;
  sweep.early_exit = true;

  for (int round = 1; round <= opt.max_rounds; ++round) {
    out.rounds = round;
    bool changed = false;
    for (int i = 0; i < 2; ++i) {
      const int other = 1 - i;
      std::vector<double> pass_a, pass_b;
      for (double cand : candidates) {
        auto scan = [&](BandKind kind, std::vector<double>& sink, double& best) {
          try {
            BandCheckReport rep = check_band(spec.f[i], i, *kernels[i], kind, cand, boxes[other], sweep);
            best = std::max(best, rep.min_margin);
            if (rep.pass) sink.push_back(cand);
          } catch (const EvaluationError&) {
            // a candidate whose band cannot even be evaluated cannot pass
          }
        };
        scan(BandKind::alpha, pass_a, out.best_alpha_margin[i]);
        scan(BandKind::beta, pass_b, out.best_beta_margin[i]);
      }
      std::optional<double> a, b;
      if (modes[i] == GrowthMode::sub) {
        if (!pass_b.empty()) b = pass_b.front();  // smallest passing beta
        if (b) {
          for (double v : pass_a) {
            if (v < *b) a = v;  // largest passing alpha below beta
          }
        }
      } else {
        if (!pass_a.empty()) a = pass_a.front();  // smallest passing alpha
        if (a) {
          for (double v : pass_b) {
            if (v < *a) b = v;  // largest passing beta below alpha
          }
        }
      }
      if (a != alpha[i] || b != beta[i]) changed = true;
      alpha[i] = a;
      beta[i] = b;
    }
    for (int j = 0; j < 2; ++j) {
      if (alpha[j] && beta[j]) {
        const double rj = std::min(*alpha[j], *beta[j]);
        const double Rj = std::max(*alpha[j], *beta[j]);
        boxes[j] = {kernels[j]->cone_ratio * rj, Rj};
      }
    }
    if (!changed) break;
  }

  if (!alpha[0] || !beta[0] || !alpha[1] || !beta[1]) return out;

  for (int i = 0; i < 2; ++i) {
    out.alpha[i] = *alpha[i];
    out.beta[i] = *beta[i];
    out.shell.r[i] = std::min(out.alpha[i], out.beta[i]);
    out.shell.R[i] = std::max(out.alpha[i], out.beta[i]);
  }
  out.found = true;
  for (int i = 0; i < 2; ++i) {
    const int other = 1 - i;
    const std::array<double, 2> box{kernels[other]->cone_ratio * out.shell.r[other],
                                    out.shell.R[other]};
    out.alpha_report[i] =
        check_band(spec.f[i], i, *kernels[i], BandKind::alpha, out.alpha[i], box, opt.confirm);
    out.beta_report[i] =
        check_band(spec.f[i], i, *kernels[i], BandKind::beta, out.beta[i], box, opt.confirm);
    if (!out.alpha_report[i].pass || !out.beta_report[i].pass) out.found = false;
    out.best_alpha_margin[i] = std::max(out.best_alpha_margin[i], out.alpha_report[i].min_margin);
    out.best_beta_margin[i] = std::max(out.best_beta_margin[i], out.beta_report[i].min_margin);
  }
  return out;
}

// Behavior tag induced by the certified radii.
inline GrowthMode behavior_tag(const RadiiCertificate& cert, int comp) {
  return cert.alpha[comp] < cert.beta[comp] ? GrowthMode::sub : GrowthMode::super;
}

}  // namespace coexist

#endif
