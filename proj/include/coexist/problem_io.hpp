#ifndef COEXIST_PROBLEM_IO_HPP
#define COEXIST_PROBLEM_IO_HPP

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coexist/errors.hpp"
#include "coexist/expr.hpp"
#include "coexist/green.hpp"
#include "coexist/hammerstein.hpp"
#include "coexist/verify.hpp"

namespace coexist {

// On-disk problem description. Everything the pipeline needs lives in one
// JSON document; expressions stay as source text so a written file re-parses
// to an identical description (round-trip identity).
struct SingularBlock {
  double exponent = 0.0;
  std::string factor;        // bounded positive factor, expression in t and the other variable
  std::string perturbation;  // nonnegative remainder term

  friend bool operator==(const SingularBlock&, const SingularBlock&) = default;
};

struct ComponentDesc {
  bool coeff_constant = true;
  double coeff_value = 0.0;
  std::vector<double> coeff_samples;
  std::string nonlinearity;
  int sign = +1;
  std::optional<SingularBlock> singular;

  friend bool operator==(const ComponentDesc&, const ComponentDesc&) = default;
};

struct CliProblem {
  double period = 0.0;
  int grid = 256;
  std::array<ComponentDesc, 2> comp{};
  std::optional<std::array<double, 2>> alpha;  // explicit radii, both or neither
  std::optional<std::array<double, 2>> beta;
  std::optional<std::array<double, 2>> search;  // radius sweep range {lo, hi}
  double residual_tol = 1e-8;

  friend bool operator==(const CliProblem&, const CliProblem&) = default;
};

namespace io_detail {

inline double need_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParseError(std::string("problem file: missing numeric key '") + key + "'");
  }
  return j[key].get<double>();
}

inline std::string need_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ParseError(std::string("problem file: missing string key '") + key + "'");
  }
  return j[key].get<std::string>();
}

inline std::array<double, 2> need_pair(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2) {
    throw ParseError(std::string("problem file: key '") + key + "' must be a pair");
  }
  return {j[key][0].get<double>(), j[key][1].get<double>()};
}

// Expressions must evaluate finite on a probe grid before any run.
inline void probe_expression(const Expression& e, double period) {
  const double probes[] = {0.1, 1.0, 10.0};
  for (int k = 0; k < 4; ++k) {
    const double t = period * double(k) / 4.0;
    for (double x : probes) {
      for (double y : probes) {
        try {
          (void)e(t, x, y);
        } catch (const EvaluationError& err) {
          throw ParseError(std::string("problem file: expression '") + e.source() +
                           "' does not evaluate on the probe grid: " + err.what());
        }
      }
    }
  }
}

inline ScalarField field_of(const Expression& e) {
  return [e](double t, double x, double y) { return e(t, x, y); };
}

}  // namespace io_detail

inline CliProblem parse_problem_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }

  CliProblem p;
  p.period = io_detail::need_number(j, "period");
  if (!(p.period > 0.0)) throw ParseError("problem file: period must be positive");

  if (j.contains("grid")) {
    if (!j["grid"].is_number_integer()) throw ParseError("problem file: grid must be an integer");
    p.grid = j["grid"].get<int>();
    if (p.grid < 32) throw ParseError("problem file: grid must be at least 32");
  }

  if (!j.contains("components") || !j["components"].is_array() || j["components"].size() != 2) {
    throw ParseError("problem file: 'components' must be an array of two entries");
  }
  for (int i = 0; i < 2; ++i) {
    const auto& cj = j["components"][std::size_t(i)];
    ComponentDesc& c = p.comp[std::size_t(i)];

    if (!cj.contains("coefficient")) throw ParseError("problem file: component lacks 'coefficient'");
    const auto& co = cj["coefficient"];
    if (co.is_number()) {
      c.coeff_constant = true;
      c.coeff_value = co.get<double>();
    } else if (co.is_object() && co.contains("samples") && co["samples"].is_array()) {
      c.coeff_constant = false;
      for (const auto& v : co["samples"]) {
        if (!v.is_number()) throw ParseError("problem file: coefficient samples must be numbers");
        c.coeff_samples.push_back(v.get<double>());
      }
      if (c.coeff_samples.size() < 4) {
        throw ParseError("problem file: coefficient sample array too short");
      }
    } else {
      throw ParseError("problem file: coefficient must be a number or {\"samples\": [...]}");
    }

    c.nonlinearity = io_detail::need_string(cj, "nonlinearity");
    io_detail::probe_expression(Expression::parse(c.nonlinearity), p.period);

    if (!cj.contains("sign") || !cj["sign"].is_number_integer()) {
      throw ParseError("problem file: component lacks integer 'sign'");
    }
    c.sign = cj["sign"].get<int>();
    if (c.sign != 1 && c.sign != -1) throw ParseError("problem file: sign must be +1 or -1");

    if (cj.contains("singular")) {
      const auto& sj = cj["singular"];
      SingularBlock sb;
      sb.exponent = io_detail::need_number(sj, "exponent");
      if (!(sb.exponent > 0.0)) throw ParseError("problem file: singular exponent must be positive");
      sb.factor = io_detail::need_string(sj, "factor");
      sb.perturbation = io_detail::need_string(sj, "perturbation");
      io_detail::probe_expression(Expression::parse(sb.factor), p.period);
      io_detail::probe_expression(Expression::parse(sb.perturbation), p.period);

      // The structural decomposition must describe the same function the
      // nonlinearity expression shows, so the file cannot lie to the solver.
      const Expression shown = Expression::parse(c.nonlinearity);
      const Expression fg = Expression::parse(sb.factor);
      const Expression fh = Expression::parse(sb.perturbation);
      const double probes[] = {0.1, 1.0, 10.0};
      for (int k = 0; k < 4; ++k) {
        const double t = p.period * double(k) / 4.0;
        for (double x : probes) {
          for (double y : probes) {
            const double own = i == 0 ? x : y;
            const double structural =
                double(c.sign) * (fg(t, x, y) / std::pow(own, sb.exponent) + fh(t, x, y));
            if (std::fabs(shown(t, x, y) - structural) > 1e-9 * (1.0 + std::fabs(structural))) {
              throw ParseError("problem file: singular structure disagrees with the "
                               "nonlinearity expression");
            }
          }
        }
      }
      c.singular = sb;
    }
  }

  if (j.contains("radii")) {
    const auto& rj = j["radii"];
    p.alpha = io_detail::need_pair(rj, "alpha");
    p.beta = io_detail::need_pair(rj, "beta");
    for (int i = 0; i < 2; ++i) {
      if (!((*p.alpha)[std::size_t(i)] > 0.0) || !((*p.beta)[std::size_t(i)] > 0.0)) {
        throw ParseError("problem file: radii must be positive");
      }
      if ((*p.alpha)[std::size_t(i)] == (*p.beta)[std::size_t(i)]) {
        throw ParseError("problem file: radii must be distinct per component");
      }
    }
  }
  if (j.contains("search")) {
    p.search = io_detail::need_pair(j, "search");
    if (!((*p.search)[0] > 0.0) || !((*p.search)[1] / (*p.search)[0] >= 100.0)) {
      throw ParseError("problem file: search range needs 0 < lo and hi/lo >= 100");
    }
  }
  if (j.contains("tolerances")) {
    p.residual_tol = io_detail::need_number(j["tolerances"], "residual");
    if (!(p.residual_tol > 0.0)) throw ParseError("problem file: residual tolerance must be positive");
  }
  return p;
}

inline CliProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("problem file: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

inline std::string write_problem(const CliProblem& p) {
  nlohmann::ordered_json j;
  j["period"] = p.period;
  j["grid"] = p.grid;
  j["components"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 2; ++i) {
    const ComponentDesc& c = p.comp[std::size_t(i)];
    nlohmann::ordered_json cj;
    if (c.coeff_constant) {
      cj["coefficient"] = c.coeff_value;
    } else {
      cj["coefficient"] = nlohmann::ordered_json{{"samples", c.coeff_samples}};
    }
    cj["nonlinearity"] = c.nonlinearity;
    cj["sign"] = c.sign;
    if (c.singular) {
      cj["singular"] = nlohmann::ordered_json{{"exponent", c.singular->exponent},
                                              {"factor", c.singular->factor},
                                              {"perturbation", c.singular->perturbation}};
    }
    j["components"].push_back(cj);
  }
  if (p.alpha && p.beta) {
    j["radii"] = nlohmann::ordered_json{{"alpha", *p.alpha}, {"beta", *p.beta}};
  }
  if (p.search) j["search"] = *p.search;
  j["tolerances"] = nlohmann::ordered_json{{"residual", p.residual_tol}};
  return j.dump(2) + "\n";
}

// ---- compiled problem -------------------------------------------------

inline HillCoefficient coefficient_of(const ComponentDesc& c, double period) {
  if (c.coeff_constant) return HillCoefficient::constant(c.coeff_value);
  return HillCoefficient::sampled(GridFunction(period, c.coeff_samples));
}

inline Nonlinearity nonlinearity_of(const ComponentDesc& c, int comp) {
  const Expression main = Expression::parse(c.nonlinearity);
  if (!c.singular) return Nonlinearity::plain(io_detail::field_of(main), c.sign);
  const Expression g = Expression::parse(c.singular->factor);
  const Expression h = Expression::parse(c.singular->perturbation);
  return Nonlinearity::singular_form(comp, c.singular->exponent, io_detail::field_of(g),
                                     io_detail::field_of(h), c.sign);
}

inline ProblemSpec build_spec(const CliProblem& p, int n_override = 0) {
  ProblemSpec s;
  s.period = p.period;
  s.n = n_override > 0 ? n_override : p.grid;
  for (int i = 0; i < 2; ++i) {
    s.coeff[std::size_t(i)] = coefficient_of(p.comp[std::size_t(i)], p.period);
    s.f[std::size_t(i)] = nonlinearity_of(p.comp[std::size_t(i)], i);
  }
  return s;
}

// ---- reports -----------------------------------------------------------

namespace io_detail {

inline nlohmann::ordered_json band_json(const BandCheckReport& rep) {
  return nlohmann::ordered_json{
      {"component", rep.component},
      {"kind", rep.kind == BandKind::alpha ? "alpha" : "beta"},
      {"radius", rep.radius},
      {"min_margin", rep.min_margin},
      {"samples", rep.samples},
      {"pass", rep.pass},
      {"worst", rep.worst},
  };
}

}  // namespace io_detail

inline std::string green_report(const ProblemSpec& spec,
                                const std::array<std::shared_ptr<const GreenKernel>, 2>& kernels) {
  nlohmann::ordered_json j;
  j["period"] = spec.period;
  j["grid"] = spec.n;
  j["components"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 2; ++i) {
    const GreenKernel& K = *kernels[std::size_t(i)];
    // Constant-forcing probe: residual of the reconstructed solution.
    const double resid = green_residual(K, spec.coeff[std::size_t(i)],
                                        GridFunction::constant(K.period, K.n, 1.0));
    j["components"].push_back(nlohmann::ordered_json{
        {"min_entry", K.min_entry},
        {"max_entry", K.max_entry},
        {"cone_ratio", K.cone_ratio},
        {"sign", K.sign},
        {"trace", K.trace},
        {"probe_residual", resid},
    });
  }
  return j.dump(2) + "\n";
}

inline std::string kernel_csv(const std::array<std::shared_ptr<const GreenKernel>, 2>& kernels) {
  std::string out = "component,t_row,t_col,value\n";
  char line[128];
  for (int c = 0; c < 2; ++c) {
    const GreenKernel& K = *kernels[std::size_t(c)];
    const double h = K.step();
    for (int i = 0; i < K.n; ++i) {
      for (int j = 0; j < K.n; ++j) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", c, h * i, h * j, K.at(i, j));
        out += line;
      }
    }
  }
  return out;
}

inline std::string verify_report(const RadiiCertificate& cert) {
  nlohmann::ordered_json j;
  j["certified"] = cert.found;
  j["rounds"] = cert.rounds;
  j["components"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 2; ++i) {
    const auto iz = std::size_t(i);
    nlohmann::ordered_json cj;
    cj["behavior"] = behavior_tag(cert, i) == GrowthMode::sub ? "compressive" : "expansive";
    cj["alpha"] = cert.alpha[iz];
    cj["beta"] = cert.beta[iz];
    cj["shell"] = std::array<double, 2>{cert.shell.r[iz], cert.shell.R[iz]};
    cj["alpha_band"] = io_detail::band_json(cert.alpha_report[iz]);
    cj["beta_band"] = io_detail::band_json(cert.beta_report[iz]);
    cj["best_alpha_margin"] = cert.best_alpha_margin[iz];
    cj["best_beta_margin"] = cert.best_beta_margin[iz];
    j["components"].push_back(cj);
  }
  return j.dump(2) + "\n";
}

inline std::string solve_report(const SolveResult& res, const ShellBounds& shell) {
  nlohmann::ordered_json j;
  j["success"] = res.success;
  j["residual"] = res.residual;
  j["norms"] = res.norms;
  j["shell"] = nlohmann::ordered_json{{"r", shell.r}, {"R", shell.R}};
  j["localized"] = res.localized;
  j["cone_ok"] = res.cone_ok;
  j["clamp_activity"] = res.clamp_activity;
  j["iterations"] = res.iterations;
  j["rescale_events"] = res.rescale_events;
  j["strategy"] = res.strategy;
  j["expansive"] = res.expansive;
  return j.dump(2) + "\n";
}

// CSV of a solution pair over one closed period: the last row repeats the
// first value at t = T.
inline std::string solution_csv(const GridPair& u) {
  std::string out = "t,x(t),y(t)\n";
  const std::size_t n = u[0].size();
  char line[128];
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t k = i % n;
    const double t = i == n ? u[0].period : u[0].node(k);
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", t, u[0].values[k], u[1].values[k]);
    out += line;
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file '" + path + "'");
  out << text;
}

}  // namespace coexist

#endif
