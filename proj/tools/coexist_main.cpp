// Batch front end: parse a problem file, run the kernel / certificate /
// solver pipeline or one of the planar index suites, and write reports.
//
// Exit codes are a total function of the outcome class:
//   0 success        2 parse failure      3 resonant coefficient
//   4 sign violation 5 no certificate     6 no convergence
//   7 suite mismatch 1 unexpected failure

#include <array>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coexist/errors.hpp"
#include "coexist/expr.hpp"
#include "coexist/green.hpp"
#include "coexist/hammerstein.hpp"
#include "coexist/indexlab.hpp"
#include "coexist/problem_io.hpp"
#include "coexist/verify.hpp"

namespace {

using namespace coexist;

using KernelPair = std::array<std::shared_ptr<const GreenKernel>, 2>;

KernelPair build_kernels(const ProblemSpec& spec) {
  KernelPair k;
  for (int i = 0; i < 2; ++i) {
    k[std::size_t(i)] = std::make_shared<const GreenKernel>(
        build_green(spec.coeff[std::size_t(i)], spec.period, spec.n));
  }
  return k;
}

// The declared nonlinearity sign must match the kernel sign it is paired
// with; otherwise the integral operator leaves the positive functions.
void check_signs(const ProblemSpec& spec, const KernelPair& kernels) {
  for (int i = 0; i < 2; ++i) {
    const auto iz = std::size_t(i);
    if (spec.f[iz].sign != kernels[iz]->sign) {
      throw MixedSignError("component " + std::to_string(i + 1) +
                           ": nonlinearity sign does not match the kernel sign");
    }
    validate_sign(spec.f[iz], spec.period);
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

int cmd_green(const std::string& problem_path, const std::string& out_path,
              const std::string& csv_path, int n_override) {
  const CliProblem p = load_problem(problem_path);
  const ProblemSpec spec = build_spec(p, n_override);
  const KernelPair kernels = build_kernels(spec);
  emit(green_report(spec, kernels), out_path);
  if (!csv_path.empty()) write_text(csv_path, kernel_csv(kernels));
  return 0;
}

// Certificate from explicit radii: re-run the four band checks at the given
// radii and report the margins as-is.
RadiiCertificate check_explicit_radii(const ProblemSpec& spec, const KernelPair& kernels,
                                      std::array<double, 2> alpha, std::array<double, 2> beta,
                                      const BandOptions& opt) {
  RadiiCertificate cert;
  cert.alpha = alpha;
  cert.beta = beta;
  for (int i = 0; i < 2; ++i) {
    const auto iz = std::size_t(i);
    cert.shell.r[iz] = std::min(alpha[iz], beta[iz]);
    cert.shell.R[iz] = std::max(alpha[iz], beta[iz]);
    cert.mode[iz] = alpha[iz] < beta[iz] ? GrowthMode::sub : GrowthMode::super;
  }
  cert.found = true;
  for (int i = 0; i < 2; ++i) {
    const auto iz = std::size_t(i);
    const auto jz = std::size_t(1 - i);
    const std::array<double, 2> box{kernels[jz]->cone_ratio * cert.shell.r[jz],
                                    cert.shell.R[jz]};
    try {
      cert.alpha_report[iz] =
          check_alpha_band(spec.f[iz], i, *kernels[iz], alpha[iz], box, opt);
      cert.beta_report[iz] = check_beta_band(spec.f[iz], i, *kernels[iz], beta[iz], box, opt);
    } catch (const EvaluationError& e) {
      throw ParseError(std::string("band check could not evaluate the nonlinearity: ") + e.what());
    }
    cert.best_alpha_margin[iz] = cert.alpha_report[iz].min_margin;
    cert.best_beta_margin[iz] = cert.beta_report[iz].min_margin;
    if (!cert.alpha_report[iz].pass || !cert.beta_report[iz].pass) cert.found = false;
  }
  return cert;
}

RadiiCertificate certificate_for(const CliProblem& p, const ProblemSpec& spec,
                                 const KernelPair& kernels, int density, double search_lo,
                                 double search_hi) {
  BandOptions confirm;
  if (density > 0) confirm.density = density;
  if (p.alpha && p.beta) {
    return check_explicit_radii(spec, kernels, *p.alpha, *p.beta, confirm);
  }
  SweepOptions opt;
  opt.confirm = confirm;
  if (p.search) {
    opt.lo = (*p.search)[0];
    opt.hi = (*p.search)[1];
  }
  if (search_lo > 0.0) opt.lo = search_lo;
  if (search_hi > 0.0) opt.hi = search_hi;

  // The growth mode per component is an outcome, not an input: try the four
  // combinations in a fixed order and keep the first full certificate. A
  // wrong guess fails fast because its band pass-sets cannot nest.
  RadiiCertificate best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (GrowthMode m0 : {GrowthMode::sub, GrowthMode::super}) {
    for (GrowthMode m1 : {GrowthMode::sub, GrowthMode::super}) {
      const RadiiCertificate cert = find_radii(spec, kernels, {m0, m1}, opt);
      if (cert.found) return cert;
      const double score = cert.best_alpha_margin[0] + cert.best_alpha_margin[1] +
                           cert.best_beta_margin[0] + cert.best_beta_margin[1];
      if (score > best_score) {
        best_score = score;
        best = cert;
      }
    }
  }
  return best;
}

int cmd_verify(const std::string& problem_path, const std::string& out_path, int n_override,
               int density, double search_lo, double search_hi) {
  const CliProblem p = load_problem(problem_path);
  const ProblemSpec spec = build_spec(p, n_override);
  const KernelPair kernels = build_kernels(spec);
  check_signs(spec, kernels);
  const RadiiCertificate cert = certificate_for(p, spec, kernels, density, search_lo, search_hi);
  emit(verify_report(cert), out_path);
  if (!cert.found) {
    std::cerr << "no certificate: best margins alpha = (" << cert.best_alpha_margin[0] << ", "
              << cert.best_alpha_margin[1] << "), beta = (" << cert.best_beta_margin[0] << ", "
              << cert.best_beta_margin[1] << ")\n";
    return 5;
  }
  return 0;
}

int cmd_solve(const std::string& problem_path, const std::string& out_path,
              const std::string& report_path, int n_override, double tol) {
  const CliProblem p = load_problem(problem_path);
  const ProblemSpec spec = build_spec(p, n_override);
  const KernelPair kernels = build_kernels(spec);
  check_signs(spec, kernels);

  // Explicit radii define the shell directly; without them the shell comes
  // from a certified radius sweep.
  ShellBounds shell;
  std::array<bool, 2> expansive{false, false};
  if (p.alpha && p.beta) {
    for (int i = 0; i < 2; ++i) {
      const auto iz = std::size_t(i);
      shell.r[iz] = std::min((*p.alpha)[iz], (*p.beta)[iz]);
      shell.R[iz] = std::max((*p.alpha)[iz], (*p.beta)[iz]);
      expansive[iz] = (*p.beta)[iz] < (*p.alpha)[iz];
    }
  } else {
    const RadiiCertificate cert = certificate_for(p, spec, kernels, 0, 0.0, 0.0);
    if (!cert.found) {
      std::cerr << "no certificate: best margins alpha = (" << cert.best_alpha_margin[0] << ", "
                << cert.best_alpha_margin[1] << "), beta = (" << cert.best_beta_margin[0] << ", "
                << cert.best_beta_margin[1] << ")\n";
      return 5;
    }
    shell = cert.shell;
    expansive = {cert.mode[0] == GrowthMode::super, cert.mode[1] == GrowthMode::super};
  }

  SolverConfig cfg;
  cfg.residual_tol = tol > 0.0 ? tol : p.residual_tol;
  const SolveResult res = solve_fixed_point(spec, kernels, shell, expansive, cfg);

  write_text(out_path, solution_csv(res.solution));
  emit(solve_report(res, shell), report_path);
  if (!res.success) {
    std::cerr << "no certified solution: residual " << res.residual << " after " << res.iterations
              << " iterations (best iterate written to " << out_path << ")\n";
    return 6;
  }
  return 0;
}

// ---- index suites --------------------------------------------------------

std::function<double(double)> profile_of(const std::string& text) {
  const Expression e = Expression::parse(text);
  return [e](double s) { return e(0.0, s, 0.0); };
}

PlanarMap planar_of(const std::string& fx, const std::string& fy) {
  const Expression ex = Expression::parse(fx);
  const Expression ey = Expression::parse(fy);
  return PlanarMap::general(
      [ex, ey](Point2 p) -> Point2 { return {ex(0.0, p[0], p[1]), ey(0.0, p[0], p[1])}; });
}

nlohmann::json load_fixture(const std::string& dir, const std::string& suite) {
  const std::string path = dir + "/" + suite + ".json";
  std::ifstream in(path);
  if (!in) throw ParseError("fixture file: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fixture file: ") + e.what());
  }
  return j;
}

struct SuiteOutcome {
  int checked = 0;
  std::vector<std::string> failures;

  void expect(const std::string& name, int expected, int computed) {
    ++checked;
    std::printf("  %-28s expected %3d   computed %3d   %s\n", name.c_str(), expected, computed,
                expected == computed ? "ok" : "MISMATCH");
    if (expected != computed) {
      failures.push_back(name + ": expected " + std::to_string(expected) + ", computed " +
                         std::to_string(computed));
    }
  }
};

void run_ledger_case(const nlohmann::json& cj, bool shell_only, int steps, SuiteOutcome& out) {
  const std::string name = cj.at("name").get<std::string>();
  PlanarMap N = PlanarMap::separable(profile_of(cj.at("profiles")[0].get<std::string>()),
                                     profile_of(cj.at("profiles")[1].get<std::string>()));
  const std::array<double, 2> r{cj.at("inner")[0].get<double>(), cj.at("inner")[1].get<double>()};
  const std::array<double, 2> R{cj.at("outer")[0].get<double>(), cj.at("outer")[1].get<double>()};
  const IndexLedger led = ledger_check(N, r, R, steps);
  if (shell_only) {
    out.expect(name + " shell", cj.at("expected_shell").get<int>(), led.shell);
    return;
  }
  const auto& exp = cj.at("expected");
  out.expect(name + " outer", exp[0].get<int>(), led.outer);
  out.expect(name + " inner", exp[1].get<int>(), led.inner);
  out.expect(name + " low-second", exp[2].get<int>(), led.low_second);
  out.expect(name + " low-first", exp[3].get<int>(), led.low_first);
  out.expect(name + " shell", exp[4].get<int>(), led.shell);
}

int cmd_indexlab(const std::string& suite, const std::string& fixture_dir, int steps) {
  const nlohmann::json j = load_fixture(fixture_dir, suite);
  SuiteOutcome out;
  std::printf("suite %s\n", suite.c_str());

  if (suite == "ledger" || suite == "signs") {
    for (const auto& cj : j.at("cases")) run_ledger_case(cj, suite == "signs", steps, out);
  } else if (suite == "multiplicity") {
    PlanarMap N = PlanarMap::separable(profile_of(j.at("profile").get<std::string>()),
                                       profile_of(j.at("profile").get<std::string>()));
    std::array<Rect, 3> shells;
    for (int k = 0; k < 3; ++k) {
      const auto& sj = j.at("shells")[std::size_t(k)];
      shells[std::size_t(k)].a = {sj[0].get<double>(), sj[0].get<double>()};
      shells[std::size_t(k)].b = {sj[1].get<double>(), sj[1].get<double>()};
    }
    const MultiplicityReport rep = multiplicity_probe(N, shells, steps);
    const auto& degrees = j.at("expected_degrees");
    for (int k = 0; k < 3; ++k) {
      out.expect("shell " + std::to_string(k + 1) + " degree", degrees[std::size_t(k)].get<int>(),
                 rep.degree[std::size_t(k)]);
    }
    out.expect("remainder degree", j.at("expected_remainder").get<int>(), rep.remainder);
    const auto& pts = j.at("expected_points");
    out.expect("fixed points located", int(pts.size()), int(rep.fixed_points.size()));
    if (pts.size() == rep.fixed_points.size()) {
      std::vector<Point2> got = rep.fixed_points;
      std::sort(got.begin(), got.end(),
                [](const Point2& a, const Point2& b) { return a[0] < b[0]; });
      for (std::size_t k = 0; k < got.size(); ++k) {
        const double dx = got[k][0] - pts[k][0].get<double>();
        const double dy = got[k][1] - pts[k][1].get<double>();
        out.expect("point " + std::to_string(k + 1) + " within 1e-6",
                   1, std::abs(dx) <= 1e-6 && std::abs(dy) <= 1e-6 ? 1 : 0);
      }
    }
  } else if (suite == "homotopy") {
    HomotopyConfig cfg;
    cfg.N = planar_of(j.at("map")[0].get<std::string>(), j.at("map")[1].get<std::string>());
    cfg.S = planar_of(j.at("auxiliary")[0].get<std::string>(),
                      j.at("auxiliary")[1].get<std::string>());
    cfg.mu0 = j.at("mu0").get<double>();
    cfg.region.a = {j.at("region")[0][0].get<double>(), j.at("region")[1][0].get<double>()};
    cfg.region.b = {j.at("region")[0][1].get<double>(), j.at("region")[1][1].get<double>()};
    const HomotopyReport rep = homotopy_invariance_probe(cfg, steps);
    const auto& expw = j.at("expected_windings");
    for (int k = 0; k < 5; ++k) {
      char label[32];
      std::snprintf(label, sizeof label, "stage t=%.2f", rep.t[std::size_t(k)]);
      out.expect(label, expw[std::size_t(k)].get<int>(), rep.winding[std::size_t(k)]);
    }
    out.expect("direct endpoint", j.at("expected_direct").get<int>(), rep.direct);
  } else {
    throw ParseError("unknown suite '" + suite + "' (ledger | signs | multiplicity | homotopy)");
  }

  if (!out.failures.empty()) {
    std::printf("%d/%d checks failed:\n", int(out.failures.size()), out.checked);
    for (const auto& f : out.failures) std::printf("  %s\n", f.c_str());
    return 7;
  }
  std::printf("all %d checks match\n", out.checked);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified positive periodic solutions of coupled second-order systems"};
  app.require_subcommand(1);

  std::string problem_path, out_path, csv_path, report_path;
  std::string suite, fixture_dir = "fixtures/indexlab";
  int n_override = 0, density = 0, steps = 4096;
  double tol = 0.0, search_lo = 0.0, search_hi = 0.0;

  auto* green = app.add_subcommand("green", "periodic kernel report for the linear parts");
  green->add_option("problem", problem_path, "problem file")->required();
  green->add_option("--out", out_path, "report path (default: stdout)");
  green->add_option("--csv", csv_path, "dump kernel values as CSV");
  green->add_option("--n", n_override, "grid override");

  auto* verify = app.add_subcommand("verify", "search radii and certify the shell bands");
  verify->add_option("problem", problem_path, "problem file")->required();
  verify->add_option("--out", out_path, "report path (default: stdout)");
  verify->add_option("--n", n_override, "grid override");
  verify->add_option("--density", density, "band scan density");
  verify->add_option("--search-lo", search_lo, "radius sweep lower end");
  verify->add_option("--search-hi", search_hi, "radius sweep upper end");

  auto* solve = app.add_subcommand("solve", "certify and solve; write the solution CSV");
  solve->add_option("problem", problem_path, "problem file")->required();
  solve->add_option("--out", out_path, "solution CSV path (default: solution.csv)");
  solve->add_option("--report", report_path, "result report path (default: stdout)");
  solve->add_option("--n", n_override, "grid override");
  solve->add_option("--tol", tol, "residual tolerance override");

  auto* indexlab = app.add_subcommand("indexlab", "run a planar index fixture suite");
  indexlab->add_option("suite", suite, "ledger | signs | multiplicity | homotopy")->required();
  indexlab->add_option("--fixtures", fixture_dir, "fixture directory");
  indexlab->add_option("--steps", steps, "boundary samples per edge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (green->parsed()) return cmd_green(problem_path, out_path, csv_path, n_override);
    if (verify->parsed()) {
      return cmd_verify(problem_path, out_path, n_override, density, search_lo, search_hi);
    }
    if (solve->parsed()) {
      if (out_path.empty()) out_path = "solution.csv";
      return cmd_solve(problem_path, out_path, report_path, n_override, tol);
    }
    return cmd_indexlab(suite, fixture_dir, steps);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResonanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const MixedSignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const MismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
