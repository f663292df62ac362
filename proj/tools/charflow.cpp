#include "charflow/builtins.hpp"
#include "charflow/bv_analysis.hpp"
#include "charflow/experiments.hpp"
#include "charflow/inpaint.hpp"
#include "charflow/io.hpp"
#include "charflow/parallel.hpp"
#include "charflow/quasilinear.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace charflow;
using json = nlohmann::ordered_json;

namespace {

constexpr double kPiOver6 = 0.5235987755982988;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidArgument, path + ": cannot write");
  out << text << "\n";
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(Errc::UnreadableImage, path + ": no such file");
}

void require_parent(const std::string& path) {
  if (path.empty()) return;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw Error(Errc::InvalidArgument, path + ": directory does not exist");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidArgument, "bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(Errc::InvalidArgument, "empty list");
  return out;
}

struct SolveArgs {
  BuiltinCase bc;
  std::optional<double> beta;
  std::size_t max_steps = 0;
  Eigen::Index grid = 128;
  std::string out, report, trace_csv;
  std::vector<double> trace_from{0.3, 0.2};
};

int cmd_solve(const SolveArgs& a) {
  require_parent(a.out);
  require_parent(a.report);
  require_parent(a.trace_csv);
  LinearProblem p = make_problem(a.bc);
  if (a.max_steps) p.opts.max_steps = a.max_steps;

  json rep;
  rep["domain"] = a.bc.domain;
  rep["field"] = p.c.name;
  rep["data"] = a.bc.data;
  rep["rhs"] = a.bc.rhs;
  rep["q"] = a.bc.q;
  rep["step"] = a.bc.step;
  rep["grid"] = a.grid;
  Sampling sampling;
  sampling.n = static_cast<std::size_t>(a.grid);
  const double beta_est = check_causality(*p.tf, p.c, *p.domain, sampling);
  rep["beta_est"] = beta_est;
  if (a.beta) {
    rep["beta_declared"] = *a.beta;
    if (beta_est < *a.beta * (1.0 - 1e-6)) {
      throw Error(Errc::NotCausal, "declared beta " + std::to_string(*a.beta) + " exceeds measured " +
                                       std::to_string(beta_est));
    }
    p.c.beta = *a.beta;
    p = finalize(p);
  }
  rep["beta"] = p.c.beta;
  rep["m0"] = p.m0;

  const GridFunction u = solve_on_grid(p, a.grid);
  const BVEstimate est = estimate_bv(p, u);
  const BoundsReport bounds = check_bounds(est);
  rep["estimate"] = json::parse(to_json(est));
  rep["linf_pass"] = bounds.linf_pass;
  rep["tv_pass"] = bounds.tv_pass;
  rep["tv_allowed"] = bounds.tv_allowed;
  if (!a.out.empty()) write_grid(a.out, u);

  if (!a.trace_csv.empty()) {
    if (a.trace_from.size() != 2) throw Error(Errc::InvalidArgument, "--trace-from needs x,y");
    const Point x(a.trace_from[0], a.trace_from[1]);
    const CharacteristicTrace tr = integrate_backward(x, p.scaled(), p.opts);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      rows.push_back({tr.times[k], tr.points[k].x(), tr.points[k].y(), transform_time(*p.tf, tr.points[k])});
    }
    write_csv(a.trace_csv, {"tau", "x", "y", "T0"}, rows);
  }
  write_text(a.report, rep.dump(2));
  std::cout << "linf " << est.linf << " <= " << est.linf_bound << ", tv " << est.tv_discrete << " <= "
            << bounds.tv_allowed << "\n";
  return bounds.pass() ? 0 : 1;
}

struct InpaintArgs {
  std::string image, mask, out, report;
  InpaintOptions opts;
};

int cmd_inpaint(const InpaintArgs& a) {
  require_file(a.image);
  require_file(a.mask);
  require_parent(a.out);
  require_parent(a.report);
  const Image image = read_image(a.image);
  const Image mask_img = read_image(a.mask);
  if (mask_img.channels() != 1) throw Error(Errc::MaskMismatch, "mask must be a grayscale PGM");
  const InpaintResult res = inpaint(image, mask_from_image(mask_img), a.opts);
  write_image(a.out, res.output);
  write_text(a.report, to_json(res.report));
  std::cout << "filled " << res.report.mask_pixels << " pixels, beta_est " << res.report.beta_est << "\n";
  return 0;
}

int cmd_verify(VerifyConfig cfg, bool fast, const std::string& report) {
  require_parent(report);
  if (fast) cfg.grid = 32;
  const VerifyReport rep = run_verify(cfg);
  for (const CheckResult& c : rep.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << "\n";
  }
  write_text(report, to_json(rep));
  return rep.all_pass() ? 0 : 1;
}

int cmd_converge(const std::string& steps, const std::string& grids, double theta, const std::string& csv,
                 const std::string& report) {
  require_parent(csv);
  require_parent(report);
  std::vector<Eigen::Index> g;
  for (double v : parse_list(grids)) g.push_back(static_cast<Eigen::Index>(std::llround(v)));
  const ConvergeResult r = run_converge(parse_list(steps), g, theta);
  std::vector<std::vector<double>> rows;
  for (const auto& s : r.step_rows) rows.push_back({s.step, 0.0, s.max_error, s.const_max_error, 0.0, 0.0});
  for (const auto& s : r.grid_rows) {
    rows.push_back({0.0, static_cast<double>(s.grid), 0.0, 0.0, s.tv, s.cauchy});
  }
  if (!csv.empty()) write_csv(csv, {"step", "grid", "max_error", "const_max_error", "tv", "tv_cauchy"}, rows);
  json j;
  j["step_order"] = r.step_order;
  j["tv_order"] = r.tv_order;
  j["step_order_ok"] = r.step_order_ok;
  j["tv_shrink_ok"] = r.tv_shrink_ok;
  j["float_format"] = "shortest-roundtrip";
  write_text(report, j.dump(2));
  std::cout << "step order " << r.step_order << (r.step_order_ok ? " ok" : " LOW") << ", tv cauchy order "
            << r.tv_order << (r.tv_shrink_ok ? " ok" : " LOW") << "\n";
  return r.pass() ? 0 : 1;
}

int cmd_stability(Eigen::Index grid, double step, double theta0, int levels, const std::string& csv,
                  const std::string& report) {
  require_parent(csv);
  require_parent(report);
  const StabilityResult r = run_stability(grid, step, theta0, levels);
  std::vector<std::vector<double>> rows;
  for (const auto& s : r.rows) {
    rows.push_back({static_cast<double>(s.n), s.theta, s.l1_error, s.l1_grid, s.tv, s.tv_cap, r.floor});
  }
  if (!csv.empty()) write_csv(csv, {"n", "theta", "l1_error", "l1_grid", "tv", "tv_cap", "floor"}, rows);
  json j;
  j["floor"] = r.floor;
  j["decreasing"] = r.decreasing;
  j["final_within_floor"] = r.final_within_floor;
  j["ratio_ok"] = r.ratio_ok;
  j["tv_ok"] = r.tv_ok;
  j["float_format"] = "shortest-roundtrip";
  write_text(report, j.dump(2));
  for (const auto& s : r.rows) std::cout << s.n << " theta " << s.theta << " l1 " << s.l1_error << "\n";
  std::cout << "floor " << r.floor << (r.pass() ? ", pass" : ", FAIL") << "\n";
  return r.pass() ? 0 : 1;
}

int cmd_nonunique(const std::string& seeds, const FixedPointOptions& opts, Eigen::Index grid, const std::string& log,
                  const std::string& report) {
  require_parent(log);
  require_parent(report);
  BuiltinCase bc;
  const LinearProblem base = finalize(make_problem(bc));
  const NonuniqueResult r =
      nonuniqueness_demo(base, GridSpec::cover(base.domain->bbox(), grid), parse_list(seeds), opts);
  std::vector<std::vector<double>> rows;
  json j;
  j["a_l1"] = r.a_l1;
  j["M_star"] = r.bounds.M_star;
  j["M_starstar"] = r.bounds.M_starstar;
  j["distinct_limits"] = r.distinct_limits;
  j["rows"] = json::array();
  for (const NonuniqueRow& row : r.rows) {
    for (std::size_t k = 0; k < row.report.l1_residuals.size(); ++k) {
      rows.push_back({row.seed, static_cast<double>(k + 1), row.report.l1_residuals[k], row.report.l1_norms[k],
                      row.report.tvs[k]});
    }
    j["rows"].push_back({{"seed", row.seed},
                         {"alpha", row.alpha},
                         {"residual", row.residual},
                         {"iterations", row.iterations},
                         {"converged", row.converged},
                         {"in_X", row.report.in_X.value_or(false)}});
    std::cout << "seed " << row.seed << " -> alpha " << row.alpha << " (residual " << row.residual << ")\n";
  }
  j["float_format"] = "shortest-roundtrip";
  if (!log.empty()) write_csv(log, {"seed", "iter", "l1_residual", "l1_norm", "tv"}, rows);
  write_text(report, j.dump(2));
  std::cout << "||a||_1 " << r.a_l1 << ", distinct limits " << r.distinct_limits << "\n";
  return r.distinct_limits >= 2 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport solver for first-order Dirichlet problems with an interior stop set"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve a built-in problem on a grid");
  solve->add_option("--domain", sa.bc.domain, "disk, disk-segment or rect-skeleton")
      ->check(CLI::IsMember({"disk", "disk-segment", "rect-skeleton"}));
  solve->add_option("--field", sa.bc.field, "radial, spiral, nearest (default: per domain)");
  solve->add_option("--data", sa.bc.data, "cos, step, const, zero")->check(CLI::IsMember({"cos", "step", "const", "zero"}));
  solve->add_option("--value", sa.bc.const_value, "value for --data const");
  solve->add_option("--rhs", sa.bc.rhs, "zero or one")->check(CLI::IsMember({"zero", "one"}));
  solve->add_option("--q", sa.bc.q, "time exponent")->check(CLI::Range(1.0, 16.0));
  solve->add_option("--theta", sa.bc.theta, "spiral angle")->check(CLI::Range(0.0, 1.5));
  solve->add_option("--beta", sa.beta, "declared causality constant, verified before solving")
      ->check(CLI::Range(1e-6, 1.0));
  solve->add_option("--step", sa.bc.step, "RK4 step in T0 units")->check(CLI::Range(1e-6, 0.25));
  solve->add_option("--max-steps", sa.max_steps, "step limit per characteristic");
  solve->add_option("--grid", sa.grid, "cells along the longer side")->check(CLI::Range(8, 4096));
  solve->add_option("--out", sa.out, "output prefix for .bin/.mask.bin/.pgm/.json");
  solve->add_option("--report", sa.report, "JSON report path");
  solve->add_option("--trace-csv", sa.trace_csv, "dump the backward characteristic from --trace-from");
  solve->add_option("--trace-from", sa.trace_from, "start point x,y")->delimiter(',')->expected(2);

  InpaintArgs ia;
  auto* inp = app.add_subcommand("inpaint", "Fill the masked region of an image");
  inp->add_option("--image", ia.image, "PGM (P2/P5) or PPM (P6)")->required();
  inp->add_option("--mask", ia.mask, "PGM, nonzero = fill")->required();
  inp->add_option("--out", ia.out, "output image")->required();
  inp->add_option("--report", ia.report, "JSON report path");
  inp->add_option("--blend", ia.opts.blend, "isophote weight, 0 = linear transport")->check(CLI::Range(0.0, 1.0));
  inp->add_option("--smoothing", ia.opts.smoothing, "mollifier width in pixels")->check(CLI::Range(0.0, 64.0));
  inp->add_option("--beta", ia.opts.beta, "causality constant enforced on the field")->check(CLI::Range(1e-3, 1.0));
  inp->add_option("--tol", ia.opts.tol, "fixed-point tolerance")->check(CLI::PositiveNumber);
  inp->add_option("--max-iter", ia.opts.max_iter, "fixed-point iterations")->check(CLI::Range(1, 10000));
  inp->add_option("--omega", ia.opts.omega, "relaxation")->check(CLI::Range(1e-3, 1.0));
  inp->add_option("--step", ia.opts.step, "RK4 step in T0 units")->check(CLI::Range(1e-6, 0.25));

  VerifyConfig vc;
  bool fast = false;
  std::string verify_report;
  auto* ver = app.add_subcommand("verify", "Run the invariant checks on the built-ins");
  ver->add_option("--grid", vc.grid, "grid resolution")->check(CLI::Range(8, 4096));
  ver->add_flag("--fast", fast, "grid 32 with spacing-scaled slacks");
  ver->add_option("--step", vc.step, "RK4 step")->check(CLI::Range(1e-6, 0.25));
  ver->add_option("--q", vc.q, "time exponent")->check(CLI::Range(1.0, 16.0));
  ver->add_option("--traces", vc.n_traces, "characteristics per built-in")->check(CLI::Range(1, 1000000));
  ver->add_option("--beta-spiral", vc.spiral_beta, "declared beta of the spiral field")->check(CLI::Range(1e-6, 1.0));
  ver->add_option("--report", verify_report, "JSON report path");

  std::string steps = "0.01,0.005,0.0025,0.001", grids = "64,128,256", conv_csv, conv_report;
  double conv_theta = kPiOver6;
  auto* conv = app.add_subcommand("converge", "Step and grid convergence study");
  conv->add_option("--steps", steps, "comma-separated RK4 steps");
  conv->add_option("--grids", grids, "comma-separated grid resolutions");
  conv->add_option("--theta", conv_theta, "spiral angle")->check(CLI::Range(0.0, 1.5));
  conv->add_option("--csv", conv_csv, "CSV output");
  conv->add_option("--report", conv_report, "JSON report path");

  Eigen::Index stab_grid = 128;
  double stab_step = 1e-3, theta0 = kPiOver6;
  int levels = 5;
  std::string stab_csv, stab_report;
  auto* stab = app.add_subcommand("stability", "Continuous dependence on the transport field");
  stab->add_option("--grid", stab_grid, "grid resolution")->check(CLI::Range(8, 4096));
  stab->add_option("--step", stab_step, "RK4 step")->check(CLI::Range(1e-6, 0.25));
  stab->add_option("--theta0", theta0, "largest rotation angle")->check(CLI::Range(0.0, 1.5));
  stab->add_option("--levels", levels, "halvings of theta0")->check(CLI::Range(1, 20));
  stab->add_option("--csv", stab_csv, "CSV output");
  stab->add_option("--report", stab_report, "JSON report path");

  std::string seeds = "-2,0,0.5,2", nu_log, nu_report;
  FixedPointOptions fpo;
  Eigen::Index nu_grid = 128;
  auto* nu = app.add_subcommand("nonunique", "Fixed points of the non-unique quasi-linear example");
  nu->add_option("--seeds", seeds, "comma-separated initial constants");
  nu->add_option("--tol", fpo.tol, "L1 tolerance")->check(CLI::PositiveNumber);
  nu->add_option("--max-iter", fpo.max_iter, "iteration cap")->check(CLI::Range(1, 10000));
  nu->add_option("--omega", fpo.omega, "relaxation")->check(CLI::Range(1e-3, 1.0));
  nu->add_option("--grid", nu_grid, "grid resolution")->check(CLI::Range(8, 4096));
  nu->add_option("--log", nu_log, "iteration CSV");
  nu->add_option("--report", nu_report, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) return cmd_solve(sa);
    if (*inp) return cmd_inpaint(ia);
    if (*ver) return cmd_verify(vc, fast, verify_report);
    if (*conv) return cmd_converge(steps, grids, conv_theta, conv_csv, conv_report);
    if (*stab) return cmd_stability(stab_grid, stab_step, theta0, levels, stab_csv, stab_report);
    if (*nu) return cmd_nonunique(seeds, fpo, nu_grid, nu_log, nu_report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
