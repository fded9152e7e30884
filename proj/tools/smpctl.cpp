#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smp/adjoint.hpp"
#include "smp/config.hpp"
#include "smp/csv.hpp"
#include "smp/dynamics.hpp"
#include "smp/errors.hpp"
#include "smp/maximum_principle.hpp"
#include "smp/optimizer.hpp"
#include "smp/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "problem configuration (TOML)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
  cmd->add_option("--seed", args.seed_override, "override the master seed")
      ->each([&](const std::string&) { args.seed_given = true; });
  cmd->add_option("--workers", args.workers, "worker threads for path-parallel work")
      ->check(CLI::PositiveNumber);
}

struct Loaded {
  smp::ProblemConfig cfg;
  smp::Problem prob;
};

Loaded load(const CommonArgs& args) {
  Loaded l;
  l.cfg = smp::load_config(args.config_path);
  if (args.seed_given) l.cfg.master_seed = args.seed_override;
  l.prob = smp::build_problem(l.cfg);
  fs::create_directories(args.out_dir);
  return l;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

smp::OptimalityReport verify_control(const smp::Problem& prob, const smp::ControlField& u,
                                     int n_paths, int workers, double sufficiency_tol) {
  smp::OptimalityReport rep;
  const smp::GradientEstimate grad =
      smp::estimate_gradient(prob, u, n_paths, prob.master_seed, workers);
  const smp::ResidualResult res = smp::smp_residual(prob.box, u, grad.mean, 1.0);
  rep.residual = res.residual;
  rep.residual_step = 1.0;
  rep.witness = res.witness;
  rep.gradient = grad.mean;
  rep.gradient_max_abs = grad.mean.size() ? grad.mean.cwiseAbs().maxCoeff() : 0.0;

  // nominal-path certificate at the Monte Carlo precision of the estimate
  const double mc = grad.std_error.size() ? 1.96 * grad.std_error.maxCoeff() : 0.0;
  const double cert_tol = std::max(sufficiency_tol, res.residual + mc);
  smp::Problem nominal = prob;
  nominal.noise_on = false;
  const smp::StateTrajectory traj = smp::solve_forward(nominal, u, 0);
  const smp::AdjointTrajectory adj = smp::solve_adjoint_pathwise(nominal, traj, u);
  rep.sufficiency = smp::check_sufficient(nominal, traj, adj, u, cert_tol);
  return rep;
}

int cmd_validate(const CommonArgs& args) {
  // load_config throws with the failing hypothesis when the data is bad
  const smp::ProblemConfig cfg = smp::load_config(args.config_path);
  const smp::Problem prob = smp::build_problem(cfg);
  const smp::AssumptionReport report =
      smp::validate_assumptions(prob.coeffs, prob.box, prob.mesh, 200, prob.master_seed);
  std::cout << report.summary();
  std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? 0 : 1;
}

int cmd_simulate(const CommonArgs& args, std::uint64_t path_id,
                 const std::string& control_file) {
  const Loaded l = load(args);
  smp::ControlField u = l.prob.zero_control();
  if (!control_file.empty()) {
    u = smp::read_control_csv(control_file, l.prob.coeffs.control_dim);
    smp::validate_control(l.prob, u);
  }
  const smp::StateTrajectory traj = smp::solve_forward(l.prob, u, path_id);
  const smp::AdjointTrajectory adj = smp::solve_adjoint_pathwise(l.prob, traj, u);
  const std::uint64_t seed = l.prob.master_seed;
  smp::write_trajectory_csv(join(args.out_dir, "trajectory.csv"), l.prob.mesh, traj, seed);
  smp::write_boundary_csv(join(args.out_dir, "boundary.csv"), l.prob.mesh, traj, seed);
  smp::write_adjoint_csv(join(args.out_dir, "adjoint.csv"), l.prob.mesh, adj, seed);
  const double bound = smp::gronwall_bound(l.prob, u, path_id);
  double max_sq = 0.0;
  for (const auto& y : traj.states)
    max_sq = std::max(max_sq, smp::inner_H(l.prob.mesh, y, y));
  std::cout << "path " << path_id << ": steps=" << l.prob.steps
            << " max||Y||_H^2=" << max_sq << " gronwall_bound=" << bound << "\n";
  return 0;
}

int cmd_gradient_check(const CommonArgs& args, int n_coords, double fd_step) {
  const Loaded l = load(args);
  const smp::Problem& prob = l.prob;
  const int n_paths = prob.noise_on ? l.cfg.optimizer.n_paths : 1;
  const std::uint64_t seed = prob.master_seed;
  const smp::ControlField u0 = prob.zero_control();

  const smp::GradientEstimate adj_grad =
      smp::estimate_gradient(prob, u0, n_paths, seed, args.workers);

  std::vector<smp::GradCheckRow> rows;
  bool ok = true;
  const int m = prob.coeffs.control_dim;
  for (int k = 0; k < n_coords; ++k) {
    // deterministic coordinate draws off the master seed
    const int n = static_cast<int>(smp::uniform_draw(seed, 1000 + k, 0, 0) * prob.steps);
    const int b = static_cast<int>(smp::uniform_draw(seed, 1000 + k, 1, 0) * prob.n_bnodes());
    const int c = static_cast<int>(smp::uniform_draw(seed, 1000 + k, 2, 0) * m);

    // discrete cost gradient coordinate carries the dt x mass weight
    const double w = prob.dt() * prob.mesh.mass_boundary[b];
    smp::GradCheckRow row;
    row.step = n;
    row.bnode = b;
    row.comp = c;
    row.adjoint = w * adj_grad.mean(n, b * m + c);
    row.adjoint_half = w * 1.96 * adj_grad.std_error(n, b * m + c);

    smp::ControlField up = u0, um = u0;
    up.data(n, b * m + c) += fd_step;
    um.data(n, b * m + c) -= fd_step;
    const smp::CostEstimate jp = smp::estimate_cost(prob, up, n_paths, seed, args.workers);
    const smp::CostEstimate jm = smp::estimate_cost(prob, um, n_paths, seed, args.workers);
    row.fd = (jp.value - jm.value) / (2.0 * fd_step);
    row.fd_half = std::hypot(jp.half_width, jm.half_width) / (2.0 * fd_step);

    row.rel_err = std::abs(row.adjoint - row.fd) /
                  std::max({std::abs(row.adjoint), std::abs(row.fd), 1e-10});
    row.ci_overlap = std::abs(row.adjoint - row.fd) <= row.adjoint_half + row.fd_half + 1e-12;
    if (prob.noise_on)
      ok = ok && row.ci_overlap;
    else
      ok = ok && row.rel_err <= 1e-3;
    rows.push_back(row);
  }
  smp::write_gradcheck_csv(join(args.out_dir, "gradcheck.csv"), rows, seed);

  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.rel_err);
  std::cout << "gradient check: " << rows.size() << " coordinates, max rel err " << worst
            << (prob.noise_on ? " (stochastic, CI overlap mode)" : "") << " -> "
            << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

int cmd_optimize(const CommonArgs& args, bool timings) {
  const Loaded l = load(args);
  smp::OptimizerOptions opts = l.cfg.optimizer;
  opts.workers = args.workers;
  opts.record_timings = timings;
  const smp::ControlField u0 = l.prob.zero_control();
  const smp::OptimizeResult result = smp::run_optimizer(l.prob, u0, opts);

  const std::uint64_t seed = l.prob.master_seed;
  smp::write_history_csv(join(args.out_dir, "history.csv"), result.history, seed, timings);
  smp::write_control_csv(join(args.out_dir, "control.csv"), result.control, seed);
  smp::write_text_file(join(args.out_dir, "report.json"),
                       smp::report_json(result.report, &result.history, seed));

  const auto& last = result.history.rows.back();
  std::cout << "optimize: " << result.history.status << " after " << last.iteration
            << " iterations, J=" << last.cost << ", residual=" << last.residual << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& args, const std::string& control_file, bool tol_given,
               double tol_flag) {
  const Loaded l = load(args);
  const double tol = tol_given ? tol_flag : l.cfg.optimizer.tol;
  const smp::ControlField u =
      smp::read_control_csv(control_file, l.prob.coeffs.control_dim);
  smp::validate_control(l.prob, u);

  const int n_paths = l.prob.noise_on ? l.cfg.optimizer.n_paths : 1;
  const smp::OptimalityReport rep =
      verify_control(l.prob, u, n_paths, args.workers, l.cfg.optimizer.sufficiency_tol);
  smp::write_text_file(join(args.out_dir, "report.json"),
                       smp::report_json(rep, nullptr, l.prob.master_seed));

  std::cout << "residual=" << rep.residual;
  if (rep.residual > tol)
    std::cout << " witness=(step " << rep.witness.step << ", bnode " << rep.witness.bnode << ")";
  std::cout << " sufficiency=" << smp::verdict_name(rep.sufficiency.verdict) << "\n";
  return rep.residual <= tol ? 0 : 1;
}

int cmd_convergence(const CommonArgs& args, int levels) {
  const Loaded l = load(args);
  std::vector<smp::ConvergenceRow> rows;

  // time refinement against a much finer nested reference, noise off
  const int ref_shift = levels + 2;
  {
    smp::Problem base = l.prob;
    base.noise_on = false;
    std::vector<double> errs;
    smp::Problem fine = base;
    fine.steps = base.steps << ref_shift;
    const smp::StateTrajectory ref = smp::solve_forward(fine, fine.zero_control(), 0);
    for (int k = 0; k < levels; ++k) {
      smp::Problem pk = base;
      pk.steps = base.steps << k;
      const smp::StateTrajectory tk = smp::solve_forward(pk, pk.zero_control(), 0);
      const int stride = 1 << (ref_shift - k);
      double err = 0.0;
      for (int n = 0; n <= pk.steps; ++n) {
        const smp::Field d = tk.states[n] - ref.states[n * stride];
        err = std::max(err, smp::norm_H(pk.mesh, d));
      }
      smp::ConvergenceRow row;
      row.study = "time";
      row.level = k;
      row.dt = pk.dt();
      row.error = err;
      if (k > 0 && err > 0.0) row.order = std::log2(errs.back() / err);
      errs.push_back(err);
      rows.push_back(row);
    }
  }

  // space refinement with nested interval/rectangle meshes, noise off
  if (l.cfg.domain_kind == "interval") {
    std::vector<double> errs;
    auto make = [&](int k) {
      smp::ProblemConfig cfg = l.cfg;
      cfg.noise_enabled = false;
      cfg.interval.n = ((l.cfg.interval.n - 1) << k) + 1;
      return smp::build_problem(cfg);
    };
    const smp::Problem fine = make(ref_shift);
    const smp::StateTrajectory ref = smp::solve_forward(fine, fine.zero_control(), 0);
    for (int k = 0; k < levels; ++k) {
      const smp::Problem pk = make(k);
      const smp::StateTrajectory tk = smp::solve_forward(pk, pk.zero_control(), 0);
      const int stride = 1 << (ref_shift - k);
      smp::Field diff(pk.mesh.n_nodes());
      for (int i = 0; i < pk.mesh.n_nodes(); ++i)
        diff[i] = tk.states[pk.steps][i] - ref.states[pk.steps][i * stride];
      const double err = smp::norm_H(pk.mesh, diff);
      smp::ConvergenceRow row;
      row.study = "space";
      row.level = k;
      row.h = (l.cfg.interval.b - l.cfg.interval.a) / (pk.mesh.n_nodes() - 1);
      row.dt = pk.dt();
      row.error = err;
      if (k > 0 && err > 0.0) row.order = std::log2(errs.back() / err);
      errs.push_back(err);
      rows.push_back(row);
    }
  }

  smp::write_convergence_csv(join(args.out_dir, "convergence.csv"), rows,
                             l.prob.master_seed);
  for (const auto& r : rows)
    std::cout << r.study << " level " << r.level << ": error=" << r.error
              << " order=" << r.order << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic boundary-control toolkit"};
  app.require_subcommand(1);

  CommonArgs a_validate, a_simulate, a_gradcheck, a_optimize, a_verify, a_convergence;

  CLI::App* c_validate = app.add_subcommand("validate", "check coefficient hypotheses");
  add_common(c_validate, a_validate);

  CLI::App* c_simulate = app.add_subcommand("simulate", "forward path dump");
  add_common(c_simulate, a_simulate);
  std::uint64_t sim_path = 0;
  std::string sim_control;
  c_simulate->add_option("--path", sim_path, "path index to simulate");
  c_simulate->add_option("--control", sim_control, "control CSV to apply")
      ->check(CLI::ExistingFile);

  CLI::App* c_gradcheck =
      app.add_subcommand("gradient-check", "adjoint gradient vs finite differences");
  add_common(c_gradcheck, a_gradcheck);
  int gc_coords = 20;
  double gc_step = 1e-5;
  c_gradcheck->add_option("--coords", gc_coords, "number of sampled coordinates")
      ->check(CLI::PositiveNumber);
  c_gradcheck->add_option("--fd-step", gc_step, "central difference step")
      ->check(CLI::PositiveNumber);

  CLI::App* c_optimize = app.add_subcommand("optimize", "projected-gradient control search");
  add_common(c_optimize, a_optimize);
  bool timings = false;
  c_optimize->add_flag("--timings", timings, "record wall times in history.csv");

  CLI::App* c_verify = app.add_subcommand("verify", "optimality of a dumped control");
  add_common(c_verify, a_verify);
  std::string verify_control_file;
  double verify_tol = 1e-4;
  c_verify->add_option("--control", verify_control_file, "control CSV to verify")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* tol_opt =
      c_verify->add_option("--tol", verify_tol, "residual threshold (default: optimizer tol)");

  CLI::App* c_convergence = app.add_subcommand("convergence", "dt/h refinement study");
  add_common(c_convergence, a_convergence);
  int conv_levels = 3;
  c_convergence->add_option("--levels", conv_levels, "refinement levels")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (c_validate->parsed()) return cmd_validate(a_validate);
    if (c_simulate->parsed()) return cmd_simulate(a_simulate, sim_path, sim_control);
    if (c_gradcheck->parsed()) return cmd_gradient_check(a_gradcheck, gc_coords, gc_step);
    if (c_optimize->parsed()) return cmd_optimize(a_optimize, timings);
    if (c_verify->parsed())
      return cmd_verify(a_verify, verify_control_file, tol_opt->count() > 0, verify_tol);
    if (c_convergence->parsed()) return cmd_convergence(a_convergence, conv_levels);
  } catch (const smp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
