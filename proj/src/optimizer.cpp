#include "smp/optimizer.hpp"

#include <chrono>
#include <cmath>

#include "smp/adjoint.hpp"
#include "smp/dynamics.hpp"
#include "smp/errors.hpp"
#include "smp/operators.hpp"
#include "smp/parallel.hpp"

namespace smp {

double pathwise_cost(const Problem& prob, const StateTrajectory& traj,
                     const ControlField& control) {
  require(traj.steps() == prob.steps, "trajectory step count does not match problem");
  const Mesh& mesh = prob.mesh;
  const double dt = prob.dt();
  double j = 0.0;
  for (int n = 0; n < prob.steps; ++n) {
    const auto u = control.data.row(n).transpose();
    j += 0.5 * dt *
         (running_cost(mesh, prob.coeffs, traj.states[n], u) +
          running_cost(mesh, prob.coeffs, traj.states[n + 1], u));
  }
  return j + terminal_cost(mesh, prob.coeffs, traj.states[prob.steps]);
}

namespace {

Problem reseeded(const Problem& prob, std::uint64_t seed) {
  Problem local = prob;
  local.master_seed = seed;
  return local;
}

}  // namespace

CostEstimate estimate_cost(const Problem& prob, const ControlField& control, int n_paths,
                           std::uint64_t seed, int workers) {
  require(n_paths >= 1, "need at least one path");
  const Problem local = reseeded(prob, seed);
  const int n = local.noise_on ? n_paths : 1;

  std::vector<double> costs(n);
  parallel_for_indexed(n, workers, [&](int i) {
    const StateTrajectory traj = solve_forward(local, control, static_cast<std::uint64_t>(i));
    costs[i] = pathwise_cost(local, traj, control);
  });

  CostEstimate est;
  est.n_paths = n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += costs[i];
  est.value = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) ss += (costs[i] - est.value) * (costs[i] - est.value);
    est.half_width = 1.96 * std::sqrt(ss / (n - 1) / n);
  }
  return est;
}

GradientEstimate estimate_gradient(const Problem& prob, const ControlField& control, int n_paths,
                                   std::uint64_t seed, int workers) {
  require(n_paths >= 1, "need at least one path");
  const Problem local = reseeded(prob, seed);
  const int n = local.noise_on ? n_paths : 1;

  std::vector<RowMat> grads(n);
  parallel_for_indexed(n, workers, [&](int i) {
    const StateTrajectory traj = solve_forward(local, control, static_cast<std::uint64_t>(i));
    const AdjointTrajectory adj = solve_adjoint_pathwise(local, traj, control);
    grads[i] = gradient_density(local, traj, control, adj);
  });

  GradientEstimate est;
  est.n_paths = n;
  est.mean = RowMat::Zero(control.steps, control.bnodes * control.m);
  for (int i = 0; i < n; ++i) est.mean += grads[i];
  est.mean /= n;
  est.std_error = RowMat::Zero(control.steps, control.bnodes * control.m);
  if (n > 1) {
    for (int i = 0; i < n; ++i) est.std_error += (grads[i] - est.mean).cwiseAbs2();
    est.std_error = (est.std_error / ((n - 1.0) * n)).cwiseSqrt();
  }
  return est;
}

namespace {

ControlField project_control(const Problem& prob, const RowMat& raw) {
  ControlField out = prob.zero_control();
  const int m = prob.coeffs.control_dim;
  for (int n = 0; n < out.steps; ++n)
    for (int b = 0; b < out.bnodes; ++b)
      out.set_value(n, b, prob.box.project(raw.row(n).segment(b * m, m).transpose()));
  return out;
}

// inner product of control-shaped matrices under the dt x surface-mass weights
double control_dot(const Problem& prob, const RowMat& a, const RowMat& b) {
  const int m = prob.coeffs.control_dim;
  double s = 0.0;
  for (int bn = 0; bn < prob.mesh.n_boundary(); ++bn)
    s += prob.mesh.mass_boundary[bn] *
         a.middleCols(bn * m, m).cwiseProduct(b.middleCols(bn * m, m)).sum();
  return prob.dt() * s;
}

}  // namespace

OptimizeResult run_optimizer(const Problem& prob, const ControlField& u0,
                             const OptimizerOptions& opts) {
  validate_control(prob, u0);
  require(opts.n_paths >= 1, "path count must be at least 1");
  require(opts.max_iters >= 0, "iteration count must be nonnegative");
  require(opts.armijo_slope > 0.0 && opts.armijo_slope < 1.0,
          "Armijo slope fraction must lie in (0, 1)");
  require(opts.backtrack > 0.0 && opts.backtrack < 1.0,
          "backtracking ratio must lie in (0, 1)");
  require(opts.residual_step > 0.0, "residual step must be positive");
  require(opts.tol >= 0.0, "tolerance must be nonnegative");

  const std::uint64_t base_seed = opts.seed ? opts.seed : prob.master_seed;
  auto iter_seed = [&](int iter) {
    return opts.crn ? base_seed : base_seed + static_cast<std::uint64_t>(iter);
  };

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] {
    if (!opts.record_timings) return 0.0;
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  OptimizeResult out;
  out.control = u0;

  CostEstimate cost = estimate_cost(prob, out.control, opts.n_paths, iter_seed(0), opts.workers);
  GradientEstimate grad =
      estimate_gradient(prob, out.control, opts.n_paths, iter_seed(0), opts.workers);
  ResidualResult res = smp_residual(prob.box, out.control, grad.mean, opts.residual_step);

  out.history.rows.push_back(
      {0, cost.value, cost.half_width, res.residual, 0.0, elapsed()});
  out.history.status = "max_iters";

  if (res.residual <= opts.tol) {
    out.history.status = "converged";
  } else {
    double step = opts.step0;
    if (step <= 0.0) {
      // Lipschitz probe of the gradient along a projected trial move
      const ControlField probe = project_control(prob, out.control.data - 0.1 * grad.mean);
      const double dist = std::sqrt(control_dot(prob, probe.data - out.control.data,
                                                probe.data - out.control.data));
      double lip = 0.0;
      if (dist > 0.0) {
        const GradientEstimate gp =
            estimate_gradient(prob, probe, opts.n_paths, iter_seed(0), opts.workers);
        lip = std::sqrt(control_dot(prob, gp.mean - grad.mean, gp.mean - grad.mean)) / dist;
      }
      step = 1.0 / (1.0 + lip);
    }
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
      const std::uint64_t seed = iter_seed(iter);
      if (!opts.crn) cost = estimate_cost(prob, out.control, opts.n_paths, seed, opts.workers);

      bool accepted = false;
      for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
        const ControlField trial =
            project_control(prob, out.control.data - step * grad.mean);
        const RowMat move = out.control.data - trial.data;
        const double predicted = control_dot(prob, grad.mean, move);
        if (predicted <= 0.0) break;  // projection blocks every descent direction
        const CostEstimate trial_cost =
            estimate_cost(prob, trial, opts.n_paths, seed, opts.workers);
        if (trial_cost.value <= cost.value - opts.armijo_slope * predicted) {
          out.control = trial;
          cost = trial_cost;
          accepted = true;
          break;
        }
        step *= opts.backtrack;
      }
      if (!accepted) {
        out.history.status = "stalled";
        break;
      }

      grad = estimate_gradient(prob, out.control, opts.n_paths, seed, opts.workers);
      res = smp_residual(prob.box, out.control, grad.mean, opts.residual_step);
      out.history.rows.push_back(
          {iter, cost.value, cost.half_width, res.residual, step, elapsed()});
      if (res.residual <= opts.tol) {
        out.history.status = "converged";
        break;
      }
    }
  }

  out.report.residual = res.residual;
  out.report.residual_step = opts.residual_step;
  out.report.witness = res.witness;
  out.report.gradient = grad.mean;
  out.report.gradient_max_abs = grad.mean.size() ? grad.mean.cwiseAbs().maxCoeff() : 0.0;
  if (opts.with_sufficiency) {
    // Certificate evaluated on the noise-free nominal path.  The returned
    // control carries Monte Carlo error, so the stationarity tolerance is
    // widened to the 95% precision of the gradient estimate.
    const double mc = grad.std_error.size() ? 1.96 * grad.std_error.maxCoeff() : 0.0;
    const double cert_tol = std::max(opts.sufficiency_tol, res.residual + mc);
    Problem nominal = prob;
    nominal.noise_on = false;
    const StateTrajectory traj = solve_forward(nominal, out.control, 0);
    const AdjointTrajectory adj = solve_adjoint_pathwise(nominal, traj, out.control);
    out.report.sufficiency = check_sufficient(nominal, traj, adj, out.control, cert_tol);
  }
  return out;
}

}  // namespace smp
