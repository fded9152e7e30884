#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "smp/dynamics.hpp"
#include "smp/errors.hpp"
#include "smp/maximum_principle.hpp"
#include "smp/optimizer.hpp"

using namespace smp;
using testutil::lq_interval;
using testutil::semilinear_interval;

TEST_CASE("the zero problem costs exactly nothing") {
  Problem prob = lq_interval(15, 20, false, 0.0);
  prob.y0.setZero();
  CostEstimate c = estimate_cost(prob, prob.zero_control(), 32, 1);
  CHECK(c.value == 0.0);
  CHECK(c.half_width == 0.0);
  // noise off: one deterministic path regardless of the request
  CHECK(c.n_paths == 1);
}

TEST_CASE("cost matches an independent requadrature of the dumped trajectory") {
  Problem prob = lq_interval(11, 12, false);
  ControlField u = testutil::random_control(prob, 3, 0.4);
  StateTrajectory traj = solve_forward(prob, u, 0);
  CostEstimate c = estimate_cost(prob, u, 1, prob.master_seed);

  // hand-rolled vertex quadrature and trapezoid time rule
  const Mesh& mesh = prob.mesh;
  auto lag = [&](const Field& y, int step) {
    double acc = 0.0;
    for (int i = 0; i < mesh.n_nodes(); ++i) acc += mesh.mass_interior[i] * 0.5 * y[i] * y[i];
    for (int b = 0; b < mesh.n_boundary(); ++b) {
      const double yb = y[mesh.boundary_nodes[b]];
      const double ub = u.data(step, b);
      acc += mesh.mass_boundary[b] * (0.5 * yb * yb + 0.5 * ub * ub);
    }
    return acc;
  };
  double total = 0.0;
  for (int n = 0; n < prob.steps; ++n)
    total += 0.5 * prob.dt() * (lag(traj.states[n], n) + lag(traj.states[n + 1], n));
  const Field& yN = traj.states[prob.steps];
  for (int i = 0; i < mesh.n_nodes(); ++i)
    total += mesh.mass_interior[i] * 0.5 * yN[i] * yN[i];
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const double yb = yN[mesh.boundary_nodes[b]];
    total += mesh.mass_boundary[b] * 0.5 * yb * yb;
  }

  CHECK(c.value == doctest::Approx(total).epsilon(1e-12));
  CHECK(c.value == doctest::Approx(pathwise_cost(prob, traj, u)).epsilon(1e-12));
}

TEST_CASE("estimates are reproducible under common random numbers") {
  Problem prob = lq_interval(15, 20, true);
  ControlField u = testutil::random_control(prob, 4, 0.3);
  CostEstimate a = estimate_cost(prob, u, 40, 9);
  CostEstimate b = estimate_cost(prob, u, 40, 9);
  CHECK(a.value == b.value);
  CHECK(a.half_width == b.half_width);

  GradientEstimate ga = estimate_gradient(prob, u, 40, 9);
  GradientEstimate gb = estimate_gradient(prob, u, 40, 9);
  CHECK((ga.mean - gb.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ga.std_error - gb.std_error).cwiseAbs().maxCoeff() == 0.0);

  CostEstimate other = estimate_cost(prob, u, 40, 10);
  CHECK(other.value != a.value);
}

TEST_CASE("confidence half-width shrinks like the square root of the paths") {
  Problem prob = lq_interval(15, 20, true);
  ControlField u = testutil::random_control(prob, 5, 0.3);
  CostEstimate small = estimate_cost(prob, u, 100, 21);
  CostEstimate large = estimate_cost(prob, u, 400, 21);
  REQUIRE(small.half_width > 0.0);
  const double ratio = small.half_width / large.half_width;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);

  GradientEstimate gs = estimate_gradient(prob, u, 100, 21);
  GradientEstimate gl = estimate_gradient(prob, u, 400, 21);
  const double se_ratio = gs.std_error.mean() / gl.std_error.mean();
  CHECK(se_ratio > 1.6);
  CHECK(se_ratio < 2.4);
}

TEST_CASE("ensemble gradient is unbiased for the additive-noise lq family") {
  Problem prob = lq_interval(15, 20, true);
  ControlField u = testutil::random_control(prob, 6, 0.3);
  GradientEstimate noisy = estimate_gradient(prob, u, 400, 3);

  Problem quiet = prob;
  quiet.noise_on = false;
  GradientEstimate nominal = estimate_gradient(quiet, u, 1, 3);
  CHECK(nominal.std_error.cwiseAbs().maxCoeff() == 0.0);

  for (int n = 0; n < u.steps; ++n)
    for (int j = 0; j < u.bnodes; ++j) {
      const double gap = std::abs(noisy.mean(n, j) - nominal.mean(n, j));
      CHECK(gap <= 4.0 * noisy.std_error(n, j) + 1e-12);
    }
}

TEST_CASE("optimizer terminates immediately at the optimum of the zero problem") {
  Problem prob = lq_interval(15, 20, false, 0.0);
  prob.y0.setZero();
  OptimizerOptions opts;
  opts.n_paths = 1;
  OptimizeResult run = run_optimizer(prob, prob.zero_control(), opts);
  CHECK(run.history.status == "converged");
  REQUIRE(run.history.rows.size() == 1);
  CHECK(run.history.rows[0].iteration == 0);
  CHECK(run.history.rows[0].residual == 0.0);
  CHECK(run.report.residual == 0.0);
  CHECK(run.control.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("accepted costs never increase under common random numbers") {
  Problem prob = lq_interval(21, 30, true);
  OptimizerOptions opts;
  opts.n_paths = 50;
  opts.max_iters = 25;
  opts.tol = 1e-7;  // keep iterating so several rows accumulate
  opts.with_sufficiency = false;
  opts.seed = 17;
  OptimizeResult run = run_optimizer(prob, prob.zero_control(), opts);
  REQUIRE(run.history.rows.size() >= 2);
  for (std::size_t i = 0; i < run.history.rows.size(); ++i) {
    const auto& row = run.history.rows[i];
    CHECK(row.iteration == static_cast<int>(i));
    if (i > 0) CHECK(row.cost <= run.history.rows[i - 1].cost + 1e-14);
  }
  CHECK_NOTHROW(validate_control(prob, run.control));
}

TEST_CASE("worker count never changes the arithmetic") {
  Problem prob = lq_interval(15, 20, true);
  OptimizerOptions opts;
  opts.n_paths = 30;
  opts.max_iters = 8;
  opts.with_sufficiency = false;
  OptimizeResult serial = run_optimizer(prob, prob.zero_control(), opts);
  opts.workers = 3;
  OptimizeResult parallel = run_optimizer(prob, prob.zero_control(), opts);

  REQUIRE(serial.history.rows.size() == parallel.history.rows.size());
  for (std::size_t i = 0; i < serial.history.rows.size(); ++i) {
    CHECK(serial.history.rows[i].cost == parallel.history.rows[i].cost);
    CHECK(serial.history.rows[i].residual == parallel.history.rows[i].residual);
    CHECK(serial.history.rows[i].step == parallel.history.rows[i].step);
  }
  CHECK((serial.control.data - parallel.control.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exhausted line searches stall gracefully at the best iterate") {
  Problem prob = lq_interval(15, 20, false);
  OptimizerOptions opts;
  opts.n_paths = 1;
  opts.max_backtracks = 0;
  opts.with_sufficiency = false;
  OptimizeResult run = run_optimizer(prob, prob.zero_control(), opts);
  CHECK(run.history.status == "stalled");
  CHECK(run.control.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("converged stochastic runs carry a full optimality report") {
  Problem prob = lq_interval(21, 25, true);
  OptimizerOptions opts;
  opts.n_paths = 40;
  opts.max_iters = 100;
  opts.tol = 5e-4;
  opts.seed = 11;
  OptimizeResult run = run_optimizer(prob, prob.zero_control(), opts);
  REQUIRE(run.history.status == "converged");
  CHECK(run.report.residual <= opts.tol);
  CHECK(run.report.residual_step == opts.residual_step);
  CHECK(run.report.gradient_max_abs >= 0.0);
  CHECK(run.report.gradient.rows() == prob.steps);
  CHECK(run.report.sufficiency.verdict == SufficiencyVerdict::holds);
  CHECK_NOTHROW(validate_control(prob, run.control));
}

TEST_CASE("fresh seeds per iteration still descend in the long run") {
  Problem prob = lq_interval(15, 15, true);
  OptimizerOptions opts;
  opts.n_paths = 60;
  opts.max_iters = 10;
  opts.crn = false;
  opts.with_sufficiency = false;
  OptimizeResult run = run_optimizer(prob, prob.zero_control(), opts);
  CHECK((run.history.status == "converged" || run.history.status == "max_iters" ||
         run.history.status == "stalled"));
  CHECK(run.history.rows.front().cost >= run.history.rows.back().cost - 0.05);
}

TEST_CASE("optimizer rejects inconsistent options and starts") {
  Problem prob = lq_interval(11, 10, false);
  OptimizerOptions opts;
  opts.n_paths = 0;
  CHECK_THROWS_AS(run_optimizer(prob, prob.zero_control(), opts), Error);
  opts.n_paths = 1;
  ControlField bad = ControlField::zeros(prob.steps + 2, prob.n_bnodes(), 1);
  CHECK_THROWS_AS(run_optimizer(prob, bad, opts), Error);
}
