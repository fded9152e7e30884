#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "smp/adjoint.hpp"
#include "smp/dynamics.hpp"
#include "smp/errors.hpp"
#include "smp/operators.hpp"

using namespace smp;
using testutil::lq_interval;
using testutil::semilinear_interval;

namespace {

Problem zero_cost_problem(int n, int steps, bool noise) {
  BuiltinParams p;
  p.w_ell = p.w_ellbar = p.w_psi = p.w_psibar = 0.0;
  p.control_penalty = 0.0;
  BuiltinProblem bp = builtin_problem("lq-dbc", p);
  Problem prob;
  prob.mesh = build_mesh(IntervalDesc{0.0, 1.0, n});
  prob.coeffs = bp.coeffs;
  prob.box = bp.box;
  prob.noise = build_noise(prob.mesh, 2, 2, 0.1, 1.0);
  prob.noise_on = noise;
  prob.T = 1.0;
  prob.steps = steps;
  prob.y0 = make_initial_state(prob.mesh, "bump", 1.0);
  prob.master_seed = 5;
  return prob;
}

double avg_interior(const Mesh& mesh, const Field& y) {
  double acc = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) acc += mesh.mass_interior[i] * y[i];
  return acc / mesh.volume();
}

}  // namespace

TEST_CASE("zero running and terminal costs give a vanishing co-state") {
  Problem prob = zero_cost_problem(15, 20, true);
  ControlField u = testutil::random_control(prob, 3, 0.4);
  StateTrajectory traj = solve_forward(prob, u, 0);
  AdjointTrajectory adj = solve_adjoint_pathwise(prob, traj, u);
  for (const Field& p : adj.P) CHECK(p.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("the zero trajectory of the lq problem has a vanishing co-state") {
  Problem prob = lq_interval(15, 20, false, 0.0);
  prob.y0.setZero();
  StateTrajectory traj = solve_forward(prob, prob.zero_control(), 0);
  AdjointTrajectory adj = solve_adjoint_pathwise(prob, traj, prob.zero_control());
  for (const Field& p : adj.P) CHECK(p.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("terminal slot carries the Riesz lift of the terminal cost slope") {
  Problem prob = semilinear_interval(15, 12, true);
  ControlField u = testutil::random_control(prob, 4, 0.3);
  StateTrajectory traj = solve_forward(prob, u, 1);
  AdjointTrajectory adj = solve_adjoint_pathwise(prob, traj, u);
  Field expected = riesz(prob.mesh, terminal_cost_dy(prob.mesh, prob.coeffs, traj.states.back()));
  CHECK((adj.P[prob.steps] - expected).cwiseAbs().maxCoeff() < 1e-15);
}

// Transposition identity of the discrete scheme: for any control direction,
// the terminal pairing of the variational solution balances the multiplier
// action on the control source against the running-cost sources.
TEST_CASE("discrete duality holds to roundoff per path") {
  for (bool semilinear : {false, true}) {
    Problem prob = semilinear ? semilinear_interval(15, 20, true) : lq_interval(15, 20, true);
    ControlField u = testutil::random_control(prob, 6, 0.3);
    ControlField dir = testutil::random_control(prob, 7, 1.0);
    const double dt = prob.dt();
    const int N = prob.steps;

    for (std::uint64_t path = 0; path < 5; ++path) {
      StateTrajectory traj = solve_forward(prob, u, path);
      StateTrajectory z = solve_variational(prob, traj, u, dir);
      AdjointTrajectory adj = solve_adjoint_pathwise(prob, traj, u);

      double lhs = pairing(terminal_cost_dy(prob.mesh, prob.coeffs, traj.states[N]),
                           z.states[N]);
      for (int j = 1; j <= N; ++j) {
        const auto u_prev = u.data.row(j - 1).transpose();
        lhs += 0.5 * dt * pairing(running_cost_dy(prob.mesh, prob.coeffs, traj.states[j], u_prev),
                                  z.states[j]);
        if (j < N) {
          const auto u_cur = u.data.row(j).transpose();
          lhs += 0.5 * dt * pairing(running_cost_dy(prob.mesh, prob.coeffs, traj.states[j], u_cur),
                                    z.states[j]);
        }
      }

      double rhs = 0.0;
      for (int n = 0; n < N; ++n) {
        const Eigen::MatrixXd du = reaction_du_matrix(prob.mesh, prob.coeffs,
                                                      traj.states[n + 1],
                                                      u.data.row(n).transpose());
        for (int b = 0; b < prob.n_bnodes(); ++b) {
          const int i = prob.mesh.boundary_nodes[b];
          const Eigen::VectorXd d = dir.value(n, b);
          rhs -= dt * prob.mesh.mass_boundary[b] * adj.P[n][i] * du.row(b).dot(d);
        }
      }
      const double scale = std::max(1.0, std::abs(lhs));
      CHECK(std::abs(lhs - rhs) / scale < 1e-10);
    }
  }
}

TEST_CASE("noise-free regression degenerates to the pathwise adjoint") {
  Problem prob = lq_interval(15, 10, false);
  ControlField u = testutil::random_control(prob, 8, 0.3);
  std::vector<StateTrajectory> trajs;
  for (int i = 0; i < 8; ++i) trajs.push_back(solve_forward(prob, u, i));
  RegressionAdjoint reg = solve_adjoint_regression(prob, trajs, u);

  REQUIRE(reg.adapted.size() == 8);
  for (int i = 0; i < 8; ++i)
    for (int t = 0; t <= prob.steps; ++t)
      CHECK((reg.adapted[i].P[t] - reg.pathwise[i].P[t]).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(reg.q_loadings.cwiseAbs().maxCoeff() < 1e-10);
  // identical paths leave only the constant direction
  CHECK(reg.info.rank_deficient);
  CHECK(reg.info.fallback_steps == prob.steps + 1);
}

TEST_CASE("zero-cost regression returns zero multipliers and loadings") {
  Problem prob = zero_cost_problem(15, 10, true);
  ControlField u = testutil::random_control(prob, 9, 0.3);
  std::vector<StateTrajectory> trajs;
  for (int i = 0; i < 16; ++i) trajs.push_back(solve_forward(prob, u, i));
  RegressionAdjoint reg = solve_adjoint_regression(prob, trajs, u);
  for (const auto& adj : reg.adapted)
    for (const Field& p : adj.P) CHECK(p.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(reg.q_loadings.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the regressor dictionary stays small and named") {
  Problem prob = lq_interval(15, 5, true);
  ControlField u = prob.zero_control();
  std::vector<StateTrajectory> trajs;
  for (int i = 0; i < 12; ++i) trajs.push_back(solve_forward(prob, u, i));
  RegressionAdjoint reg = solve_adjoint_regression(prob, trajs, u);
  CHECK(reg.info.n_regressors <= 20);
  CHECK(reg.info.n_regressors == static_cast<int>(reg.info.basis.size()));
  CHECK(reg.info.basis.front() == "1");
  CHECK(reg.info.n_paths == 12);
}

TEST_CASE("regression preserves ensemble averages of adapted functionals") {
  Problem prob = lq_interval(21, 20, true);
  ControlField u = testutil::random_control(prob, 10, 0.3);
  const int n_paths = 200;
  std::vector<StateTrajectory> trajs;
  trajs.reserve(n_paths);
  for (int i = 0; i < n_paths; ++i) trajs.push_back(solve_forward(prob, u, i));
  RegressionAdjoint reg = solve_adjoint_regression(prob, trajs, u);

  const Field probe = testutil::random_field(prob.mesh.n_nodes(), 77);
  const double dt = prob.dt();

  // deterministic weight: fitted values keep the sample mean exactly
  double det_gap = 0.0;
  for (int t = 0; t <= prob.steps; ++t) {
    double acc = 0.0;
    for (int i = 0; i < n_paths; ++i)
      acc += inner_H(prob.mesh, probe, reg.pathwise[i].P[t] - reg.adapted[i].P[t]);
    det_gap = std::max(det_gap, std::abs(acc / n_paths));
  }
  CHECK(det_gap < 1e-8);

  // weight inside the regressor span: orthogonality of the residuals
  double span_gap = 0.0;
  for (int t = 0; t <= prob.steps; ++t) {
    double acc = 0.0;
    for (int i = 0; i < n_paths; ++i)
      acc += avg_interior(prob.mesh, trajs[i].states[t]) *
             inner_H(prob.mesh, probe, reg.pathwise[i].P[t] - reg.adapted[i].P[t]);
    span_gap = std::max(span_gap, std::abs(acc / n_paths));
  }
  CHECK(span_gap < 1e-8);

  // nonlinear adapted weight: agreement within Monte Carlo resolution
  Eigen::VectorXd per_path = Eigen::VectorXd::Zero(n_paths);
  for (int i = 0; i < n_paths; ++i)
    for (int t = 0; t <= prob.steps; ++t)
      per_path[i] += dt * std::sin(avg_interior(prob.mesh, trajs[i].states[t])) *
                     inner_H(prob.mesh, probe, reg.pathwise[i].P[t] - reg.adapted[i].P[t]);
  const double mean = per_path.mean();
  const double sd = std::sqrt((per_path.array() - mean).square().sum() / (n_paths - 1));
  CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(double(n_paths)) + 1e-12);
}

TEST_CASE("adjoint solves guard their inputs") {
  Problem prob = lq_interval(11, 8, false);
  ControlField u = testutil::random_control(prob, 11, 0.2);
  StateTrajectory traj = solve_forward(prob, u, 0);
  ControlField other = testutil::random_control(prob, 12, 0.2);
  CHECK_THROWS_AS(solve_adjoint_pathwise(prob, traj, other), Error);
  CHECK_THROWS_AS(solve_adjoint_regression(prob, {}, u), Error);
}
