#include "smp/adjoint.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <cmath>

#include "smp/dynamics.hpp"
#include "smp/errors.hpp"
#include "smp/noise.hpp"
#include "smp/operators.hpp"

namespace smp {

AdjointTrajectory solve_adjoint_pathwise(const Problem& prob, const StateTrajectory& traj,
                                         const ControlField& control) {
  validate_control(prob, control);
  check_trajectory_grid(traj);
  require(traj.steps() == prob.steps, "trajectory step count does not match problem");
  require(traj.control_fingerprint == control.fingerprint(),
          "trajectory was computed with a different control");

  const Mesh& mesh = prob.mesh;
  const double dt = prob.dt();
  const int N = prob.steps;

  AdjointTrajectory adj;
  adj.times = traj.times;
  adj.path_id = traj.path_id;
  adj.P.resize(N + 1);

  const DualField psi = terminal_cost_dy(mesh, prob.coeffs, traj.states[N]);
  adj.P[N] = riesz(mesh, psi);

  // With a frozen step matrix one transpose factorization serves all steps.
  const bool affine = prob.coeffs.flags.state_independent_jacobians &&
                      prob.coeffs.flags.reaction_affine_control;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> frozen_lu;
  if (affine) {
    const Eigen::SparseMatrix<double> st =
        step_matrix(prob, traj.states[N], control.data.row(N - 1).transpose()).transpose();
    frozen_lu.compute(st);
    require(frozen_lu.info() == Eigen::Success, "adjoint step factorization failed");
  }

  Field pi_next = Field::Zero(mesh.n_nodes());
  for (int j = N; j >= 1; --j) {
    const auto u_prev = control.data.row(j - 1).transpose();
    // running-cost sources of the trapezoid quadrature attached to Y_j
    Eigen::VectorXd b;
    if (j == N) {
      b = psi.w + 0.5 * dt * running_cost_dy(mesh, prob.coeffs, traj.states[N], u_prev).w;
    } else {
      const auto u_cur = control.data.row(j).transpose();
      b = 0.5 * dt *
          (running_cost_dy(mesh, prob.coeffs, traj.states[j], u_prev).w +
           running_cost_dy(mesh, prob.coeffs, traj.states[j], u_cur).w);
    }
    const Eigen::VectorXd rhs = mesh.mass_H.cwiseProduct(pi_next) + b;
    Field pi;
    if (affine) {
      pi = frozen_lu.solve(rhs);
    } else {
      const Eigen::SparseMatrix<double> st =
          step_matrix(prob, traj.states[j], u_prev).transpose();
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(st);
      require(lu.info() == Eigen::Success,
              "adjoint step factorization failed at step " + std::to_string(j));
      pi = lu.solve(rhs);
    }
    require(pi.allFinite(), "adjoint state has non-finite entries at step " + std::to_string(j));
    adj.P[j - 1] = pi;
    pi_next = pi;
  }
  return adj;
}

namespace {

// fixed functional list: constant, interior/boundary averages and their
// quadratic products, plus leading noise-mode projections
std::vector<std::string> basis_names(const NoiseSpec& spec) {
  std::vector<std::string> names = {"1",      "avgO",      "avgB",
                                    "avgO^2", "avgO*avgB", "avgB^2"};
  const int k = std::min(4, spec.n_modes());
  for (int i = 0; i < k; ++i) names.push_back("proj" + std::to_string(i));
  return names;
}

Eigen::VectorXd basis_row(const Mesh& mesh, const NoiseSpec& spec, const Field& y, int size) {
  double avg_o = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) avg_o += mesh.mass_interior[i] * y[i];
  avg_o /= mesh.volume();
  double avg_b = 0.0;
  for (int b = 0; b < mesh.n_boundary(); ++b)
    avg_b += mesh.mass_boundary[b] * y[mesh.boundary_nodes[b]];
  avg_b /= mesh.surface();

  Eigen::VectorXd row(size);
  row[0] = 1.0;
  row[1] = avg_o;
  row[2] = avg_b;
  row[3] = avg_o * avg_o;
  row[4] = avg_o * avg_b;
  row[5] = avg_b * avg_b;
  for (int k = 6; k < size; ++k) row[k] = mode_projection(mesh, spec, y, k - 6);
  return row;
}

// Truncated-SVD least squares of multi-RHS targets; falls back to the column
// mean when directions beyond the constant are lost.
struct FitResult {
  Eigen::MatrixXd fitted;  // n_paths x n_targets
  bool truncated = false;
};

FitResult fit_targets(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& targets,
                      double threshold) {
  FitResult out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(threshold);
  if (svd.rank() < phi.cols()) {
    out.truncated = true;
    const Eigen::RowVectorXd mean = targets.colwise().mean();
    out.fitted = mean.replicate(targets.rows(), 1);
    return out;
  }
  const Eigen::MatrixXd beta = svd.solve(targets);
  out.fitted = phi * beta;
  return out;
}

}  // namespace

RegressionAdjoint solve_adjoint_regression(const Problem& prob,
                                           const std::vector<StateTrajectory>& trajs,
                                           const ControlField& control, double svd_threshold) {
  require(!trajs.empty(), "regression needs at least one trajectory");
  const Mesh& mesh = prob.mesh;
  const NoiseSpec& spec = prob.noise;
  const int n_paths = static_cast<int>(trajs.size());
  const int N = prob.steps;
  const int n_modes = spec.n_modes();
  const double dt = prob.dt();

  RegressionAdjoint out;
  out.info.n_paths = n_paths;
  out.info.basis = basis_names(spec);
  out.info.n_regressors = static_cast<int>(out.info.basis.size());
  const int K = out.info.n_regressors;

  out.pathwise.reserve(n_paths);
  for (const auto& traj : trajs) out.pathwise.push_back(solve_adjoint_pathwise(prob, traj, control));

  // regressor rows per path and time index
  std::vector<Eigen::MatrixXd> phi(N + 1);
  for (int t = 0; t <= N; ++t) {
    phi[t].resize(n_paths, K);
    for (int i = 0; i < n_paths; ++i)
      phi[t].row(i) = basis_row(mesh, spec, trajs[i].states[t], K).transpose();
  }

  out.adapted.resize(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    out.adapted[i].times = trajs[i].times;
    out.adapted[i].path_id = trajs[i].path_id;
    out.adapted[i].P.resize(N + 1);
  }

  const int n_nodes = mesh.n_nodes();
  Eigen::MatrixXd targets(n_paths, n_nodes);

  // adapted co-state: project the pathwise adjoint at t onto functionals of Y_t
  for (int t = 0; t <= N; ++t) {
    for (int i = 0; i < n_paths; ++i) targets.row(i) = out.pathwise[i].P[t].transpose();
    const FitResult fit = fit_targets(phi[t], targets, svd_threshold);
    if (fit.truncated) {
      out.info.rank_deficient = true;
      ++out.info.fallback_steps;
    }
    for (int i = 0; i < n_paths; ++i) out.adapted[i].P[t] = fit.fitted.row(i).transpose();
  }

  // Q-loadings: slope of the unpredictable part of P_{n+1} against the
  // standardized mode increments, read off in the direction of each mode
  out.q_loadings = Eigen::MatrixXd::Zero(N, n_modes);
  const Eigen::VectorXd sig = spec.sigmas();
  if (n_modes > 0) {
    Eigen::MatrixXd xi(n_paths, n_modes);
    Eigen::MatrixXd design(n_paths, 1 + n_modes);
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < n_paths; ++i)
        xi.row(i) = mode_normals(spec, prob.master_seed, trajs[i].path_id, n).transpose();
      for (int i = 0; i < n_paths; ++i)
        targets.row(i) = out.pathwise[i].P[n + 1].transpose();
      // conditional mean given time-n functionals
      const FitResult cond = fit_targets(phi[n], targets, svd_threshold);
      const Eigen::MatrixXd resid = targets - cond.fitted;

      design.col(0).setOnes();
      design.rightCols(n_modes) = xi;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                            Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(svd_threshold);
      const Eigen::MatrixXd beta = svd.solve(resid);  // (1 + n_modes) x n_nodes
      for (int k = 0; k < n_modes; ++k) {
        const double scale = sig[k] * std::sqrt(dt);
        if (scale <= 0.0) continue;
        const Field slope = beta.row(1 + k).transpose();
        out.q_loadings(n, k) = mode_projection(mesh, spec, slope, k) / scale;
      }
    }
  }
  for (int i = 0; i < n_paths; ++i) out.adapted[i].q_loadings = out.q_loadings;
  return out;
}

}  // namespace smp
