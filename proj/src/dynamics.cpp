#include "smp/dynamics.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "smp/errors.hpp"
#include "smp/operators.hpp"

namespace smp {

namespace {

// residual H-norm: sqrt(sum r_i^2 / M_i), the norm of the Riesz representative
double residual_norm(const Mesh& mesh, const Eigen::VectorXd& r) {
  return std::sqrt((r.array().square() / mesh.mass_H.array()).sum());
}

}  // namespace

Eigen::SparseMatrix<double> step_matrix(const Problem& prob, const Field& y, ConstVec u) {
  Eigen::SparseMatrix<double> s = linearization_matrix(prob.mesh, prob.coeffs, y, u);
  s *= -prob.dt();
  Eigen::SparseMatrix<double> mass(prob.mesh.n_nodes(), prob.mesh.n_nodes());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(prob.mesh.n_nodes());
  for (int i = 0; i < prob.mesh.n_nodes(); ++i)
    trips.emplace_back(i, i, prob.mesh.mass_H[i]);
  mass.setFromTriplets(trips.begin(), trips.end());
  return mass + s;
}

void validate_control(const Problem& prob, const ControlField& control) {
  require(control.steps == prob.steps, "control has " + std::to_string(control.steps) +
                                           " steps, problem has " + std::to_string(prob.steps));
  require(control.bnodes == prob.mesh.n_boundary() && control.m == prob.coeffs.control_dim,
          "control layout does not match boundary nodes x control_dim");
  require(control.data.allFinite(), "control has non-finite entries");
  for (int n = 0; n < control.steps; ++n)
    for (int b = 0; b < control.bnodes; ++b)
      require(prob.box.contains(control.value(n, b), 1e-12),
              "control value at step " + std::to_string(n) + ", boundary node " +
                  std::to_string(b) + " lies outside the admissible box");
}

StateTrajectory solve_forward(const Problem& prob, const ControlField& control,
                              std::uint64_t path_id, const NewtonOptions& newton) {
  validate_control(prob, control);
  require(prob.y0.size() == prob.mesh.n_nodes(), "initial state size does not match mesh");
  require(prob.y0.allFinite(), "initial state has non-finite entries");
  require(prob.steps >= 1, "problem needs at least one time step");

  const Mesh& mesh = prob.mesh;
  const double dt = prob.dt();
  const int n = mesh.n_nodes();

  StateTrajectory traj;
  traj.path_id = path_id;
  traj.control_fingerprint = control.fingerprint();
  traj.times.setLinSpaced(prob.steps + 1, 0.0, prob.T);
  traj.states.resize(prob.steps + 1);
  traj.states[0] = prob.y0;

  // With state-independent Jacobians and control-affine reaction the step
  // matrix is constant: factor once, one solve per step.
  const bool affine = prob.coeffs.flags.state_independent_jacobians &&
                      prob.coeffs.flags.reaction_affine_control;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> frozen_lu;
  if (affine) {
    frozen_lu.compute(step_matrix(prob, prob.y0, control.data.row(0).transpose()));
    require(frozen_lu.info() == Eigen::Success, "step matrix factorization failed");
  }

  Field y_prev = prob.y0;
  for (int step = 0; step < prob.steps; ++step) {
    const auto u = control.data.row(step).transpose();
    Field dw = Field::Zero(n);
    if (prob.noise_on)
      dw = sample_increment(mesh, prob.noise, dt, prob.master_seed, path_id, step);

    const Field rhs_state = y_prev + dw;
    auto residual = [&](const Field& y) -> Eigen::VectorXd {
      return mesh.mass_H.cwiseProduct(y - rhs_state) - dt * apply_A(mesh, prob.coeffs, y, u).w;
    };

    Field y = rhs_state;  // predictor
    Eigen::VectorXd r = residual(y);
    double rn = residual_norm(mesh, r);
    int iter = 0;
    while (rn > newton.tol) {
      if (iter >= newton.max_iter) {
        std::ostringstream os;
        os << "Newton did not converge in " << newton.max_iter << " iterations at step " << step
           << " (dt=" << dt << ", residual=" << rn << ")";
        fail(os.str());
      }
      Field delta;
      if (affine) {
        delta = frozen_lu.solve(-r);
      } else {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(step_matrix(prob, y, u));
        require(lu.info() == Eigen::Success, "Newton Jacobian factorization failed");
        delta = lu.solve(-r);
      }
      // damped update: halve until the residual norm decreases
      double t = 1.0;
      while (true) {
        const Field y_try = y + t * delta;
        const Eigen::VectorXd r_try = residual(y_try);
        const double rn_try = residual_norm(mesh, r_try);
        if (rn_try < rn || rn_try <= newton.tol) {
          y = y_try;
          r = r_try;
          rn = rn_try;
          break;
        }
        t *= 0.5;
        require(t > 1e-12, "Newton step damping stalled at step " + std::to_string(step));
      }
      ++iter;
    }
    require(y.allFinite(), "forward state has non-finite entries at step " +
                               std::to_string(step + 1));
    traj.states[step + 1] = y;
    y_prev = y;
  }
  return traj;
}

StateTrajectory solve_variational(const Problem& prob, const StateTrajectory& base,
                                  const ControlField& control, const ControlField& direction) {
  validate_control(prob, control);
  require(base.steps() == prob.steps, "base trajectory step count does not match problem");
  check_trajectory_grid(base);
  require(base.control_fingerprint == control.fingerprint(),
          "base trajectory was computed with a different control");
  require(direction.steps == control.steps && direction.bnodes == control.bnodes &&
              direction.m == control.m,
          "direction layout does not match control");
  require(direction.data.allFinite(), "direction has non-finite entries");

  const Mesh& mesh = prob.mesh;
  const double dt = prob.dt();
  const int m = prob.coeffs.control_dim;

  StateTrajectory var;
  var.path_id = base.path_id;
  var.control_fingerprint = base.control_fingerprint;
  var.times = base.times;
  var.states.resize(prob.steps + 1);
  var.states[0] = Field::Zero(mesh.n_nodes());

  for (int step = 0; step < prob.steps; ++step) {
    const auto u = control.data.row(step).transpose();
    const Field& y_next = base.states[step + 1];

    Eigen::VectorXd rhs = mesh.mass_H.cwiseProduct(var.states[step]);
    for (int b = 0; b < mesh.n_boundary(); ++b) {
      const int i = mesh.boundary_nodes[b];
      const Eigen::VectorXd du =
          prob.coeffs.reaction_du(mesh.nodes.row(i), y_next[i], u.segment(b * m, m));
      rhs[i] -= dt * mesh.mass_boundary[b] * du.dot(direction.value(step, b));
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(step_matrix(prob, y_next, u));
    require(lu.info() == Eigen::Success, "variational step factorization failed");
    var.states[step + 1] = lu.solve(rhs);
  }
  return var;
}

double energy_step_margin(const Problem& prob, const Field& y_prev, const Field& y_next,
                          ConstVec u) {
  const Mesh& mesh = prob.mesh;
  const double a = inner_H(mesh, y_next, y_next) - inner_H(mesh, y_prev, y_prev);
  const double diss = pairing(apply_A(mesh, prob.coeffs, y_next, u), y_next);
  return a - 2.0 * prob.dt() * diss;
}

double gronwall_bound(const Problem& prob, const ControlField& control, std::uint64_t path_id) {
  validate_control(prob, control);
  const Mesh& mesh = prob.mesh;
  const double dt = prob.dt();
  const double delta = prob.coeffs.delta;

  // zero-point working of the flux and reaction, bounded by the growth data
  double d_flux = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Eigen::Vector2d a0 = prob.coeffs.flux(mesh.elem_centroid.row(e), Eigen::Vector2d::Zero());
    d_flux += mesh.elem_volume[e] * a0.squaredNorm() / (4.0 * delta);
  }
  double d_reac = 0.0;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    double umax = 0.0;
    for (int n = 0; n < control.steps; ++n)
      umax = std::max(umax, control.value(n, b).norm());
    const double rt = prob.coeffs.rhotilde(mesh.nodes.row(i));
    const double z = prob.coeffs.c0 * (rt + umax);
    d_reac += mesh.mass_boundary[b] * z * z / (4.0 * delta);
  }
  const double d_total = d_flux + d_reac;

  double noise_sq = 0.0;
  if (prob.noise_on)
    for (int step = 0; step < prob.steps; ++step) {
      const Field dw =
          sample_increment(mesh, prob.noise, dt, prob.master_seed, path_id, step);
      noise_sq += inner_H(mesh, dw, dw);
    }

  const double y0_sq = inner_H(mesh, prob.y0, prob.y0);
  return std::pow(1.0 + dt, prob.steps) *
         (y0_sq + (1.0 + 1.0 / dt) * noise_sq + 2.0 * prob.T * d_total);
}

}  // namespace smp
