#include "smp/maximum_principle.hpp"

#include <cmath>
#include <limits>

#include "smp/dynamics.hpp"
#include "smp/errors.hpp"
#include "smp/operators.hpp"

namespace smp {

double hamiltonian(const Mesh& mesh, const CoefficientSet& coeffs, const NoiseSpec& noise,
                   const Field& y, ConstVec u, const Field& p, ConstVec q_loadings) {
  require(y.size() == mesh.n_nodes() && p.size() == mesh.n_nodes(),
          "state and co-state must be nodal fields");
  require(q_loadings.size() == 0 || q_loadings.size() == noise.n_modes(),
          "q loadings must be empty or cover every noise mode");
  double h = pairing(apply_A(mesh, coeffs, y, u), p) + running_cost(mesh, coeffs, y, u);
  if (q_loadings.size() > 0) {
    const Eigen::VectorXd sig = noise.sigmas();
    h += sig.dot(q_loadings);
  }
  return h;
}

RowMat gradient_density(const Problem& prob, const StateTrajectory& traj,
                        const ControlField& control, const AdjointTrajectory& adj) {
  validate_control(prob, control);
  require(traj.steps() == prob.steps && adj.steps() == prob.steps,
          "trajectory/adjoint step count does not match problem");
  require(traj.control_fingerprint == control.fingerprint(),
          "trajectory was computed with a different control");

  const Mesh& mesh = prob.mesh;
  const int m = prob.coeffs.control_dim;
  RowMat g(control.steps, control.bnodes * m);
  for (int n = 0; n < control.steps; ++n) {
    for (int b = 0; b < control.bnodes; ++b) {
      const int i = mesh.boundary_nodes[b];
      const Eigen::Vector2d xi = mesh.nodes.row(i).transpose();
      const Eigen::VectorXd u = control.value(n, b);
      const double yb0 = traj.states[n][i];
      const double yb1 = traj.states[n + 1][i];
      const Eigen::VectorXd du_cost = 0.5 * (prob.coeffs.ellbar_du(xi, yb0, u) +
                                             prob.coeffs.ellbar_du(xi, yb1, u));
      const Eigen::VectorXd du_reac = prob.coeffs.reaction_du(xi, yb1, u);
      g.row(n).segment(b * m, m) = (du_cost - adj.P[n][i] * du_reac).transpose();
    }
  }
  return g;
}

ResidualResult smp_residual(const ControlSet& box, const ControlField& control,
                            const RowMat& gradient, double step_size) {
  require(step_size > 0.0, "projection step size must be positive");
  require(gradient.rows() == control.data.rows() && gradient.cols() == control.data.cols(),
          "gradient layout does not match control");

  ResidualResult out;
  const int m = box.dim();
  for (int n = 0; n < control.steps; ++n)
    for (int b = 0; b < control.bnodes; ++b) {
      const Eigen::VectorXd u = control.value(n, b);
      const Eigen::VectorXd g = gradient.row(n).segment(b * m, m);
      const Eigen::VectorXd proj = box.project(u - step_size * g);
      const double r = (u - proj).norm() / step_size;
      if (r > out.residual || out.witness.step < 0) {
        out.residual = r;
        out.witness.step = n;
        out.witness.bnode = b;
        out.witness.direction = g;
        out.witness.value = r;
      }
    }
  return out;
}

namespace {

struct BranchOutcome {
  bool flags_ok = false;
  bool sign_ok = false;
  bool cone_ok = false;
  double min_sigma_pbar = 0.0;
  std::map<std::string, bool> hypotheses;
  std::optional<ResidualWitness> witness;
};

BranchOutcome evaluate_branch(const Problem& prob, const AdjointTrajectory& adj,
                              const ControlField& control, const RowMat& gradient, int sigma,
                              double tol) {
  const auto& fl = prob.coeffs.flags;
  BranchOutcome out;
  out.hypotheses["flux_affine"] = fl.flux_affine;
  out.hypotheses["running_interior_convex"] = fl.ell_convex;
  out.hypotheses["running_boundary_convex"] = fl.ellbar_convex;
  out.hypotheses["terminal_interior_convex"] = fl.psi_convex;
  out.hypotheses["terminal_boundary_convex"] = fl.psibar_convex;
  out.hypotheses["sigma_reaction_convex"] =
      sigma > 0 ? fl.neg_reaction_convex : fl.reaction_convex;
  out.flags_ok = true;
  for (const auto& [name, ok] : out.hypotheses) out.flags_ok = out.flags_ok && ok;

  const Mesh& mesh = prob.mesh;
  const int m = prob.coeffs.control_dim;
  out.sign_ok = true;
  out.cone_ok = true;
  out.min_sigma_pbar = std::numeric_limits<double>::infinity();
  double worst = -1.0;
  for (int n = 0; n <= control.steps; ++n)
    for (int b = 0; b < control.bnodes; ++b) {
      const double sp = sigma * adj.P[n][mesh.boundary_nodes[b]];
      out.min_sigma_pbar = std::min(out.min_sigma_pbar, sp);
      if (sp < -tol && -sp > worst && n < control.steps) {
        // sign violations on control intervals get witness priority
        worst = -sp;
        ResidualWitness w;
        w.step = n;
        w.bnode = b;
        w.direction = gradient.row(n).segment(b * m, m);
        w.value = sp;
        out.witness = w;
      }
    }
  out.sign_ok = out.min_sigma_pbar >= -tol;

  for (int n = 0; n < control.steps && out.cone_ok; ++n)
    for (int b = 0; b < control.bnodes; ++b) {
      const Eigen::VectorXd u = control.value(n, b);
      const Eigen::VectorXd v = -gradient.row(n).segment(b * m, m).transpose();
      if (!normal_cone_contains(prob.box, u, v, tol)) {
        out.cone_ok = false;
        if (!out.witness) {
          ResidualWitness w;
          w.step = n;
          w.bnode = b;
          w.direction = -v;
          w.value = v.cwiseAbs().maxCoeff();
          out.witness = w;
        }
        break;
      }
    }
  out.hypotheses["sign_condition"] = out.sign_ok;
  out.hypotheses["normal_cone"] = out.cone_ok;
  return out;
}

}  // namespace

SufficiencyResult check_sufficient(const Problem& prob, const StateTrajectory& traj,
                                   const AdjointTrajectory& adj, const ControlField& control,
                                   double tol) {
  require(tol >= 0.0, "tolerance must be nonnegative");
  const RowMat gradient = gradient_density(prob, traj, control, adj);

  const BranchOutcome plus = evaluate_branch(prob, adj, control, gradient, +1, tol);
  const BranchOutcome minus = evaluate_branch(prob, adj, control, gradient, -1, tol);

  auto settle = [](const BranchOutcome& br, int sigma) {
    SufficiencyResult r;
    r.sigma = sigma;
    r.hypotheses = br.hypotheses;
    r.min_sigma_pbar = br.min_sigma_pbar;
    r.witness = br.witness;
    if (!br.flags_ok)
      r.verdict = SufficiencyVerdict::not_applicable;
    else
      r.verdict = (br.sign_ok && br.cone_ok) ? SufficiencyVerdict::holds
                                             : SufficiencyVerdict::fails;
    return r;
  };

  const SufficiencyResult rp = settle(plus, +1);
  if (rp.verdict == SufficiencyVerdict::holds) return rp;
  const SufficiencyResult rm = settle(minus, -1);
  if (rm.verdict == SufficiencyVerdict::holds) return rm;
  // neither certifies: report the branch that got further
  if (rp.verdict == SufficiencyVerdict::fails) return rp;
  if (rm.verdict == SufficiencyVerdict::fails) return rm;
  return rp.min_sigma_pbar >= rm.min_sigma_pbar ? rp : rm;
}

std::string verdict_name(SufficiencyVerdict v) {
  switch (v) {
    case SufficiencyVerdict::holds: return "HOLDS";
    case SufficiencyVerdict::fails: return "FAILS";
    case SufficiencyVerdict::not_applicable: return "NOT-APPLICABLE";
  }
  return "NOT-APPLICABLE";
}

}  // namespace smp
