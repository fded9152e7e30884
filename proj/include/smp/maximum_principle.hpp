#pragma once

#include <map>
#include <optional>
#include <string>

#include "smp/adjoint.hpp"
#include "smp/field.hpp"
#include "smp/problem.hpp"

namespace smp {

// H(y,u,p,q) = <A(y,u), p> + L(y,u) + tr(q B); q_loadings are the diagonal
// actions of Q on the noise modes, ordered interior then boundary.
double hamiltonian(const Mesh& mesh, const CoefficientSet& coeffs, const NoiseSpec& noise,
                   const Field& y, ConstVec u, const Field& p, ConstVec q_loadings);

// Pointwise gradient density of the discrete cost in the control:
//   g_n(b) = 1/2 [D_u lbar(Y_n) + D_u lbar(Y_{n+1})] - Pbar_n . D_u gamma(Y_{n+1})
// evaluated with the step control u_n; the directional derivative of the cost
// is sum_n dt sum_b w_b g_n(b) . d_n(b).  Shape matches ControlField::data.
RowMat gradient_density(const Problem& prob, const StateTrajectory& traj,
                        const ControlField& control, const AdjointTrajectory& adj);

struct ResidualWitness {
  int step = -1;
  int bnode = -1;
  Eigen::VectorXd direction;  // gradient density at the worst point
  double value = 0.0;
};

// max_{n,b} || u - proj_U(u - step_size g) || / step_size and its argmax.
struct ResidualResult {
  double residual = 0.0;
  ResidualWitness witness;
};

ResidualResult smp_residual(const ControlSet& box, const ControlField& control,
                            const RowMat& gradient, double step_size);

enum class SufficiencyVerdict { holds, fails, not_applicable };

struct SufficiencyResult {
  SufficiencyVerdict verdict = SufficiencyVerdict::not_applicable;
  int sigma = 0;  // sign branch that was certified (or best attempted)
  std::map<std::string, bool> hypotheses;
  double min_sigma_pbar = 0.0;          // min over (n,b) of sigma * Pbar
  std::optional<ResidualWitness> witness;  // violating point when it fails
};

// Certificate of the sufficient optimality condition: convexity flags of the
// data, a sign condition sigma*Pbar >= -tol on the boundary co-state, and the
// normal-cone condition Pbar . D_u gamma - D_u lbar in N_U(u) everywhere.
SufficiencyResult check_sufficient(const Problem& prob, const StateTrajectory& traj,
                                   const AdjointTrajectory& adj, const ControlField& control,
                                   double tol);

struct OptimalityReport {
  double residual = 0.0;
  double residual_step = 1.0;
  ResidualWitness witness;
  SufficiencyResult sufficiency;
  double gradient_max_abs = 0.0;
  RowMat gradient;  // snapshot, ControlField layout
};

std::string verdict_name(SufficiencyVerdict v);

}  // namespace smp
