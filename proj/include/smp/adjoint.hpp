#pragma once

#include <optional>
#include <vector>

#include "smp/field.hpp"
#include "smp/problem.hpp"

namespace smp {

// Backward co-state of one path.  P[n] for n < steps is the multiplier of the
// step t_n -> t_{n+1} (the co-state sampled on that interval); P[steps] is the
// Riesz representative of the terminal cost derivative, so the terminal
// condition holds exactly.  The recursion is the exact transpose of the
// linearized forward scheme under the trapezoid-in-time cost quadrature:
//   S_j^T P[j-1] = M_H P[j] + running-cost sources,  S_j = M_H - dt DyA(Y_j, u_{j-1}).
struct AdjointTrajectory {
  Eigen::VectorXd times;
  std::vector<Field> P;
  // Q-loadings per step and mode (regression output; empty for pathwise runs).
  Eigen::MatrixXd q_loadings;  // steps x n_modes
  std::uint64_t path_id = 0;

  int steps() const { return static_cast<int>(P.size()) - 1; }
};

AdjointTrajectory solve_adjoint_pathwise(const Problem& prob, const StateTrajectory& traj,
                                         const ControlField& control);

// Diagnostics of the conditional-expectation regression.
struct RegressionInfo {
  int n_paths = 0;
  int n_regressors = 0;
  bool rank_deficient = false;      // truncated SVD dropped directions somewhere
  int fallback_steps = 0;           // steps where only the constant regressor survived
  std::vector<std::string> basis;   // names of the regressors used
};

struct RegressionAdjoint {
  // adapted co-state estimates per path (fitted values of the regression)
  std::vector<AdjointTrajectory> adapted;
  // ensemble pathwise adjoints (inputs of the regression)
  std::vector<AdjointTrajectory> pathwise;
  Eigen::MatrixXd q_loadings;  // steps x n_modes, ensemble estimate
  RegressionInfo info;
};

// Least-squares Monte Carlo estimate of the adapted pair (P, Q): pathwise
// adjoints are projected per step onto low-order functionals of the current
// state; Q-loadings are regressions of the unpredictable part against the
// normalized mode increments.
RegressionAdjoint solve_adjoint_regression(const Problem& prob,
                                           const std::vector<StateTrajectory>& trajs,
                                           const ControlField& control,
                                           double svd_threshold = 1e-8);

}  // namespace smp
