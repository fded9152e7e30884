#pragma once

#include "smp/field.hpp"
#include "smp/problem.hpp"

namespace smp {

struct NewtonOptions {
  double tol = 1e-12;  // residual H-norm
  int max_iter = 50;
};

// Shape, finiteness and admissibility (box containment) of a control.
void validate_control(const Problem& prob, const ControlField& control);

// Implicit-step system matrix M_H - dt * D_yA(y, u); its transpose drives the
// backward co-state recursion.
Eigen::SparseMatrix<double> step_matrix(const Problem& prob, const Field& y, ConstVec u);

// One path of the controlled SPDE under drift-implicit Euler with explicit
// noise increments:
//   M_H (Y_{n+1} - Y_n) = dt A(Y_{n+1}, u_n) + M_H dW_n.
// The per-step nonlinear system is solved by damped Newton; when flux and
// reaction Jacobians are state-independent a single factorized solve is used.
StateTrajectory solve_forward(const Problem& prob, const ControlField& control,
                              std::uint64_t path_id, const NewtonOptions& newton = {});

// Exact linearization of the discrete flow along `base` in the control
// direction `direction` (Z_0 = 0, no noise):
//   M_H (Z_{n+1} - Z_n) = dt [ DyA(Y_{n+1}, u_n) Z_{n+1} - w_b D_u gamma . dir_n ].
StateTrajectory solve_variational(const Problem& prob, const StateTrajectory& base,
                                  const ControlField& control, const ControlField& direction);

// Signed per-step energy production ||Y_{n+1}||^2 - ||Y_n||^2 - 2 dt <A(Y_{n+1}), Y_{n+1}>
// of the noise-free scheme; nonpositive up to roundoff by monotonicity.
double energy_step_margin(const Problem& prob, const Field& y_prev, const Field& y_next,
                          ConstVec u);

// Pathwise discrete Gronwall majorant of max_n ||Y_n||_H^2 given the realized
// noise increments of the path.
double gronwall_bound(const Problem& prob, const ControlField& control, std::uint64_t path_id);

}  // namespace smp
