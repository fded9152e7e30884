#pragma once

#include <Eigen/Sparse>

#include "smp/coefficients.hpp"
#include "smp/field.hpp"
#include "smp/mesh.hpp"

namespace smp {

// Weak form of the monotone operator, as dual coefficients:
//   <A(y,u), z> = - sum_e |e| a(x_e, grad y|_e) . grad z|_e
//                 - sum_b w_b gamma(xi_b, y_b, u_b) z_b
// with centroid evaluation of the flux and the vertex rule on the boundary.
// u packs control_dim values per boundary node.
DualField apply_A(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                  ConstVec u);

// Directional derivative of A at (y,u) in state direction p.
DualField apply_DyA(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                    ConstVec u, const Field& p);

// Transpose of apply_DyA in the duality pairing:
//   pairing(apply_DyA_adjoint(..., p), z) == pairing(apply_DyA(..., z), p).
DualField apply_DyA_adjoint(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                            ConstVec u, const Field& p);

// Matrix J with (J p)_i = pairing coefficient i of apply_DyA(..., p).
Eigen::SparseMatrix<double> linearization_matrix(const Mesh& mesh, const CoefficientSet& coeffs,
                                                 const Field& y, ConstVec u);

// Vertex-rule quadrature of the running and terminal cost densities.
double running_cost(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y, ConstVec u);
double terminal_cost(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y);

// Dual coefficients of the state derivatives of the above.
DualField running_cost_dy(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                          ConstVec u);
DualField terminal_cost_dy(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y);

// Per-boundary-node control derivatives (rows: boundary nodes, cols: control_dim).
Eigen::MatrixXd running_cost_du(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                                ConstVec u);
Eigen::MatrixXd reaction_du_matrix(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                                   ConstVec u);

}  // namespace smp
