#include "smp/operators.hpp"

#include <cmath>

#include "smp/errors.hpp"

namespace smp {

namespace {

inline Eigen::Vector2d element_gradient(const Mesh& mesh, const Field& y, int e) {
  const int vpe = mesh.verts_per_elem();
  const int* v = mesh.elem(e);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int k = 0; k < vpe; ++k) g += y[v[k]] * mesh.elem_grad.row(e * vpe + k).transpose();
  return g;
}

inline void check_state(const Mesh& mesh, const Field& y, const char* who) {
  require(y.size() == mesh.n_nodes(), std::string(who) + ": state size does not match mesh");
  require(y.allFinite(), std::string(who) + ": state has non-finite entries");
}

inline void check_control_row(const Mesh& mesh, const CoefficientSet& coeffs, ConstVec u,
                              const char* who) {
  require(u.size() == static_cast<Eigen::Index>(mesh.n_boundary()) * coeffs.control_dim,
          std::string(who) + ": control row size does not match boundary x control_dim");
  require(u.allFinite(), std::string(who) + ": control has non-finite entries");
}

}  // namespace

DualField apply_A(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y, ConstVec u) {
  check_state(mesh, y, "apply_A");
  check_control_row(mesh, coeffs, u, "apply_A");
  const int vpe = mesh.verts_per_elem();
  DualField d{Eigen::VectorXd::Zero(mesh.n_nodes())};

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Eigen::Vector2d grad = element_gradient(mesh, y, e);
    const Eigen::Vector2d flux = coeffs.flux(mesh.elem_centroid.row(e), grad);
    require(flux.allFinite(), "apply_A: flux returned a non-finite value at element " +
                                  std::to_string(e));
    const int* v = mesh.elem(e);
    for (int k = 0; k < vpe; ++k)
      d.w[v[k]] -= mesh.elem_volume[e] * flux.dot(mesh.elem_grad.row(e * vpe + k));
  }

  const int m = coeffs.control_dim;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    const Eigen::Vector2d xi = mesh.nodes.row(i);
    const double g = coeffs.reaction(xi, y[i], u.segment(b * m, m));
    require(std::isfinite(g),
            "apply_A: reaction returned a non-finite value at boundary node " + std::to_string(b));
    d.w[i] -= mesh.mass_boundary[b] * g;
  }
  return d;
}

DualField apply_DyA(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y, ConstVec u,
                    const Field& p) {
  check_state(mesh, y, "apply_DyA");
  check_state(mesh, p, "apply_DyA");
  check_control_row(mesh, coeffs, u, "apply_DyA");
  const int vpe = mesh.verts_per_elem();
  DualField d{Eigen::VectorXd::Zero(mesh.n_nodes())};

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Eigen::Vector2d grad = element_gradient(mesh, y, e);
    const Eigen::Matrix2d jac = coeffs.flux_jac(mesh.elem_centroid.row(e), grad);
    const Eigen::Vector2d jp = jac * element_gradient(mesh, p, e);
    const int* v = mesh.elem(e);
    for (int k = 0; k < vpe; ++k)
      d.w[v[k]] -= mesh.elem_volume[e] * jp.dot(mesh.elem_grad.row(e * vpe + k));
  }

  const int m = coeffs.control_dim;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    const double dg = coeffs.reaction_dy(mesh.nodes.row(i), y[i], u.segment(b * m, m));
    d.w[i] -= mesh.mass_boundary[b] * dg * p[i];
  }
  return d;
}

DualField apply_DyA_adjoint(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                            ConstVec u, const Field& p) {
  check_state(mesh, y, "apply_DyA_adjoint");
  check_state(mesh, p, "apply_DyA_adjoint");
  check_control_row(mesh, coeffs, u, "apply_DyA_adjoint");
  const int vpe = mesh.verts_per_elem();
  DualField d{Eigen::VectorXd::Zero(mesh.n_nodes())};

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Eigen::Vector2d grad = element_gradient(mesh, y, e);
    const Eigen::Matrix2d jac = coeffs.flux_jac(mesh.elem_centroid.row(e), grad);
    const Eigen::Vector2d jp = jac.transpose() * element_gradient(mesh, p, e);
    const int* v = mesh.elem(e);
    for (int k = 0; k < vpe; ++k)
      d.w[v[k]] -= mesh.elem_volume[e] * jp.dot(mesh.elem_grad.row(e * vpe + k));
  }

  const int m = coeffs.control_dim;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    const double dg = coeffs.reaction_dy(mesh.nodes.row(i), y[i], u.segment(b * m, m));
    d.w[i] -= mesh.mass_boundary[b] * dg * p[i];
  }
  return d;
}

Eigen::SparseMatrix<double> linearization_matrix(const Mesh& mesh, const CoefficientSet& coeffs,
                                                 const Field& y, ConstVec u) {
  check_state(mesh, y, "linearization_matrix");
  check_control_row(mesh, coeffs, u, "linearization_matrix");
  const int vpe = mesh.verts_per_elem();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_elems() * vpe * vpe + mesh.n_boundary());

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Eigen::Vector2d grad = element_gradient(mesh, y, e);
    const Eigen::Matrix2d jac = coeffs.flux_jac(mesh.elem_centroid.row(e), grad);
    const int* v = mesh.elem(e);
    for (int k = 0; k < vpe; ++k) {
      const Eigen::Vector2d gk = mesh.elem_grad.row(e * vpe + k);
      for (int l = 0; l < vpe; ++l) {
        const Eigen::Vector2d gl = mesh.elem_grad.row(e * vpe + l);
        trips.emplace_back(v[k], v[l], -mesh.elem_volume[e] * gk.dot(jac * gl));
      }
    }
  }

  const int m = coeffs.control_dim;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    const double dg = coeffs.reaction_dy(mesh.nodes.row(i), y[i], u.segment(b * m, m));
    trips.emplace_back(i, i, -mesh.mass_boundary[b] * dg);
  }

  Eigen::SparseMatrix<double> out(mesh.n_nodes(), mesh.n_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

double running_cost(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y, ConstVec u) {
  check_state(mesh, y, "running_cost");
  check_control_row(mesh, coeffs, u, "running_cost");
  double acc = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    acc += mesh.mass_interior[i] * coeffs.ell(mesh.nodes.row(i), y[i]);
  const int m = coeffs.control_dim;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    acc += mesh.mass_boundary[b] * coeffs.ellbar(mesh.nodes.row(i), y[i], u.segment(b * m, m));
  }
  return acc;
}

double terminal_cost(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y) {
  check_state(mesh, y, "terminal_cost");
  double acc = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    acc += mesh.mass_interior[i] * coeffs.psi(mesh.nodes.row(i), y[i]);
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    acc += mesh.mass_boundary[b] * coeffs.psibar(mesh.nodes.row(i), y[i]);
  }
  return acc;
}

DualField running_cost_dy(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                          ConstVec u) {
  check_state(mesh, y, "running_cost_dy");
  check_control_row(mesh, coeffs, u, "running_cost_dy");
  DualField d{Eigen::VectorXd::Zero(mesh.n_nodes())};
  for (int i = 0; i < mesh.n_nodes(); ++i)
    d.w[i] = mesh.mass_interior[i] * coeffs.ell_dy(mesh.nodes.row(i), y[i]);
  const int m = coeffs.control_dim;
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    d.w[i] += mesh.mass_boundary[b] *
              coeffs.ellbar_dy(mesh.nodes.row(i), y[i], u.segment(b * m, m));
  }
  return d;
}

DualField terminal_cost_dy(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y) {
  check_state(mesh, y, "terminal_cost_dy");
  DualField d{Eigen::VectorXd::Zero(mesh.n_nodes())};
  for (int i = 0; i < mesh.n_nodes(); ++i)
    d.w[i] = mesh.mass_interior[i] * coeffs.psi_dy(mesh.nodes.row(i), y[i]);
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    d.w[i] += mesh.mass_boundary[b] * coeffs.psibar_dy(mesh.nodes.row(i), y[i]);
  }
  return d;
}

Eigen::MatrixXd running_cost_du(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                                ConstVec u) {
  check_state(mesh, y, "running_cost_du");
  check_control_row(mesh, coeffs, u, "running_cost_du");
  const int m = coeffs.control_dim;
  Eigen::MatrixXd out(mesh.n_boundary(), m);
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    out.row(b) = coeffs.ellbar_du(mesh.nodes.row(i), y[i], u.segment(b * m, m)).transpose();
  }
  return out;
}

Eigen::MatrixXd reaction_du_matrix(const Mesh& mesh, const CoefficientSet& coeffs, const Field& y,
                                   ConstVec u) {
  check_state(mesh, y, "reaction_du_matrix");
  check_control_row(mesh, coeffs, u, "reaction_du_matrix");
  const int m = coeffs.control_dim;
  Eigen::MatrixXd out(mesh.n_boundary(), m);
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    out.row(b) = coeffs.reaction_du(mesh.nodes.row(i), y[i], u.segment(b * m, m)).transpose();
  }
  return out;
}

}  // namespace smp
