#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

namespace smp {

// Structured P1 meshes of an interval (a,b) or an axis-aligned rectangle.
// Interior mass is lumped (row sums of the consistent P1 mass matrix), the
// boundary carries its own lumped surface mass.  On the interval the boundary
// measure is the counting measure on the two endpoints.

enum class QuadratureRule {
  // vertex rule on nodes for products, centroid evaluation for coefficients
  p1_lumped = 0,
};

struct Mesh {
  int dim = 1;
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;  // y-column zero in 1d
  std::vector<int> elems;                          // flattened, stride dim+1
  Eigen::VectorXd elem_volume;
  Eigen::Matrix<double, Eigen::Dynamic, 2> elem_centroid;
  // gradient of local basis function k on element e: row e*(dim+1)+k
  Eigen::Matrix<double, Eigen::Dynamic, 2> elem_grad;

  std::vector<int> boundary_nodes;       // perimeter order (ccw in 2d)
  std::vector<int> boundary_index_of;    // node -> boundary slot, -1 inside
  Eigen::Matrix<double, Eigen::Dynamic, 2> normals;  // unit, per boundary node
  Eigen::VectorXd boundary_arc;          // arclength coordinate along immersion

  Eigen::VectorXd mass_interior;   // all nodes
  Eigen::VectorXd mass_boundary;   // boundary nodes
  Eigen::VectorXd mass_H;          // interior + scattered boundary mass
  Eigen::SparseMatrix<double> stiffness;

  QuadratureRule quadrature = QuadratureRule::p1_lumped;

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int verts_per_elem() const { return dim + 1; }
  int n_elems() const { return static_cast<int>(elems.size()) / verts_per_elem(); }
  int n_boundary() const { return static_cast<int>(boundary_nodes.size()); }
  const int* elem(int e) const { return elems.data() + e * verts_per_elem(); }
  bool is_boundary(int node) const { return boundary_index_of[node] >= 0; }
  double volume() const { return mass_interior.sum(); }
  double surface() const { return mass_boundary.sum(); }
};

struct IntervalDesc {
  double a = 0.0, b = 1.0;
  int n = 3;  // nodes, >= 3
};

struct RectangleDesc {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 3, ny = 3;  // nodes per axis, >= 3
};

Mesh build_mesh(const IntervalDesc& d);
Mesh build_mesh(const RectangleDesc& d);

// Throws if a structural invariant is violated (used by tests and builders).
void check_mesh(const Mesh& mesh);

}  // namespace smp
