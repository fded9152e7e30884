#include "smp/mesh.hpp"

#include <cmath>
#include <set>

#include "smp/errors.hpp"

namespace smp {

namespace {

void finalize_mass_H(Mesh& mesh) {
  mesh.mass_H = mesh.mass_interior;
  for (int b = 0; b < mesh.n_boundary(); ++b)
    mesh.mass_H[mesh.boundary_nodes[b]] += mesh.mass_boundary[b];
}

void assemble_stiffness(Mesh& mesh) {
  const int vpe = mesh.verts_per_elem();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_elems() * vpe * vpe);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const int* v = mesh.elem(e);
    for (int k = 0; k < vpe; ++k)
      for (int l = 0; l < vpe; ++l) {
        const double val = mesh.elem_volume[e] *
                           mesh.elem_grad.row(e * vpe + k).dot(mesh.elem_grad.row(e * vpe + l));
        trips.emplace_back(v[k], v[l], val);
      }
  }
  mesh.stiffness.resize(mesh.n_nodes(), mesh.n_nodes());
  mesh.stiffness.setFromTriplets(trips.begin(), trips.end());
}

}  // namespace

Mesh build_mesh(const IntervalDesc& d) {
  require(d.n >= 3, "interval mesh needs at least 3 nodes, got " + std::to_string(d.n));
  require(d.b > d.a, "interval bounds must satisfy a < b");

  Mesh mesh;
  mesh.dim = 1;
  const int n = d.n;
  const double h = (d.b - d.a) / (n - 1);

  mesh.nodes.setZero(n, 2);
  for (int i = 0; i < n; ++i) mesh.nodes(i, 0) = d.a + h * i;

  const int ne = n - 1;
  mesh.elems.resize(2 * ne);
  mesh.elem_volume.resize(ne);
  mesh.elem_centroid.setZero(ne, 2);
  mesh.elem_grad.setZero(2 * ne, 2);
  for (int e = 0; e < ne; ++e) {
    mesh.elems[2 * e] = e;
    mesh.elems[2 * e + 1] = e + 1;
    mesh.elem_volume[e] = h;
    mesh.elem_centroid(e, 0) = d.a + h * (e + 0.5);
    mesh.elem_grad(2 * e, 0) = -1.0 / h;
    mesh.elem_grad(2 * e + 1, 0) = 1.0 / h;
  }

  mesh.mass_interior.setConstant(n, h);
  mesh.mass_interior[0] = mesh.mass_interior[n - 1] = h / 2.0;

  mesh.boundary_nodes = {0, n - 1};
  mesh.boundary_index_of.assign(n, -1);
  mesh.boundary_index_of[0] = 0;
  mesh.boundary_index_of[n - 1] = 1;
  mesh.mass_boundary = Eigen::VectorXd::Ones(2);  // counting measure
  mesh.normals.setZero(2, 2);
  mesh.normals(0, 0) = -1.0;
  mesh.normals(1, 0) = 1.0;
  mesh.boundary_arc.resize(2);
  mesh.boundary_arc << 0.0, 1.0;

  finalize_mass_H(mesh);
  assemble_stiffness(mesh);
  check_mesh(mesh);
  return mesh;
}

Mesh build_mesh(const RectangleDesc& d) {
  require(d.nx >= 3 && d.ny >= 3, "rectangle mesh needs at least 3 nodes per axis");
  require(d.x1 > d.x0 && d.y1 > d.y0, "rectangle bounds must be increasing");

  Mesh mesh;
  mesh.dim = 2;
  const int nx = d.nx, ny = d.ny;
  const double hx = (d.x1 - d.x0) / (nx - 1);
  const double hy = (d.y1 - d.y0) / (ny - 1);
  const int n = nx * ny;

  mesh.nodes.setZero(n, 2);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.nodes(j * nx + i, 0) = d.x0 + hx * i;
      mesh.nodes(j * nx + i, 1) = d.y0 + hy * j;
    }

  // two ccw triangles per cell
  const int ncell = (nx - 1) * (ny - 1);
  mesh.elems.reserve(6 * ncell);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int v00 = j * nx + i, v10 = v00 + 1, v01 = v00 + nx, v11 = v01 + 1;
      mesh.elems.insert(mesh.elems.end(), {v00, v10, v11});
      mesh.elems.insert(mesh.elems.end(), {v00, v11, v01});
    }

  const int ne = mesh.n_elems();
  mesh.elem_volume.resize(ne);
  mesh.elem_centroid.setZero(ne, 2);
  mesh.elem_grad.setZero(3 * ne, 2);
  mesh.mass_interior.setZero(n);
  for (int e = 0; e < ne; ++e) {
    const int* v = mesh.elem(e);
    const Eigen::Vector2d p0 = mesh.nodes.row(v[0]), p1 = mesh.nodes.row(v[1]),
                          p2 = mesh.nodes.row(v[2]);
    const double area2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                         (p2.x() - p0.x()) * (p1.y() - p0.y());
    require(area2 > 0.0, "degenerate or misoriented triangle");
    mesh.elem_volume[e] = area2 / 2.0;
    mesh.elem_centroid.row(e) = ((p0 + p1 + p2) / 3.0).transpose();
    mesh.elem_grad.row(3 * e + 0) = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / area2;
    mesh.elem_grad.row(3 * e + 1) = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / area2;
    mesh.elem_grad.row(3 * e + 2) = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / area2;
    for (int k = 0; k < 3; ++k) mesh.mass_interior[v[k]] += mesh.elem_volume[e] / 3.0;
  }

  // perimeter walk, ccw from the lower-left corner
  std::vector<int> loop;
  for (int i = 0; i < nx; ++i) loop.push_back(i);
  for (int j = 1; j < ny; ++j) loop.push_back(j * nx + (nx - 1));
  for (int i = nx - 2; i >= 0; --i) loop.push_back((ny - 1) * nx + i);
  for (int j = ny - 2; j >= 1; --j) loop.push_back(j * nx);
  mesh.boundary_nodes = loop;

  const int nb = static_cast<int>(loop.size());
  mesh.boundary_index_of.assign(n, -1);
  for (int b = 0; b < nb; ++b) mesh.boundary_index_of[loop[b]] = b;

  mesh.mass_boundary.setZero(nb);
  mesh.normals.setZero(nb, 2);
  mesh.boundary_arc.setZero(nb);
  double arc = 0.0;
  for (int b = 0; b < nb; ++b) {
    mesh.boundary_arc[b] = arc;
    const Eigen::Vector2d p = mesh.nodes.row(loop[b]);
    const Eigen::Vector2d q = mesh.nodes.row(loop[(b + 1) % nb]);
    const double len = (q - p).norm();
    arc += len;
    mesh.mass_boundary[b] += len / 2.0;
    mesh.mass_boundary[(b + 1) % nb] += len / 2.0;
    // outward normal of the ccw edge p -> q is (dy, -dx)
    const Eigen::Vector2d en = Eigen::Vector2d(q.y() - p.y(), -(q.x() - p.x())).normalized();
    mesh.normals.row(b) += en.transpose();
    mesh.normals.row((b + 1) % nb) += en.transpose();
  }
  for (int b = 0; b < nb; ++b) mesh.normals.row(b).normalize();

  finalize_mass_H(mesh);
  assemble_stiffness(mesh);
  check_mesh(mesh);
  return mesh;
}

void check_mesh(const Mesh& mesh) {
  require(mesh.dim == 1 || mesh.dim == 2, "mesh dimension must be 1 or 2");
  const int n = mesh.n_nodes();
  require(n >= 3, "mesh must have at least 3 nodes");
  require((mesh.elem_volume.array() > 0.0).all(), "element volumes must be positive");
  require((mesh.mass_interior.array() > 0.0).all(), "interior mass weights must be positive");
  require((mesh.mass_boundary.array() > 0.0).all(), "boundary mass weights must be positive");

  std::set<int> seen;
  for (int node : mesh.boundary_nodes) {
    require(node >= 0 && node < n, "boundary node index out of range");
    require(seen.insert(node).second, "duplicate boundary node index");
  }
  if (mesh.dim == 1) require(mesh.n_boundary() == 2, "interval boundary must be two endpoints");

  for (int b = 0; b < mesh.n_boundary(); ++b)
    require(std::abs(mesh.normals.row(b).norm() - 1.0) <= 1e-12,
            "boundary normal must have unit length");

  require(static_cast<int>(mesh.boundary_index_of.size()) == n, "boundary lookup size mismatch");
  for (int i = 0; i < n; ++i) {
    const int b = mesh.boundary_index_of[i];
    if (b >= 0) require(mesh.boundary_nodes[b] == i, "boundary lookup inconsistent");
  }
}

}  // namespace smp
