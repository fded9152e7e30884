#include "smp/problem.hpp"

#include <cmath>

#include "smp/errors.hpp"

namespace smp {

Field make_initial_state(const Mesh& mesh, const std::string& kind, double value) {
  const int n = mesh.n_nodes();
  if (kind == "constant") return Field::Constant(n, value);
  if (kind == "linear") {
    Field y(n);
    for (int i = 0; i < n; ++i) y[i] = value * mesh.nodes(i, 0);
    return y;
  }
  if (kind == "bump") {
    // product of sine arches, zero trace
    const double x0 = mesh.nodes.col(0).minCoeff(), x1 = mesh.nodes.col(0).maxCoeff();
    const double y0 = mesh.nodes.col(1).minCoeff(), y1 = mesh.nodes.col(1).maxCoeff();
    Field y(n);
    for (int i = 0; i < n; ++i) {
      double v = std::sin(M_PI * (mesh.nodes(i, 0) - x0) / (x1 - x0));
      if (mesh.dim == 2) v *= std::sin(M_PI * (mesh.nodes(i, 1) - y0) / (y1 - y0));
      y[i] = value * v;
    }
    return y;
  }
  fail("unknown initial profile '" + kind + "' (known: constant, linear, bump)");
}

}  // namespace smp
