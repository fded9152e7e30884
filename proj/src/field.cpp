#include "smp/field.hpp"

#include <cmath>
#include <cstring>

#include "smp/errors.hpp"

namespace smp {

double inner_H(const Mesh& mesh, const Field& f, const Field& g) {
  require(f.size() == mesh.n_nodes() && g.size() == mesh.n_nodes(),
          "field size does not match mesh");
  double acc = mesh.mass_interior.dot(f.cwiseProduct(g));
  for (int b = 0; b < mesh.n_boundary(); ++b) {
    const int i = mesh.boundary_nodes[b];
    acc += mesh.mass_boundary[b] * f[i] * g[i];
  }
  return acc;
}

double norm_H(const Mesh& mesh, const Field& f) { return std::sqrt(inner_H(mesh, f, f)); }

double grad_sq(const Mesh& mesh, const Field& f) { return f.dot(mesh.stiffness * f); }

double boundary_sq(const Mesh& mesh, const Field& f) {
  double acc = 0.0;
  for (int b = 0; b < mesh.n_boundary(); ++b)
    acc += mesh.mass_boundary[b] * f[mesh.boundary_nodes[b]] * f[mesh.boundary_nodes[b]];
  return acc;
}

double norm_V(const Mesh& mesh, const Field& f) {
  return std::sqrt(std::max(0.0, grad_sq(mesh, f))) + std::sqrt(boundary_sq(mesh, f));
}

Eigen::VectorXd trace_restrict(const Mesh& mesh, const Field& f) {
  Eigen::VectorXd out(mesh.n_boundary());
  for (int b = 0; b < mesh.n_boundary(); ++b) out[b] = f[mesh.boundary_nodes[b]];
  return out;
}

Field riesz(const Mesh& mesh, const DualField& d) {
  require(d.w.size() == mesh.n_nodes(), "dual size does not match mesh");
  return d.w.cwiseQuotient(mesh.mass_H);
}

std::uint64_t ControlField::fingerprint() const {
  // FNV-1a over the dimensions and raw values
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    for (int k = 0; k < 8; ++k) {
      h ^= (x >> (8 * k)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(steps));
  mix(static_cast<std::uint64_t>(bnodes));
  mix(static_cast<std::uint64_t>(m));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::uint64_t bits;
    const double v = data.data()[i];
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    mix(bits);
  }
  return h;
}

void check_trajectory_grid(const StateTrajectory& traj) {
  const int n = static_cast<int>(traj.times.size());
  require(n >= 2 && static_cast<int>(traj.states.size()) == n,
          "trajectory must hold N+1 >= 2 grid points");
  const double dt = traj.times[1] - traj.times[0];
  require(dt > 0.0, "trajectory time step must be positive");
  for (int i = 1; i < n; ++i) {
    const double step = traj.times[i] - traj.times[i - 1];
    require(std::abs(step - dt) <= 1e-12 * std::max(1.0, std::abs(dt)),
            "trajectory time grid must be uniform");
  }
}

}  // namespace smp
