#include "smp/noise.hpp"

#include <algorithm>
#include <cmath>

#include "smp/errors.hpp"
#include "smp/rng.hpp"

namespace smp {

namespace {

// modified Gram-Schmidt under a diagonal weight; shapes are columns
void orthonormalize(std::vector<Eigen::VectorXd>& shapes, const Eigen::VectorXd& weights,
                    const char* what) {
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      const double proj = (weights.array() * shapes[j].array() * shapes[k].array()).sum();
      shapes[k] -= proj * shapes[j];
    }
    const double nrm =
        std::sqrt((weights.array() * shapes[k].array() * shapes[k].array()).sum());
    require(nrm > 1e-10, std::string(what) + ": requested more modes than independent shapes");
    shapes[k] /= nrm;
  }
}

}  // namespace

Eigen::VectorXd NoiseSpec::sigmas() const {
  Eigen::VectorXd s(n_modes());
  int k = 0;
  for (const auto& mode : interior) s[k++] = mode.sigma;
  for (const auto& mode : boundary) s[k++] = mode.sigma;
  return s;
}

NoiseSpec build_noise(const Mesh& mesh, int k_interior, int k_boundary, double sigma0,
                      double decay) {
  require(k_interior >= 0 && k_boundary >= 0, "mode counts must be >= 0");
  require(sigma0 >= 0.0, "sigma0 must be >= 0");
  const int n = mesh.n_nodes();
  // counts saturate at the space dimensions, keeping the shapes orthonormal
  k_boundary = std::min(k_boundary, mesh.n_boundary());
  k_interior = std::min(k_interior, n - mesh.n_boundary());

  NoiseSpec spec;

  // interior: sine patterns, zero at boundary nodes by construction
  std::vector<Eigen::VectorXd> shapes;
  if (mesh.dim == 1) {
    const double a = mesh.nodes(0, 0), b = mesh.nodes(n - 1, 0);
    for (int k = 1; k <= k_interior; ++k) {
      Eigen::VectorXd g(n);
      for (int i = 0; i < n; ++i)
        g[i] = std::sin(k * M_PI * (mesh.nodes(i, 0) - a) / (b - a));
      shapes.push_back(std::move(g));
    }
  } else {
    double x0 = mesh.nodes.col(0).minCoeff(), x1 = mesh.nodes.col(0).maxCoeff();
    double y0 = mesh.nodes.col(1).minCoeff(), y1 = mesh.nodes.col(1).maxCoeff();
    // index pairs ordered by frequency
    std::vector<std::pair<int, int>> freq;
    for (int i = 1; i * i <= 4 * k_interior + 16; ++i)
      for (int j = 1; j * j <= 4 * k_interior + 16; ++j) freq.emplace_back(i, j);
    std::sort(freq.begin(), freq.end(), [](auto& p, auto& q) {
      const int a2 = p.first * p.first + p.second * p.second;
      const int b2 = q.first * q.first + q.second * q.second;
      return a2 != b2 ? a2 < b2 : p < q;
    });
    for (int k = 0; k < k_interior; ++k) {
      const auto [fi, fj] = freq[k];
      Eigen::VectorXd g(n);
      for (int i = 0; i < n; ++i)
        g[i] = std::sin(fi * M_PI * (mesh.nodes(i, 0) - x0) / (x1 - x0)) *
               std::sin(fj * M_PI * (mesh.nodes(i, 1) - y0) / (y1 - y0));
      shapes.push_back(std::move(g));
    }
  }
  for (auto& g : shapes)
    for (int b = 0; b < mesh.n_boundary(); ++b) g[mesh.boundary_nodes[b]] = 0.0;
  orthonormalize(shapes, mesh.mass_interior, "interior noise modes");
  for (int k = 0; k < k_interior; ++k)
    spec.interior.push_back({sigma0 * std::pow(k + 1.0, -decay), shapes[k]});

  // boundary: Fourier patterns along the boundary loop
  const int nb = mesh.n_boundary();
  std::vector<Eigen::VectorXd> bshapes;
  if (mesh.dim == 1) {
    if (k_boundary >= 1) bshapes.push_back(Eigen::Vector2d(1.0, 1.0));
    if (k_boundary >= 2) bshapes.push_back(Eigen::Vector2d(1.0, -1.0));
  } else {
    const double per = mesh.boundary_arc[nb - 1] +
                       (mesh.nodes.row(mesh.boundary_nodes[nb - 1]) -
                        mesh.nodes.row(mesh.boundary_nodes[0]))
                           .norm();
    for (int k = 0; k < k_boundary; ++k) {
      Eigen::VectorXd g(nb);
      for (int b = 0; b < nb; ++b) {
        const double t = mesh.boundary_arc[b] / per;
        if (k == 0)
          g[b] = 1.0;
        else if (k % 2 == 1)
          g[b] = std::cos(2.0 * M_PI * ((k + 1) / 2) * t);
        else
          g[b] = std::sin(2.0 * M_PI * (k / 2) * t);
      }
      bshapes.push_back(std::move(g));
    }
  }
  Eigen::VectorXd bweights = mesh.mass_boundary;
  orthonormalize(bshapes, bweights, "boundary noise modes");
  for (int k = 0; k < k_boundary; ++k)
    spec.boundary.push_back({sigma0 * std::pow(k + 1.0, -decay), bshapes[k]});

  return spec;
}

double hs_norm(const NoiseSpec& spec) {
  double acc = 0.0;
  for (const auto& m : spec.interior) acc += m.sigma * m.sigma;
  for (const auto& m : spec.boundary) acc += m.sigma * m.sigma;
  return std::sqrt(acc);
}

Eigen::VectorXd mode_normals(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t path,
                             int step) {
  Eigen::VectorXd xi(spec.n_modes());
  for (int k = 0; k < spec.n_modes(); ++k)
    xi[k] = normal_draw(seed, path, static_cast<std::uint32_t>(step),
                        static_cast<std::uint32_t>(k));
  return xi;
}

Field sample_increment(const Mesh& mesh, const NoiseSpec& spec, double dt, std::uint64_t seed,
                       std::uint64_t path, int step) {
  require(dt > 0.0, "sample_increment: dt must be positive");
  const Eigen::VectorXd xi = mode_normals(spec, seed, path, step);
  const double root_dt = std::sqrt(dt);

  Field inc = Field::Zero(mesh.n_nodes());
  int k = 0;
  for (const auto& mode : spec.interior) {
    require(mode.shape.size() == mesh.n_nodes(), "interior mode shape size mismatch");
    inc += mode.sigma * root_dt * xi[k++] * mode.shape;
  }
  for (const auto& mode : spec.boundary) {
    require(mode.shape.size() == mesh.n_boundary(), "boundary mode shape size mismatch");
    const double amp = mode.sigma * root_dt * xi[k++];
    for (int b = 0; b < mesh.n_boundary(); ++b)
      inc[mesh.boundary_nodes[b]] += amp * mode.shape[b];
  }
  return inc;
}

double mode_projection(const Mesh& mesh, const NoiseSpec& spec, const Field& increment,
                       int mode_index) {
  const int ki = static_cast<int>(spec.interior.size());
  require(mode_index >= 0 && mode_index < spec.n_modes(), "mode index out of range");
  if (mode_index < ki) {
    const auto& g = spec.interior[mode_index].shape;
    return (mesh.mass_interior.array() * increment.array() * g.array()).sum();
  }
  const auto& g = spec.boundary[mode_index - ki].shape;
  double acc = 0.0;
  for (int b = 0; b < mesh.n_boundary(); ++b)
    acc += mesh.mass_boundary[b] * increment[mesh.boundary_nodes[b]] * g[b];
  return acc;
}

}  // namespace smp
