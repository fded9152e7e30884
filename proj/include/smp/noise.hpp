#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "smp/field.hpp"
#include "smp/mesh.hpp"

namespace smp {

// Truncated Karhunen-Loeve additive noise.  Interior modes are nodal shapes
// vanishing at boundary nodes (lumped-orthonormal under the interior mass),
// boundary modes live on boundary nodes (lumped-orthonormal under the surface
// mass), so the two blocks never mix in the collapsed nodal representation.
struct NoiseSpec {
  struct Mode {
    double sigma = 0.0;
    Eigen::VectorXd shape;  // over all nodes (interior) / boundary nodes (boundary)
  };
  std::vector<Mode> interior;
  std::vector<Mode> boundary;

  int n_modes() const { return static_cast<int>(interior.size() + boundary.size()); }
  // concatenated amplitudes, interior first
  Eigen::VectorXd sigmas() const;
};

// sigma_k = sigma0 * k^{-decay}, shapes are sine patterns inside and Fourier
// patterns along the boundary loop, orthonormalized under the lumped weights.
// Requested counts saturate at the dimension of the respective space (an
// interval boundary admits two orthonormal modes, no more).
NoiseSpec build_noise(const Mesh& mesh, int k_interior, int k_boundary, double sigma0,
                      double decay);

double hs_norm(const NoiseSpec& spec);

// Standard normal factors of every mode for one (path, step).
Eigen::VectorXd mode_normals(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t path,
                             int step);

// Nodal increment  sum_k sigma_k sqrt(dt) xi_k g_k  (interior + boundary blocks).
Field sample_increment(const Mesh& mesh, const NoiseSpec& spec, double dt, std::uint64_t seed,
                       std::uint64_t path, int step);

// H-pairing of a nodal increment with one mode embedded as an H element
// ((g,0) for interior modes, (0,g) for boundary modes); used by the
// covariance diagnostics and tests.
double mode_projection(const Mesh& mesh, const NoiseSpec& spec, const Field& increment,
                       int mode_index);

}  // namespace smp
