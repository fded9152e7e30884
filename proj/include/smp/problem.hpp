#pragma once

#include <cstdint>
#include <string>

#include "smp/coefficients.hpp"
#include "smp/field.hpp"
#include "smp/mesh.hpp"
#include "smp/noise.hpp"

namespace smp {

// Fully assembled problem instance: discretized domain, coefficients,
// admissible set, noise and time grid.
struct Problem {
  Mesh mesh;
  CoefficientSet coeffs;
  ControlSet box;
  NoiseSpec noise;
  bool noise_on = false;

  double T = 1.0;
  int steps = 1;
  Field y0;

  std::uint64_t master_seed = 0;

  double dt() const { return T / steps; }
  int n_bnodes() const { return mesh.n_boundary(); }

  ControlField zero_control() const {
    return ControlField::zeros(steps, mesh.n_boundary(), coeffs.control_dim);
  }
};

// Initial profiles: "constant", "bump" (product of sine arches, zero trace),
// "linear" (first coordinate).
Field make_initial_state(const Mesh& mesh, const std::string& kind, double value);

}  // namespace smp
