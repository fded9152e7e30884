#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "smp/mesh.hpp"

namespace smp {

// Nodal P1 field over all mesh nodes.  The boundary component of the product
// state (y, ybar) is the trace, so one vector carries both.
using Field = Eigen::VectorXd;

// Coefficients of a functional paired against nodal test functions: the
// pairing with a Field is a plain dot product, quadrature weights are already
// folded into the coefficients.
struct DualField {
  Eigen::VectorXd w;
};

inline double pairing(const DualField& d, const Field& z) { return d.w.dot(z); }

double inner_H(const Mesh& mesh, const Field& f, const Field& g);
double norm_H(const Mesh& mesh, const Field& f);
// squared H^1 seminorm f^T K f and squared boundary L2 norm of the trace
double grad_sq(const Mesh& mesh, const Field& f);
double boundary_sq(const Mesh& mesh, const Field& f);
// ||f||_V = ||grad f||_{L2} + ||trace f||_{L2(boundary)}
double norm_V(const Mesh& mesh, const Field& f);

Eigen::VectorXd trace_restrict(const Mesh& mesh, const Field& f);

// Riesz representative of a dual element in the lumped H inner product.
Field riesz(const Mesh& mesh, const DualField& d);

// Row-major layout so that one time step is a contiguous row.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Piecewise-constant-in-time boundary control: one row per time step, the
// row packs control_dim values per boundary node.
struct ControlField {
  int steps = 0;
  int bnodes = 0;
  int m = 1;
  RowMat data;  // steps x (bnodes*m)

  static ControlField zeros(int steps, int bnodes, int m) {
    ControlField u;
    u.steps = steps;
    u.bnodes = bnodes;
    u.m = m;
    u.data = RowMat::Zero(steps, bnodes * m);
    return u;
  }

  Eigen::Map<const Eigen::VectorXd> value(int step, int bnode) const {
    return {data.row(step).data() + bnode * m, m};
  }
  void set_value(int step, int bnode, const Eigen::VectorXd& v) {
    data.block(step, bnode * m, 1, m) = v.transpose();
  }

  std::uint64_t fingerprint() const;
};

// Uniform-in-time trajectory on t_0 = 0 < ... < t_N = T.
struct StateTrajectory {
  Eigen::VectorXd times;
  std::vector<Field> states;
  std::uint64_t path_id = 0;
  std::uint64_t control_fingerprint = 0;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

void check_trajectory_grid(const StateTrajectory& traj);

}  // namespace smp
