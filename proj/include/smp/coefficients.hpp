#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smp/mesh.hpp"

namespace smp {

using ConstVec = Eigen::Ref<const Eigen::VectorXd>;

// Problem data for
//   dy = div a(x, grad y) dt + noise            in the domain,
//   dybar = [-a . nu - gamma(xi, ybar, u)] dt + noise   on the boundary,
// with running cost l(x,y) + lbar(xi,ybar,u) and terminal cost
// psi(x,y) + psibar(xi,ybar).  Derivative handles must match the values;
// validate_assumptions checks growth/monotonicity margins by sampling.
struct CoefficientSet {
  int control_dim = 1;

  std::function<Eigen::Vector2d(const Eigen::Vector2d&, const Eigen::Vector2d&)> flux;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&, const Eigen::Vector2d&)> flux_jac;

  std::function<double(const Eigen::Vector2d&, double, ConstVec)> reaction;
  std::function<double(const Eigen::Vector2d&, double, ConstVec)> reaction_dy;
  std::function<Eigen::VectorXd(const Eigen::Vector2d&, double, ConstVec)> reaction_du;

  std::function<double(const Eigen::Vector2d&, double)> ell;
  std::function<double(const Eigen::Vector2d&, double)> ell_dy;

  std::function<double(const Eigen::Vector2d&, double, ConstVec)> ellbar;
  std::function<double(const Eigen::Vector2d&, double, ConstVec)> ellbar_dy;
  std::function<Eigen::VectorXd(const Eigen::Vector2d&, double, ConstVec)> ellbar_du;

  std::function<double(const Eigen::Vector2d&, double)> psi;
  std::function<double(const Eigen::Vector2d&, double)> psi_dy;
  std::function<double(const Eigen::Vector2d&, double)> psibar;
  std::function<double(const Eigen::Vector2d&, double)> psibar_dy;

  std::function<double(const Eigen::Vector2d&)> rho;
  std::function<double(const Eigen::Vector2d&)> rhotilde;

  double delta = 1.0;  // monotonicity modulus of flux and reaction
  double c0 = 1.0;     // growth bound for flux/reaction and their derivatives
  double c1 = 1.0;     // growth bound for terminal costs
  double c2 = 1.0;     // growth bound for running costs

  struct Flags {
    bool flux_affine = false;            // a affine in the gradient
    bool reaction_affine_control = false;  // gamma = gtilde(xi,ybar) + beta(xi).u
    bool state_independent_jacobians = false;  // D_g a and D_y gamma constant
    bool ell_convex = false;
    bool ellbar_convex = false;
    bool psi_convex = false;
    bool psibar_convex = false;
    bool neg_reaction_convex = false;  // (ybar,u) -> -gamma convex  (sigma = +1)
    bool reaction_convex = false;      // (ybar,u) ->  gamma convex  (sigma = -1)
  } flags;
};

// Axis-aligned box of admissible control values.
struct ControlSet {
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(ConstVec u, double tol = 0.0) const;
  Eigen::VectorXd project(ConstVec u) const;
};

Eigen::VectorXd project_U(const ControlSet& box, ConstVec u);

// Whether w lies in the normal cone of the box at u (componentwise rules).
// Throws if u is not in the box (within tol).
bool normal_cone_contains(const ControlSet& box, ConstVec u, ConstVec w, double tol);

struct AssumptionCheck {
  std::string name;
  double worst_margin = 0.0;
  bool pass = true;
  std::string witness;  // human-readable worst sample
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool pass = true;

  const AssumptionCheck* find(const std::string& name) const;
  std::string summary() const;
};

// Sample-based verification of the growth, boundedness, monotonicity and
// derivative-consistency hypotheses.  Margins must be >= -1e-10 to pass.
AssumptionReport validate_assumptions(const CoefficientSet& coeffs, const ControlSet& box,
                                      const Mesh& mesh, int n_samples, std::uint64_t seed);

struct BuiltinParams {
  double epsilon = 0.0;   // flux saturation strength (semilinear family)
  double kappa = 0.0;     // boundary arctan strength (semilinear family)
  Eigen::VectorXd beta;   // control gain, defaults to ones(m)
  Eigen::VectorXd lo, hi; // control box, defaults to [-1,1]^m
  int m = 1;
  double w_ell = 1.0, w_ellbar = 1.0, w_psi = 1.0, w_psibar = 1.0;
  double control_penalty = 1.0;  // coefficient of |u|^2/2 in lbar
};

struct BuiltinProblem {
  CoefficientSet coeffs;
  ControlSet box;
};

// Families: "lq-dbc" (linear flux, affine reaction, quadratic costs) and
// "semilinear-dbc" (saturating flux perturbation, arctan reaction term).
BuiltinProblem builtin_problem(const std::string& name, const BuiltinParams& params = {});

}  // namespace smp
