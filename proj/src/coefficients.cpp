#include "smp/coefficients.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include "smp/errors.hpp"
#include "smp/rng.hpp"

namespace smp {

bool ControlSet::contains(ConstVec u, double tol) const {
  if (u.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u[i] < lo[i] - tol || u[i] > hi[i] + tol) return false;
  return true;
}

Eigen::VectorXd ControlSet::project(ConstVec u) const {
  require(u.size() == lo.size(), "project: control dimension mismatch");
  return u.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd project_U(const ControlSet& box, ConstVec u) { return box.project(u); }

bool normal_cone_contains(const ControlSet& box, ConstVec u, ConstVec w, double tol) {
  require(u.size() == box.lo.size() && w.size() == box.lo.size(),
          "normal_cone_contains: dimension mismatch");
  require(box.contains(u, tol), "normal_cone_contains: point lies outside the box");
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const bool at_lo = u[i] <= box.lo[i] + tol;
    const bool at_hi = u[i] >= box.hi[i] - tol;
    if (!at_hi && w[i] > tol) return false;   // interior of the upper face
    if (!at_lo && w[i] < -tol) return false;  // interior of the lower face
  }
  return true;
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  margin=" << c.worst_margin;
    if (!c.pass && !c.witness.empty()) os << "  at " << c.witness;
    os << "\n";
  }
  os << (pass ? "PASS" : "FAIL") << " overall\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// builtin families

BuiltinProblem builtin_problem(const std::string& name, const BuiltinParams& params_in) {
  BuiltinParams p = params_in;
  const int m = p.m;
  require(m >= 1, "control dimension must be >= 1");
  if (p.beta.size() == 0) p.beta = Eigen::VectorXd::Ones(m);
  if (p.lo.size() == 0) p.lo = Eigen::VectorXd::Constant(m, -1.0);
  if (p.hi.size() == 0) p.hi = Eigen::VectorXd::Constant(m, 1.0);
  require(p.beta.size() == m && p.lo.size() == m && p.hi.size() == m,
          "beta/lo/hi must have control dimension");
  require((p.lo.array() <= p.hi.array()).all(), "control box must satisfy lo <= hi");
  require(p.lo.allFinite() && p.hi.allFinite(), "control box must be bounded");
  require(p.w_ell >= 0 && p.w_ellbar >= 0 && p.w_psi >= 0 && p.w_psibar >= 0 &&
              p.control_penalty >= 0,
          "cost weights must be nonnegative");

  double epsilon = 0.0, kappa = 0.0;
  if (name == "lq-dbc") {
    require(p.epsilon == 0.0 && p.kappa == 0.0,
            "lq-dbc has no epsilon/kappa parameters; use semilinear-dbc");
  } else if (name == "semilinear-dbc") {
    epsilon = p.epsilon;
    kappa = p.kappa;
    require(epsilon >= 0.0, "flux saturation strength must be >= 0");
  } else {
    fail("unknown coefficient family '" + name + "' (known: lq-dbc, semilinear-dbc)");
  }

  CoefficientSet c;
  c.control_dim = m;

  c.flux = [epsilon](const Eigen::Vector2d&, const Eigen::Vector2d& g) -> Eigen::Vector2d {
    if (epsilon == 0.0) return g;
    return g + epsilon * g.array().tanh().matrix();
  };
  c.flux_jac = [epsilon](const Eigen::Vector2d&, const Eigen::Vector2d& g) -> Eigen::Matrix2d {
    Eigen::Matrix2d j = Eigen::Matrix2d::Identity();
    if (epsilon != 0.0) {
      const double t0 = std::tanh(g[0]), t1 = std::tanh(g[1]);
      j(0, 0) += epsilon * (1.0 - t0 * t0);
      j(1, 1) += epsilon * (1.0 - t1 * t1);
    }
    return j;
  };

  const Eigen::VectorXd beta = p.beta;
  c.reaction = [kappa, beta](const Eigen::Vector2d&, double ybar, ConstVec u) {
    return ybar + kappa * std::atan(ybar) + beta.dot(u);
  };
  c.reaction_dy = [kappa](const Eigen::Vector2d&, double ybar, ConstVec) {
    return 1.0 + kappa / (1.0 + ybar * ybar);
  };
  c.reaction_du = [beta](const Eigen::Vector2d&, double, ConstVec) { return beta; };

  const double wl = p.w_ell, wlb = p.w_ellbar, wp = p.w_psi, wpb = p.w_psibar,
               r = p.control_penalty;
  c.ell = [wl](const Eigen::Vector2d&, double y) { return 0.5 * wl * y * y; };
  c.ell_dy = [wl](const Eigen::Vector2d&, double y) { return wl * y; };
  c.ellbar = [wlb, r](const Eigen::Vector2d&, double ybar, ConstVec u) {
    return 0.5 * wlb * ybar * ybar + 0.5 * r * u.squaredNorm();
  };
  c.ellbar_dy = [wlb](const Eigen::Vector2d&, double ybar, ConstVec) { return wlb * ybar; };
  c.ellbar_du = [r](const Eigen::Vector2d&, double, ConstVec u) -> Eigen::VectorXd {
    return r * u;
  };
  c.psi = [wp](const Eigen::Vector2d&, double y) { return 0.5 * wp * y * y; };
  c.psi_dy = [wp](const Eigen::Vector2d&, double y) { return wp * y; };
  c.psibar = [wpb](const Eigen::Vector2d&, double ybar) { return 0.5 * wpb * ybar * ybar; };
  c.psibar_dy = [wpb](const Eigen::Vector2d&, double ybar) { return wpb * ybar; };

  c.rho = [](const Eigen::Vector2d&) { return 1.0; };
  c.rhotilde = [](const Eigen::Vector2d&) { return 1.0; };

  c.delta = 1.0;
  c.c0 = std::max({1.0 + epsilon, 1.0 + std::max(kappa, 0.0), beta.norm()});
  c.c1 = std::max({1.0, wp, wpb});
  c.c2 = std::max({1.0, wl, wlb, r});

  c.flags.flux_affine = (epsilon == 0.0);
  c.flags.reaction_affine_control = true;
  c.flags.state_independent_jacobians = (epsilon == 0.0 && kappa == 0.0);
  c.flags.ell_convex = true;
  c.flags.ellbar_convex = true;
  c.flags.psi_convex = true;
  c.flags.psibar_convex = true;
  c.flags.neg_reaction_convex = (kappa == 0.0);
  c.flags.reaction_convex = (kappa == 0.0);

  return BuiltinProblem{std::move(c), ControlSet{p.lo, p.hi}};
}

// ---------------------------------------------------------------------------
// assumption validator

namespace {

struct MarginAcc {
  double worst = std::numeric_limits<double>::infinity();
  std::string witness;

  void update(double margin, const std::string& where) {
    if (!std::isfinite(margin)) {
      worst = -std::numeric_limits<double>::infinity();
      witness = "non-finite value at " + where;
      return;
    }
    if (margin < worst) {
      worst = margin;
      witness = where;
    }
  }
};

// Max finite-difference error per epsilon, turned into an observed order.
// The rounding floor of the central quotient scales like mach*|phi|/eps, so
// it is subtracted per sample; exact (low-order polynomial) derivatives then
// register as exact instead of as order -1 noise.
struct OrderAcc {
  static constexpr double eps[3] = {1e-3, 1e-4, 1e-5};
  double err[3] = {0.0, 0.0, 0.0};
  bool finite = true;

  void update(const std::function<double(double)>& phi, double dphi) {
    for (int k = 0; k < 3; ++k) {
      const double fp = phi(eps[k]), fm = phi(-eps[k]);
      const double fd = (fp - fm) / (2.0 * eps[k]);
      if (!std::isfinite(fd) || !std::isfinite(dphi)) {
        finite = false;
        return;
      }
      const double mag = std::max({1.0, std::abs(fp), std::abs(fm)});
      const double floor_k = 64.0 * std::numeric_limits<double>::epsilon() * mag / eps[k];
      err[k] = std::max(err[k], std::max(0.0, std::abs(fd - dphi) - floor_k));
    }
  }

  // least-squares slope of log(err) vs log(eps), ignoring roundoff-floor points
  double order() const {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 0; k < 3; ++k) {
      if (err[k] <= 1e-13) continue;
      const double x = std::log(eps[k]), y = std::log(err[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 2) return 2.0;  // exact (or at roundoff floor) everywhere
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
};

std::string point_str(const Eigen::Vector2d& x) {
  std::ostringstream os;
  os << "x=(" << x[0] << "," << x[1] << ")";
  return os.str();
}

}  // namespace

AssumptionReport validate_assumptions(const CoefficientSet& c, const ControlSet& box,
                                      const Mesh& mesh, int n_samples, std::uint64_t seed) {
  require(n_samples >= 10, "validator needs at least 10 samples");
  require(box.dim() == c.control_dim, "control box dimension does not match coefficients");

  const int m = c.control_dim;
  auto normal = [&](std::uint64_t i, std::uint32_t slot) {
    return normal_draw(seed, i, 0, slot);
  };
  auto uniform = [&](std::uint64_t i, std::uint32_t slot) {
    return uniform_draw(seed, i, 1, slot);
  };

  MarginAcc flux_growth, flux_jac_bound, flux_mono, flux_affine_flag;
  MarginAcc reac_growth, reac_dy_bound, reac_du_growth, reac_mono;
  MarginAcc term_int, term_bdy, run_int, run_bdy;
  MarginAcc conv_ell, conv_ellbar, conv_psi, conv_psibar, conv_neg_reac, conv_reac;
  OrderAcc ord_flux, ord_reac_dy, ord_reac_du, ord_ell, ord_ellbar_y, ord_ellbar_u, ord_psi,
      ord_psibar;

  for (int s = 0; s < n_samples; ++s) {
    const double scale = (s % 3 == 0) ? 0.1 : ((s % 3 == 1) ? 1.0 : 10.0);
    // sample an interior quadrature point and a boundary node
    const int e = static_cast<int>(uniform(s, 0) * mesh.n_elems()) % mesh.n_elems();
    const int b = static_cast<int>(uniform(s, 1) * mesh.n_boundary()) % mesh.n_boundary();
    const Eigen::Vector2d x = mesh.elem_centroid.row(e);
    const Eigen::Vector2d xi = mesh.nodes.row(mesh.boundary_nodes[b]);
    const double rho = c.rho(x), rhot = c.rhotilde(xi);

    Eigen::Vector2d zeta(scale * normal(s, 0), scale * normal(s, 1));
    Eigen::Vector2d eta(scale * normal(s, 2), scale * normal(s, 3));
    if (mesh.dim == 1) zeta[1] = eta[1] = 0.0;
    const double y = scale * normal(s, 4);
    const double yb = scale * normal(s, 5);
    const double yb2 = scale * normal(s, 6);
    Eigen::VectorXd u(m), u2(m);
    for (int k = 0; k < m; ++k) {
      u[k] = box.lo[k] + uniform(s, 10 + k) * (box.hi[k] - box.lo[k]);
      u2[k] = box.lo[k] + uniform(s, 40 + k) * (box.hi[k] - box.lo[k]);
    }

    const std::string at_x = point_str(x), at_xi = point_str(xi);

    // flux hypotheses
    const Eigen::Vector2d az = c.flux(x, zeta), ae = c.flux(x, eta);
    flux_growth.update(c.c0 * (rho + zeta.norm()) - az.norm(), at_x);
    {
      const Eigen::Matrix2d j = c.flux_jac(x, zeta);
      const double opnorm = j.jacobiSvd().singularValues()[0];
      flux_jac_bound.update(c.c0 - opnorm, at_x);
      const double gap = (az - ae).dot(zeta - eta) - c.delta * (zeta - eta).squaredNorm();
      flux_mono.update(gap / std::max(1.0, (zeta - eta).squaredNorm()), at_x);
      Eigen::Vector2d dir(normal(s, 7), mesh.dim == 1 ? 0.0 : normal(s, 8));
      if (dir.norm() < 1e-8) dir[0] = 1.0;
      dir.normalize();
      Eigen::Vector2d w(normal(s, 20), mesh.dim == 1 ? 0.0 : normal(s, 21));
      if (w.norm() < 1e-8) w[0] = 1.0;
      w.normalize();
      ord_flux.update([&](double t) { return c.flux(x, zeta + t * dir).dot(w); },
                      (j * dir).dot(w));
    }
    if (c.flags.flux_affine) {
      const Eigen::Vector2d mid = c.flux(x, 0.5 * (zeta + eta));
      flux_affine_flag.update(-(mid - 0.5 * az - 0.5 * ae).norm(), at_x);
    }

    // reaction hypotheses
    {
      const double g = c.reaction(xi, yb, u);
      const double g2 = c.reaction(xi, yb2, u);
      reac_growth.update(c.c0 * (rhot + std::abs(yb) + u.norm()) - std::abs(g), at_xi);
      reac_dy_bound.update(c.c0 - std::abs(c.reaction_dy(xi, yb, u)), at_xi);
      reac_du_growth.update(c.c0 * (rhot + std::abs(yb)) - c.reaction_du(xi, yb, u).norm(),
                            at_xi);
      const double dy = yb - yb2;
      reac_mono.update(((g - g2) * dy - c.delta * dy * dy) / std::max(1.0, dy * dy), at_xi);
      ord_reac_dy.update([&](double t) { return c.reaction(xi, yb + t, u); },
                         c.reaction_dy(xi, yb, u));
      Eigen::VectorXd du = Eigen::VectorXd::Zero(m);
      du[s % m] = 1.0;
      ord_reac_du.update([&](double t) { return c.reaction(xi, yb, u + t * du); },
                         c.reaction_du(xi, yb, u).dot(du));
    }
    if (c.flags.neg_reaction_convex || c.flags.reaction_convex) {
      const double gm = c.reaction(xi, 0.5 * (yb + yb2), 0.5 * (u + u2));
      const double chord = 0.5 * c.reaction(xi, yb, u) + 0.5 * c.reaction(xi, yb2, u2);
      // midpoint convexity of -sigma*gamma
      if (c.flags.neg_reaction_convex) conv_neg_reac.update(gm - chord, at_xi);
      if (c.flags.reaction_convex) conv_reac.update(chord - gm, at_xi);
    }

    // terminal cost hypotheses
    term_int.update(c.c1 * (rho * rho + y * y) - std::abs(c.psi(x, y)), at_x);
    term_int.update(c.c1 * (rho + std::abs(y)) - std::abs(c.psi_dy(x, y)), at_x);
    term_bdy.update(c.c1 * (rhot * rhot + yb * yb) - std::abs(c.psibar(xi, yb)), at_xi);
    term_bdy.update(c.c1 * (rhot + std::abs(yb)) - std::abs(c.psibar_dy(xi, yb)), at_xi);
    ord_psi.update([&](double t) { return c.psi(x, y + t); }, c.psi_dy(x, y));
    ord_psibar.update([&](double t) { return c.psibar(xi, yb + t); }, c.psibar_dy(xi, yb));

    // running cost hypotheses
    run_int.update(c.c2 * (rho * rho + y * y) - std::abs(c.ell(x, y)), at_x);
    run_int.update(c.c2 * (rho + std::abs(y)) - std::abs(c.ell_dy(x, y)), at_x);
    run_bdy.update(c.c2 * (rhot * rhot + yb * yb + u.squaredNorm()) -
                       std::abs(c.ellbar(xi, yb, u)),
                   at_xi);
    run_bdy.update(c.c2 * (rhot + std::abs(yb) + u.norm()) -
                       std::abs(c.ellbar_dy(xi, yb, u)),
                   at_xi);
    run_bdy.update(c.c2 * (rhot + std::abs(yb) + u.norm()) - c.ellbar_du(xi, yb, u).norm(),
                   at_xi);
    ord_ell.update([&](double t) { return c.ell(x, y + t); }, c.ell_dy(x, y));
    ord_ellbar_y.update([&](double t) { return c.ellbar(xi, yb + t, u); },
                        c.ellbar_dy(xi, yb, u));
    {
      Eigen::VectorXd du = Eigen::VectorXd::Zero(m);
      du[s % m] = 1.0;
      ord_ellbar_u.update([&](double t) { return c.ellbar(xi, yb, u + t * du); },
                          c.ellbar_du(xi, yb, u).dot(du));
    }

    // convexity spot checks for set flags
    if (c.flags.ell_convex)
      conv_ell.update(0.5 * c.ell(x, y) + 0.5 * c.ell(x, yb) - c.ell(x, 0.5 * (y + yb)), at_x);
    if (c.flags.psi_convex)
      conv_psi.update(0.5 * c.psi(x, y) + 0.5 * c.psi(x, yb) - c.psi(x, 0.5 * (y + yb)), at_x);
    if (c.flags.psibar_convex)
      conv_psibar.update(0.5 * c.psibar(xi, yb) + 0.5 * c.psibar(xi, yb2) -
                             c.psibar(xi, 0.5 * (yb + yb2)),
                         at_xi);
    if (c.flags.ellbar_convex)
      conv_ellbar.update(0.5 * c.ellbar(xi, yb, u) + 0.5 * c.ellbar(xi, yb2, u2) -
                             c.ellbar(xi, 0.5 * (yb + yb2), 0.5 * (u + u2)),
                         at_xi);
  }

  AssumptionReport report;
  const double tol = -1e-10;
  auto add_margin = [&](const std::string& name, const MarginAcc& acc) {
    AssumptionCheck chk;
    chk.name = name;
    chk.worst_margin = acc.worst;
    chk.pass = std::isfinite(acc.worst) && acc.worst >= tol;
    chk.witness = acc.witness;
    report.pass = report.pass && chk.pass;
    report.checks.push_back(std::move(chk));
  };
  auto add_order = [&](const std::string& name, const OrderAcc& acc) {
    AssumptionCheck chk;
    chk.name = name;
    const double ord = acc.finite ? acc.order() : -std::numeric_limits<double>::infinity();
    chk.worst_margin = ord - 1.9;
    chk.pass = acc.finite && chk.worst_margin >= tol;
    if (!acc.finite) chk.witness = "non-finite finite-difference probe";
    report.pass = report.pass && chk.pass;
    report.checks.push_back(std::move(chk));
  };

  add_margin("flux_growth", flux_growth);
  add_margin("flux_jacobian_bound", flux_jac_bound);
  add_margin("flux_monotonicity", flux_mono);
  add_margin("reaction_growth", reac_growth);
  add_margin("reaction_dy_bound", reac_dy_bound);
  add_margin("reaction_du_growth", reac_du_growth);
  add_margin("reaction_monotonicity", reac_mono);
  add_margin("terminal_interior_growth", term_int);
  add_margin("terminal_boundary_growth", term_bdy);
  add_margin("running_interior_growth", run_int);
  add_margin("running_boundary_growth", run_bdy);

  add_order("flux_derivative_order", ord_flux);
  add_order("reaction_dy_order", ord_reac_dy);
  add_order("reaction_du_order", ord_reac_du);
  add_order("running_interior_order", ord_ell);
  add_order("running_boundary_dy_order", ord_ellbar_y);
  add_order("running_boundary_du_order", ord_ellbar_u);
  add_order("terminal_interior_order", ord_psi);
  add_order("terminal_boundary_order", ord_psibar);

  if (c.flags.flux_affine) add_margin("flux_affine_flag", flux_affine_flag);
  if (c.flags.ell_convex) add_margin("running_interior_convexity", conv_ell);
  if (c.flags.ellbar_convex) add_margin("running_boundary_convexity", conv_ellbar);
  if (c.flags.psi_convex) add_margin("terminal_interior_convexity", conv_psi);
  if (c.flags.psibar_convex) add_margin("terminal_boundary_convexity", conv_psibar);
  if (c.flags.neg_reaction_convex) add_margin("neg_reaction_convexity", conv_neg_reac);
  if (c.flags.reaction_convex) add_margin("reaction_convexity", conv_reac);

  return report;
}

}  // namespace smp
