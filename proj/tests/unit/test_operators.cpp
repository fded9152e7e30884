#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "smp/coefficients.hpp"
#include "smp/field.hpp"
#include "smp/mesh.hpp"
#include "smp/operators.hpp"
#include "smp/rng.hpp"

using namespace smp;

namespace {

Field coord_x(const Mesh& mesh) {
  Field f(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) f[i] = mesh.nodes(i, 0);
  return f;
}

Eigen::VectorXd zero_u(const Mesh& mesh, int m) {
  return Eigen::VectorXd::Zero(mesh.n_boundary() * m);
}

// Flux with a non-symmetric Jacobian, still monotone (symmetric part spd).
CoefficientSet skewed_flux_set() {
  CoefficientSet c = builtin_problem("lq-dbc").coeffs;
  Eigen::Matrix2d A;
  A << 2.0, 0.5, 0.0, 1.0;
  c.flux = [A](const Eigen::Vector2d&, const Eigen::Vector2d& z) -> Eigen::Vector2d {
    return A * z;
  };
  c.flux_jac = [A](const Eigen::Vector2d&, const Eigen::Vector2d&) { return A; };
  c.flags.state_independent_jacobians = true;
  c.c0 = 3.0;
  return c;
}

}  // namespace

TEST_CASE("apply_A on constant states reduces to the boundary reaction") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 21});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field ones = Field::Ones(mesh.n_nodes());
  for (double c : {1.0, -0.3, 2.5}) {
    DualField d = apply_A(mesh, lq, Field::Constant(mesh.n_nodes(), c), zero_u(mesh, 1));
    // gradient part vanishes, gamma = ybar: <A, 1> = -c |Gamma|
    CHECK(pairing(d, ones) == doctest::Approx(-c * mesh.surface()).epsilon(1e-13));
  }
}

TEST_CASE("apply_A on the linear profile against the hand quadrature") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 21});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field x = coord_x(mesh);
  // interior: -int |grad x|^2 = -1; boundary: -(0*0 + 1*1) = -1
  CHECK(pairing(apply_A(mesh, lq, x, zero_u(mesh, 1)), x) ==
        doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("control enters apply_A through the boundary reaction gain") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 11});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field zero = Field::Zero(mesh.n_nodes());
  Eigen::VectorXd u = Eigen::VectorXd::Ones(mesh.n_boundary());
  DualField d = apply_A(mesh, lq, zero, u);
  CHECK(pairing(d, Field::Ones(mesh.n_nodes())) ==
        doctest::Approx(-mesh.surface()).epsilon(1e-13));
}

TEST_CASE("apply_DyA vanishes on the zero direction and matches apply_A for lq") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 15});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 5);
  Eigen::VectorXd u = 0.4 * Eigen::VectorXd::Ones(mesh.n_boundary());

  DualField atzero = apply_DyA(mesh, lq, y, u, Field::Zero(mesh.n_nodes()));
  CHECK(atzero.w.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));

  // the lq operator is affine in the state: DyA(y,u) p == A(p, 0)
  Field p = testutil::random_field(mesh.n_nodes(), 6);
  DualField lin = apply_DyA(mesh, lq, y, u, p);
  DualField full = apply_A(mesh, lq, p, zero_u(mesh, 1));
  CHECK((lin.w - full.w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("apply_DyA is the finite-difference limit of apply_A") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 15});
  CoefficientSet sl = builtin_problem("semilinear-dbc", [] {
                        BuiltinParams p;
                        p.epsilon = 0.5;
                        p.kappa = 0.8;
                        return p;
                      }()).coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 7);
  Field p = testutil::random_field(mesh.n_nodes(), 8);
  Eigen::VectorXd u = 0.2 * Eigen::VectorXd::Ones(mesh.n_boundary());
  DualField dy = apply_DyA(mesh, sl, y, u, p);

  double err[3];
  for (int k = 0; k < 3; ++k) {
    const double eps = std::pow(10.0, -(k + 1));
    DualField hi = apply_A(mesh, sl, y + eps * p, u);
    DualField lo = apply_A(mesh, sl, y - eps * p, u);
    err[k] = ((hi.w - lo.w) / (2 * eps) - dy.w).cwiseAbs().maxCoeff();
  }
  // central differences of a smooth map: order 2 in the step
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
  CHECK(std::log10(err[0] / err[2]) / 2.0 > 1.7);
}

TEST_CASE("transpose identity holds for symmetric and skewed flux Jacobians") {
  Mesh mesh = build_mesh(RectangleDesc{0.0, 1.0, 0.0, 1.0, 5, 4});
  for (const CoefficientSet& c : {builtin_problem("semilinear-dbc", [] {
                                    BuiltinParams p;
                                    p.epsilon = 0.5;
                                    p.kappa = 0.8;
                                    return p;
                                  }()).coeffs,
                                  skewed_flux_set()}) {
    Field y = testutil::random_field(mesh.n_nodes(), 11);
    Eigen::VectorXd u = 0.3 * Eigen::VectorXd::Ones(mesh.n_boundary());
    for (std::uint64_t s = 0; s < 10; ++s) {
      Field p = testutil::random_field(mesh.n_nodes(), 30 + s);
      Field z = testutil::random_field(mesh.n_nodes(), 60 + s);
      const double a = pairing(apply_DyA(mesh, c, y, u, z), p);
      const double b = pairing(apply_DyA_adjoint(mesh, c, y, u, p), z);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }
}

TEST_CASE("linearization matrix reproduces apply_DyA on random directions") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 13});
  CoefficientSet sl = builtin_problem("semilinear-dbc", [] {
                        BuiltinParams p;
                        p.epsilon = 0.3;
                        p.kappa = 0.2;
                        return p;
                      }()).coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 13);
  Eigen::VectorXd u = -0.1 * Eigen::VectorXd::Ones(mesh.n_boundary());
  Eigen::SparseMatrix<double> J = linearization_matrix(mesh, sl, y, u);
  for (std::uint64_t s = 0; s < 4; ++s) {
    Field p = testutil::random_field(mesh.n_nodes(), 80 + s);
    Eigen::VectorXd direct = apply_DyA(mesh, sl, y, u, p).w;
    CHECK((J * p - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("lq operator is affine: three collinear evaluations are collinear") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 15});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 17);
  Field w = testutil::random_field(mesh.n_nodes(), 18);
  Field z = testutil::random_field(mesh.n_nodes(), 19);
  Eigen::VectorXd u = 0.5 * Eigen::VectorXd::Ones(mesh.n_boundary());
  auto at = [&](double lam) { return pairing(apply_A(mesh, lq, y + lam * w, u), z); };
  // affine in lambda: midpoint value equals the average of the endpoints
  CHECK(at(0.5) == doctest::Approx(0.5 * (at(0.0) + at(1.0))).epsilon(1e-12));
}

TEST_CASE("hemicontinuity along a line for the saturating flux") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 15});
  CoefficientSet sl = builtin_problem("semilinear-dbc", [] {
                        BuiltinParams p;
                        p.epsilon = 0.5;
                        p.kappa = 0.8;
                        return p;
                      }()).coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 21);
  Field w = testutil::random_field(mesh.n_nodes(), 22);
  Field z = testutil::random_field(mesh.n_nodes(), 23);
  Eigen::VectorXd u = zero_u(mesh, 1);
  auto at = [&](double lam) { return pairing(apply_A(mesh, sl, y + lam * w, u), z); };
  const double base = at(0.0);
  double prev = std::abs(at(1e-2) - base);
  for (double lam : {1e-4, 1e-6}) {
    const double gap = std::abs(at(lam) - base);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev <= 1e-4 * (1.0 + std::abs(base)));
}

TEST_CASE("sampled monotonicity margins of the full operator") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 15});
  for (const char* family : {"lq-dbc", "semilinear-dbc"}) {
    BuiltinParams params;
    if (family[0] == 's') {
      params.epsilon = 0.5;
      params.kappa = 0.8;
    }
    CoefficientSet c = builtin_problem(family, params).coeffs;
    Eigen::VectorXd u = 0.25 * Eigen::VectorXd::Ones(mesh.n_boundary());
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      Field y1 = testutil::random_field(mesh.n_nodes(), 100 + s);
      Field y2 = testutil::random_field(mesh.n_nodes(), 500 + s);
      Field d = y1 - y2;
      const double gap = pairing(apply_A(mesh, c, y1, u), d) - pairing(apply_A(mesh, c, y2, u), d);
      const double margin = -gap - c.delta * (grad_sq(mesh, d) + boundary_sq(mesh, d));
      worst = std::min(worst, margin);
    }
    CHECK(worst >= -1e-10);
  }
}

TEST_CASE("running and terminal cost quadrature on constants") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 21});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field ones = Field::Ones(mesh.n_nodes());
  // 1/2 y^2 over O plus 1/2 ybar^2 over Gamma: 0.5 + 1.0
  CHECK(running_cost(mesh, lq, ones, zero_u(mesh, 1)) == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(terminal_cost(mesh, lq, ones) == doctest::Approx(1.5).epsilon(1e-13));
  // the control penalty integrates 1/2 |u|^2 over Gamma
  Eigen::VectorXd u = 2.0 * Eigen::VectorXd::Ones(mesh.n_boundary());
  CHECK(running_cost(mesh, lq, ones, u) == doctest::Approx(1.5 + 4.0).epsilon(1e-13));
}

TEST_CASE("cost state derivatives match central differences") {
  Mesh mesh = build_mesh(RectangleDesc{0.0, 1.0, 0.0, 1.0, 4, 4});
  CoefficientSet sl = builtin_problem("semilinear-dbc", [] {
                        BuiltinParams p;
                        p.epsilon = 0.2;
                        p.kappa = 0.4;
                        return p;
                      }()).coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 31);
  Field z = testutil::random_field(mesh.n_nodes(), 32);
  Eigen::VectorXd u = 0.5 * Eigen::VectorXd::Ones(mesh.n_boundary());
  const double eps = 1e-6;

  const double run_fd = (running_cost(mesh, sl, y + eps * z, u) -
                         running_cost(mesh, sl, y - eps * z, u)) / (2 * eps);
  CHECK(pairing(running_cost_dy(mesh, sl, y, u), z) == doctest::Approx(run_fd).epsilon(1e-7));

  const double term_fd = (terminal_cost(mesh, sl, y + eps * z) -
                          terminal_cost(mesh, sl, y - eps * z)) / (2 * eps);
  CHECK(pairing(terminal_cost_dy(mesh, sl, y), z) == doctest::Approx(term_fd).epsilon(1e-7));
}

TEST_CASE("control derivative matrices carry the density derivatives per node") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 9});
  CoefficientSet lq = builtin_problem("lq-dbc").coeffs;
  Field y = testutil::random_field(mesh.n_nodes(), 41);
  Eigen::VectorXd u(2);
  u << 0.7, -0.2;
  Eigen::MatrixXd ldu = running_cost_du(mesh, lq, y, u);
  REQUIRE(ldu.rows() == 2);
  REQUIRE(ldu.cols() == 1);
  // lq penalty r |u|^2 / 2 with r = 1: derivative is u itself
  CHECK(ldu(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(ldu(1, 0) == doctest::Approx(-0.2).epsilon(1e-14));

  Eigen::MatrixXd gdu = reaction_du_matrix(mesh, lq, y, u);
  // gamma = ybar + beta u with beta = 1
  CHECK(gdu(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gdu(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("adjoint-side monotonicity and coercivity margins") {
  Mesh mesh = build_mesh(IntervalDesc{0.0, 1.0, 15});
  for (const char* family : {"lq-dbc", "semilinear-dbc"}) {
    BuiltinParams params;
    if (family[0] == 's') {
      params.epsilon = 0.5;
      params.kappa = 0.8;
    }
    CoefficientSet c = builtin_problem(family, params).coeffs;
    Eigen::VectorXd u = 0.25 * Eigen::VectorXd::Ones(mesh.n_boundary());
    for (std::uint64_t s = 0; s < 100; ++s) {
      Field y = testutil::random_field(mesh.n_nodes(), 700 + s);
      Field p = testutil::random_field(mesh.n_nodes(), 900 + s);
      // monotone: <DyA* p, p> <= 0
      const double quad = pairing(apply_DyA_adjoint(mesh, c, y, u, p), p);
      CHECK(quad <= 1e-10);
      // coercive below by the dissipation of the quadratic form
      DualField ldy = running_cost_dy(mesh, c, y, u);
      const double lhs = -quad - pairing(ldy, p);
      const double lnorm2 = pairing(ldy, riesz(mesh, ldy));
      const double rhs = c.delta * (grad_sq(mesh, p) + boundary_sq(mesh, p)) -
                         0.5 * lnorm2 - 0.5 * inner_H(mesh, p, p);
      CHECK(lhs - rhs >= -1e-10);
    }
  }
}
