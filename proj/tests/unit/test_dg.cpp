#include <doctest.h>

#include <cmath>
#include <random>

#include "kdg/box.hpp"
#include "kdg/dg.hpp"
#include "kdg/error.hpp"
#include "kdg/quadrature.hpp"
#include "kdg/reference.hpp"
#include "support/oracles.hpp"

using namespace kdg;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

/// Integral of x^a y^b z^c over the reference tetrahedron.
double tet_monomial(int a, int b, int c) { return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3); }
double tri_monomial(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

Mesh single_cell() {
  return Mesh::build({{0.1, 0.2, 0.0}, {1.3, 0.1, 0.2}, {0.2, 0.9, 0.1}, {0.3, 0.4, 1.1}}, {{0, 1, 2, 3}}, {});
}

}  // namespace

TEST_SUITE("dg") {
  TEST_CASE("volume rule integrates monomials up to degree 5") {
    double wsum = 0.0;
    for (const auto& p : tet_rule_degree5()) wsum += p.weight;
    CHECK(wsum == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    for (int a = 0; a <= 5; ++a)
      for (int b = 0; a + b <= 5; ++b)
        for (int c = 0; a + b + c <= 5; ++c) {
          double q = 0.0;
          for (const auto& p : tet_rule_degree5()) q += p.weight * std::pow(p.xi[0], a) * std::pow(p.xi[1], b) * std::pow(p.xi[2], c);
          CHECK(std::abs(q - tet_monomial(a, b, c)) <= 1e-15);
        }
  }

  TEST_CASE("face rule integrates monomials up to degree 4") {
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b) {
        double q = 0.0;
        for (const auto& p : tri_rule_degree4()) q += p.weight * std::pow(p.xi[0], a) * std::pow(p.xi[1], b);
        CHECK(std::abs(q - tri_monomial(a, b)) <= 1e-15);
      }
  }

  TEST_CASE("gauss-jacobi and the conical rule") {
    std::vector<double> x, w;
    for (double alpha : {0.0, 1.0, 2.0}) {
      gauss_jacobi(5, alpha, x, w);
      for (int k = 0; k <= 9; ++k) {
        double q = 0.0;
        for (int i = 0; i < 5; ++i) q += w[i] * std::pow(x[i], k);
        // Beta(k+1, alpha+1)
        const double exact = std::tgamma(k + 1.0) * std::tgamma(alpha + 1.0) / std::tgamma(k + alpha + 2.0);
        CHECK(q == doctest::Approx(exact).epsilon(1e-13));
      }
    }
    const auto rule = conical_tet_rule(6);
    for (int a = 0; a <= 11; ++a)
      for (int b = 0; a + b <= 11; b += 3) {
        double q = 0.0;
        for (const auto& p : rule) q += p.weight * std::pow(p.xi[0], a) * std::pow(p.xi[2], b);
        CHECK(q == doctest::Approx(tet_monomial(a, 0, b)).epsilon(1e-12));
      }
  }

  TEST_CASE("reference elements") {
    const ReferenceElement p1(1), p2(2);
    CHECK(p1.num_nodes() == 4);
    CHECK(p2.num_nodes() == 10);
    CHECK_THROWS_AS(ReferenceElement(3), Error);
    for (const ReferenceElement* e : {&p1, &p2}) {
      for (int i = 0; i < e->num_nodes(); ++i) {
        const Eigen::VectorXd v = e->values(e->nodes()[i]);
        for (int j = 0; j < e->num_nodes(); ++j) CHECK(std::abs(v[j] - (i == j ? 1.0 : 0.0)) <= 1e-14);
      }
      std::mt19937_64 rng(2);
      std::uniform_real_distribution<double> u(0.0, 0.33);
      for (int t = 0; t < 10; ++t) {
        const Vec3 xi(u(rng), u(rng), u(rng));
        CHECK(std::abs(e->values(xi).sum() - 1.0) <= 1e-12);
        CHECK(e->gradients(xi).colwise().sum().norm() <= 1e-12);
      }
      for (const auto& p : e->volume_rule()) CHECK(std::abs(e->values(p.xi).sum() - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("P1 mass matrix entries") {
    const Mesh m = single_cell();
    const DgSpace space(m, 1);
    const double vol = m.cell(0).volume;
    const Eigen::MatrixXd mass = space.jacobian_det(0) * space.reference().mass();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(mass(i, j) == doctest::Approx(i == j ? vol / 10.0 : vol / 20.0).epsilon(1e-14));
  }

  TEST_CASE("local matrices agree with barycentric integration") {
    const Mesh m = single_cell();
    const Vec3 v(0.4, -1.1, 0.7);
    for (int order : {1, 2}) {
      const DgSpace space(m, order);
      const LocalMatrices local = assemble_local(space, 0, v, 0.1, 0.5);
      const testing::CellBasis basis(m, 0, order);
      Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(basis.size(), basis.size());
      Eigen::MatrixXd conv = mass;
      for (const auto& q : testing::tet_points(m, 0, 6)) {
        const Eigen::VectorXd psi = basis.values(q.x);
        mass += q.w * psi * psi.transpose();
        conv += q.w * (basis.gradients(q.x) * v) * psi.transpose();
      }
      CHECK((local.mass - mass).norm() <= 1e-13);
      CHECK((local.convection - conv).norm() <= 1e-13);
    }
  }

  TEST_CASE("zero velocity leaves only the mass term") {
    const Mesh m = single_cell();
    const DgSpace space(m, 2);
    const LocalMatrices local = assemble_local(space, 0, Vec3::Zero(), 0.25, 0.5);
    CHECK(local.convection.norm() == 0.0);
    CHECK(local.outflow.norm() == 0.0);
    CHECK(local.inflow.empty());
    CHECK((local.system - local.mass / 0.25).norm() <= 1e-14);
  }

  TEST_CASE("divergence identity and factorization") {
    const Mesh m = make_unit_cube(2);
    const DgSpace space(m, 2);
    const Vec3 v(1.0, 0.3, -0.5);
    for (int c = 0; c < m.num_cells(); ++c) {
      const LocalMatrices local = assemble_local(space, c, v, 0.1, 0.5);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.num_nodes());
      Eigen::VectorXd r = local.convection * ones - local.outflow * ones;
      for (const auto& in : local.inflow) {
        r -= in.vn * space.weighted_trace(c, in.local) * Eigen::VectorXd::Ones(space.num_face_points());
      }
      CHECK(r.norm() <= 1e-13);
      const LocalOperator op = factorize(space, c, local, 0.1, 0.5);
      CHECK((op.lu.reconstructedMatrix() - local.system).norm() <= 1e-10 * local.system.norm());
    }
  }

  TEST_CASE("neighbors agree on face points") {
    const Mesh m = make_box_mesh(uniform_points(0, 1, 2), refined_points(0, 1, 2, 0.5, 0.1, 1), uniform_points(0, 1, 1));
    const DgSpace space(m, 2);
    // A quadratic field is represented exactly, so both traces coincide.
    NodalField f(m.num_cells(), space.num_nodes(), 1);
    for (int c = 0; c < m.num_cells(); ++c)
      for (int j = 0; j < space.num_nodes(); ++j) {
        const Vec3& x = space.node_position(c, j);
        f.node_data(c, j)[0] = 1.0 + x[0] * x[1] - 2.0 * x[2] * x[2];
      }
    for (int fid = 0; fid < m.num_faces(); ++fid) {
      const Face& face = m.face(fid);
      if (face.is_boundary()) continue;
      TraceBlock a, b;
      space.trace(face.left_cell, space.local_index(fid, 0), f.cell_data(face.left_cell), 1, a);
      space.trace(face.right_cell, space.local_index(fid, 1), f.cell_data(face.right_cell), 1, b);
      CHECK((a - b).norm() <= 1e-12);
      double wsum = 0.0;
      for (double w : space.face_weights(fid)) wsum += w;
      CHECK(wsum == doctest::Approx(face.area).epsilon(1e-14));
    }
  }

  TEST_CASE("interior face fluxes cancel pairwise") {
    const Mesh m = make_unit_cube(2);
    const DgSpace space(m, 2);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec3 v(0.7, 0.2, -0.4);
    double total = 0.0, scale = 0.0;
    for (int fid = 0; fid < m.num_faces(); ++fid) {
      const Face& face = m.face(fid);
      if (face.is_boundary()) continue;
      const double vn = v.dot(face.normal);
      const int up = vn > 0 ? face.left_cell : face.right_cell;
      const int down = vn > 0 ? face.right_cell : face.left_cell;
      const int up_local = space.local_index(fid, vn > 0 ? 0 : 1);
      const int down_local = space.local_index(fid, vn > 0 ? 1 : 0);
      Eigen::VectorXd f_up(space.num_nodes());
      for (double& x : f_up) x = u(rng);
      const Eigen::VectorXd values = space.trace_matrix(up, up_local) * f_up;
      const double out = std::abs(vn) * (space.weighted_trace(up, up_local) * values).sum();
      const double in = -std::abs(vn) * (space.weighted_trace(down, down_local) * values).sum();
      total += out + in;
      scale += std::abs(out);
    }
    CHECK(std::abs(total) <= 1e-11 * scale);
  }

  TEST_CASE("constant data is preserved by one cell solve") {
    const Mesh m = make_unit_cube(1);
    for (int order : {1, 2}) {
      const DgSpace space(m, order);
      for (double theta : {1.0, 0.5}) {
        const Vec3 v(0.9, -0.4, 0.25);
        for (int c = 0; c < m.num_cells(); ++c) {
          const LocalOperator op = factorize(space, c, assemble_local(space, c, v, 0.37, theta), 0.37, theta);
          CellBlock f(space.num_nodes(), 2), out(space.num_nodes(), 2);
          f.col(0).setConstant(1.5);
          f.col(1).setConstant(-0.25);
          std::vector<TraceBlock> inflow(op.n_inflow, TraceBlock(space.num_face_points(), 2));
          for (auto& t : inflow) {
            t.col(0).setConstant(1.5);
            t.col(1).setConstant(-0.25);
          }
          solve_cell(op, space, c, f.data(), 2, inflow, out.data());
          CHECK((out - f).cwiseAbs().maxCoeff() <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("implicit upwind step is dissipative on one cell") {
    const Mesh m = single_cell();
    const DgSpace space(m, 2);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::MatrixXd mass = space.jacobian_det(0) * space.reference().mass();
    for (int t = 0; t < 20; ++t) {
      const Vec3 v(u(rng), u(rng), u(rng));
      const double dt = 0.01 + std::abs(u(rng));
      const LocalOperator op = factorize(space, 0, assemble_local(space, 0, v, dt, 1.0), dt, 1.0);
      CellBlock f(10, 1), out(10, 1);
      for (int j = 0; j < 10; ++j) f(j, 0) = u(rng);
      std::vector<TraceBlock> inflow(op.n_inflow, TraceBlock::Zero(space.num_face_points(), 1));
      solve_cell(op, space, 0, f.data(), 1, inflow, out.data());
      const double before = (f.col(0).transpose() * mass * f.col(0))(0, 0);
      const double after = (out.col(0).transpose() * mass * out.col(0))(0, 0);
      CHECK(after <= before * (1.0 + 1e-14));
    }
  }

  TEST_CASE("locate and evaluate") {
    const Mesh m = make_unit_cube(2);
    const DgSpace space(m, 2);
    NodalField f(m.num_cells(), space.num_nodes(), 2);
    for (int c = 0; c < m.num_cells(); ++c)
      for (int j = 0; j < space.num_nodes(); ++j) {
        const Vec3& x = space.node_position(c, j);
        f.node_data(c, j)[0] = x[0] * x[0] - x[1];
        f.node_data(c, j)[1] = 3.0;
      }
    const Vec3 x(0.31, 0.72, 0.13);
    const int c = space.locate(x);
    REQUIRE(c != kNoCell);
    const Eigen::VectorXd val = space.evaluate(f, c, x);
    CHECK(val[0] == doctest::Approx(x[0] * x[0] - x[1]).epsilon(1e-13));
    CHECK(val[1] == doctest::Approx(3.0));
    CHECK(space.locate(Vec3(1.5, 0.5, 0.5)) == kNoCell);
  }
}
