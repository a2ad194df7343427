#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <tbb/global_control.h>

#include "kdg/box.hpp"
#include "kdg/error.hpp"
#include "kdg/transport.hpp"
#include "support/oracles.hpp"

using namespace kdg;

namespace {

VelocitySet d3q4() { return builtin_velocity_set("D3Q4", std::sqrt(3.0)); }

StateFunction constant_state(std::vector<double> w) {
  return [w](const Vec3&, double, double* out) { std::copy(w.begin(), w.end(), out); };
}

StateFunction plane_wave(double nu) {
  return [nu](const Vec3& x, double t, double* out) { plane_wave_exact(x, t, nu, out); };
}

NodalField random_field(const Discretization& disc, int m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  NodalField f(disc.mesh().num_cells(), disc.space().num_nodes(), m);
  for (double& x : f.values()) x = u(rng);
  return f;
}

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("compute_dt") {
    CHECK(compute_dt(0.0704, 1.0, 1.85) == doctest::Approx(0.13024).epsilon(1e-12));
    CHECK(compute_dt(0.3, 1.0, 2.0) == 2.0 * compute_dt(0.3, 1.0, 1.0));
    CHECK(compute_dt(0.3, 2.0, 1.0) == 0.5 * compute_dt(0.3, 1.0, 1.0));
    CHECK_THROWS_AS(compute_dt(0.3, 1.0, 0.0), ConfigError);
    const Mesh mesh = make_unit_cube(2);
    MaxwellModel model;
    CHECK(compute_dt(mesh, model, 1.5) == 1.5 * mesh.h_min());
  }

  TEST_CASE("error norm") {
    const Mesh mesh = make_unit_cube(2);
    const DgSpace space(mesh, 2);
    const auto exact = plane_wave(1.0);
    const NodalField w = interpolate(space, 6, exact, 0.0);
    NodalField twice = w;
    for (double& x : twice.values()) x *= 2.0;
    // Nodal interpolation is exact at the nodes but not between them.
    const double coarse = error_norm(space, w, exact, 0.0);
    CHECK(coarse > 0.0);
    CHECK(coarse < 0.5);
    const NodalField zero(mesh.num_cells(), space.num_nodes(), 6);
    CHECK(error_norm(space, zero, exact, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    const auto cubic = [](const Vec3& x, double, double* out) { out[0] = x[0] * x[0] + x[1] * x[2] - 0.5 * x[2]; };
    const NodalField q = interpolate(space, 1, cubic, 0.0);
    CHECK(error_norm(space, q, cubic, 0.0) <= 1e-14);
    NodalField q2 = q;
    for (double& x : q2.values()) x *= 2.0;
    CHECK(error_norm(space, q2, cubic, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(error_norm(space, zero, constant_state({0, 0, 0, 0, 0, 0}), 0.0), NumericalError);
  }

  TEST_CASE("error norm of the P2 plane-wave interpolant matches an independent quadrature") {
    const Mesh mesh = make_unit_cube(8);
    const DgSpace space(mesh, 2);
    const NodalField w = interpolate(space, 6, plane_wave(2.0), 0.0);
    const double ours = error_norm(space, w, plane_wave(2.0), 0.0);
    const double oracle = testing::interpolation_error(
        mesh, 2, 6, [](const Vec3& x, double* out) { plane_wave_exact(x, 0.0, 2.0, out); }, 8);
    CHECK(std::abs(ours - oracle) <= 1e-10);
  }

  TEST_CASE("constant states are preserved") {
    const Mesh mesh = make_unit_cube(2);
    MaxwellModel model;
    for (double theta : {1.0, 0.5}) {
      Discretization disc(mesh, model, MaterialTable{}, d3q4(), {2, theta, 2.0 - 1e-12});
      disc.set_dt(0.7);
      const std::vector<double> w0 = {0.3, -1.0, 0.5, 2.0, 0.1, -0.4};
      Solver solver(disc, BoundarySpec(BoundaryCondition::dirichlet(constant_state(w0))));
      solver.initialize(constant_state(w0));
      for (int s = 0; s < 5; ++s) solver.step();
      const NodalField& w = solver.macro_state();
      for (int c = 0; c < w.num_cells(); ++c)
        for (int j = 0; j < w.num_nodes(); ++j)
          for (int i = 0; i < 6; ++i) CHECK(std::abs(w.node_data(c, j)[i] - w0[i]) <= 1e-12);
    }
  }

  TEST_CASE("multi-component sweeps equal scalar sweeps") {
    const Mesh mesh = make_unit_cube(2);
    MaxwellModel maxwell;
    AdvectionModel scalar(Vec3::Zero());
    const SolverOptions options{2, 0.5, 2.0};
    Discretization vec_disc(mesh, maxwell, MaterialTable{}, d3q4(), options);
    Discretization sca_disc(mesh, scalar, MaterialTable{}, d3q4(), options);
    vec_disc.set_dt(0.2);
    sca_disc.set_dt(0.2);
    const BoundarySpec bc(BoundaryCondition::homogeneous());
    const NodalField f_old = random_field(vec_disc, 6, 11);
    for (int k = 0; k < 4; ++k) {
      NodalField f_new(f_old.num_cells(), f_old.num_nodes(), 6);
      sweep_levels(vec_disc, k, vec_disc.dag(k).levels, f_old, f_new, bc, 0.0);
      for (int i = 0; i < 6; ++i) {
        NodalField s_old(f_old.num_cells(), f_old.num_nodes(), 1), s_new = s_old;
        for (std::size_t n = 0; n < s_old.values().size(); ++n) s_old.values()[n] = f_old.values()[6 * n + i];
        sweep_levels(sca_disc, k, sca_disc.dag(k).levels, s_old, s_new, bc, 0.0);
        double diff = 0.0;
        for (std::size_t n = 0; n < s_new.values().size(); ++n)
          diff = std::max(diff, std::abs(s_new.values()[n] - f_new.values()[6 * n + i]));
        CHECK(diff <= 1e-14);
      }
    }
  }

  TEST_CASE("sweeps match a globally assembled solve") {
    const Mesh mesh = make_unit_cube(2);
    AdvectionModel scalar(Vec3::Zero());
    for (int order : {1, 2}) {
      Discretization disc(mesh, scalar, MaterialTable{}, d3q4(), {order, 0.5, 2.0});
      disc.set_dt(0.05);
      const NodalField f_old = random_field(disc, 1, 12);
      const BoundarySpec bc(BoundaryCondition::dirichlet(constant_state({0.75})));
      for (int k = 0; k < 4; ++k) {
        NodalField f_new(f_old.num_cells(), f_old.num_nodes(), 1);
        sweep_levels(disc, k, disc.dag(k).levels, f_old, f_new, bc, 0.0);
        // Inflow traces are the Maxwellian of W = 0.75, i.e. 0.75/4 per velocity.
        const auto ref = testing::global_transport_solve(mesh, order, disc.system().set.v[k], 0.05, 0.5,
                                                         f_old.values(), 1, {0.75 / 4.0});
        double diff = 0.0;
        for (std::size_t n = 0; n < ref.size(); ++n) diff = std::max(diff, std::abs(ref[n] - f_new.values()[n]));
        CHECK(diff <= 1e-10);
      }
    }
  }

  TEST_CASE("step bookkeeping") {
    const Mesh mesh = make_unit_cube(2);
    MaxwellModel model;
    Discretization disc(mesh, model, MaterialTable{}, d3q4());
    disc.set_dt(0.1);
    Solver solver(disc, BoundarySpec(BoundaryCondition::dirichlet(plane_wave(1.0))));
    solver.initialize(plane_wave(1.0));
    for (int s = 1; s <= 7; ++s) {
      solver.step();
      CHECK(solver.steps() == s);
      CHECK(solver.time() == s * 0.1);
      const NodalField w = macro(solver.kinetic());
      double diff = 0.0;
      for (std::size_t n = 0; n < w.values().size(); ++n)
        diff = std::max(diff, std::abs(w.values()[n] - solver.macro_state().values()[n]));
      CHECK(diff <= 1e-14);
    }
  }

  TEST_CASE("macro state is continuous across relaxation without sources") {
    const Mesh mesh = make_unit_cube(2);
    MaxwellModel model;
    Discretization disc(mesh, model, MaterialTable{}, d3q4());
    disc.set_dt(0.1);
    std::vector<NodalField> f_old(4);
    for (int k = 0; k < 4; ++k) f_old[k] = random_field(disc, 6, 20 + k);
    KineticField f_new = f_old;
    MonolithicEngine engine;
    engine.transport(disc, f_old, f_new, BoundarySpec(BoundaryCondition::homogeneous()), 0.0);
    const NodalField before = macro(f_new);
    relax(f_new, before, disc.options().omega, disc.system());
    const NodalField after = macro(f_new);
    double diff = 0.0;
    for (std::size_t n = 0; n < before.values().size(); ++n)
      diff = std::max(diff, std::abs(before.values()[n] - after.values()[n]));
    CHECK(diff <= 1e-14);
  }

  TEST_CASE("boundary specification") {
    BoundarySpec empty;
    CHECK_THROWS_AS(empty.at(1), ConfigError);
    const Mesh mesh = make_unit_cube(1);
    CHECK_THROWS_AS(empty.validate(mesh), ConfigError);
    BoundarySpec partial;
    for (int tag = 1; tag <= 5; ++tag) partial.set(tag, BoundaryCondition::homogeneous());
    CHECK_THROWS_AS(partial.validate(mesh), ConfigError);
    partial.set(6, BoundaryCondition::dirichlet(constant_state({1, 0, 0, 0, 0, 0})));
    CHECK_NOTHROW(partial.validate(mesh));
    CHECK(partial.at(6).kind == BoundaryCondition::Kind::Dirichlet);
    CHECK_NOTHROW(BoundarySpec(BoundaryCondition::homogeneous()).validate(mesh));
  }

  TEST_CASE("results do not depend on the thread count") {
    const Mesh mesh = make_unit_cube(3);
    MaxwellModel model;
    Discretization disc(mesh, model, MaterialTable{}, d3q4());
    disc.set_dt(compute_dt(mesh, model, 5.0));
    std::vector<std::vector<double>> results;
    for (int threads : {1, 4}) {
      tbb::global_control limit(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(threads));
      Solver solver(disc, BoundarySpec(BoundaryCondition::dirichlet(plane_wave(1.0))));
      solver.initialize(plane_wave(1.0));
      for (int s = 0; s < 5; ++s) solver.step();
      results.push_back(solver.macro_state().values());
    }
    CHECK(results[0] == results[1]);
  }

  TEST_CASE("two-material slab splits energy by the Fresnel coefficients") {
    // E3 pulse entering eps_r = 4 at x = 1: r = -1/3, tau = 2/3, R = 1/9, T = 8/9.
    const int n = 96;
    const double h = 2.0 / n;
    const Mesh mesh = make_box_mesh(uniform_points(0, 2, n), {0, h}, {0, h},
                                    [](const Vec3& x) { return x[0] > 1.0 ? 1 : 0; });
    MaterialTable materials;
    materials.set(1, Material{4.0, 0.0});
    PermittivityMaxwellModel model;
    const double r = -1.0 / 3.0, tau = 2.0 / 3.0;
    const auto pulse = [](double s) { return bump(s - 0.5, 0.25); };
    const StateFunction exact = [&](const Vec3& x, double t, double* out) {
      std::fill(out, out + 6, 0.0);
      if (x[0] <= 1.0) {
        const double inc = pulse(x[0] - t), ref = r * pulse(2.0 - x[0] - t);
        out[2] = inc + ref;
        out[4] = -inc + ref;
      } else {
        const double tr = tau * pulse(1.0 + 2.0 * (x[0] - 1.0) - t);
        out[2] = 4.0 * tr;
        out[4] = -2.0 * tr;
      }
    };
    Discretization disc(mesh, model, materials, d3q4());
    disc.set_dt(0.004);
    Solver solver(disc, BoundarySpec(BoundaryCondition::dirichlet(exact)));
    solver.initialize(exact);
    while (solver.time() < 1.0 - 1e-9) solver.step();

    double reflected = 0.0, transmitted = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const double eps = mesh.cell(c).physical_tag == 1 ? 4.0 : 1.0;
      for (const auto& q : testing::tet_points(mesh, c, 4)) {
        const Eigen::VectorXd w = disc.space().evaluate(solver.macro_state(), c, q.x);
        const double e = 0.5 * q.w * (w.head<3>().squaredNorm() / eps + w.tail<3>().squaredNorm());
        (eps > 1.0 ? transmitted : reflected) += e;
      }
    }
    double incident = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c)
      for (const auto& q : testing::tet_points(mesh, c, 4)) incident += q.w * pulse(q.x[0]) * pulse(q.x[0]);
    MESSAGE("R = " << reflected / incident << ", T = " << transmitted / incident);
    CHECK(std::abs(reflected + transmitted - incident) <= 0.02 * incident);
    CHECK(std::abs(reflected / incident - 1.0 / 9.0) <= 0.02);
  }
}
