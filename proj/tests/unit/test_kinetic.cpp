#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "kdg/box.hpp"
#include "kdg/error.hpp"
#include "kdg/kinetic.hpp"
#include "kdg/transport.hpp"

using namespace kdg;

namespace {

/// Maxwellians from the full (d+1)m x (d+1)m moment system.
std::vector<double> dense_maxwellian(const VelocitySet& set, const HyperbolicModel& model, const double* w) {
  const int m = model.num_components();
  const int n = set.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * m, n * m);
  Eigen::VectorXd b(n * m);
  std::vector<double> q(m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < n; ++k) a(i, k * m + i) = 1.0;
    b[i] = w[i];
  }
  for (int d = 0; d < set.dim; ++d) {
    model.flux(w, Vec3::Unit(d), Material{}, q.data());
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < n; ++k) a((d + 1) * m + i, k * m + i) = set.v[k][d];
      b[(d + 1) * m + i] = q[i];
    }
  }
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

struct Fixture {
  Mesh mesh = make_unit_cube(1);
  MaxwellModel model;
  Discretization disc{mesh, model, MaterialTable{}, builtin_velocity_set("D3Q4", std::sqrt(3.0))};

  KineticField random_field(unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    KineticField f(4, NodalField(mesh.num_cells(), disc.space().num_nodes(), 6));
    for (auto& fk : f)
      for (double& x : fk.values()) x = u(rng);
    return f;
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_SUITE("kinetic") {
  TEST_CASE("builtin velocity sets") {
    const VelocitySet d3q4 = builtin_velocity_set("D3Q4", std::sqrt(3.0));
    REQUIRE(d3q4.size() == 4);
    Vec3 sum = Vec3::Zero();
    for (const auto& v : d3q4.v) {
      CHECK(v.norm() == doctest::Approx(3.0).epsilon(1e-15));
      sum += v;
    }
    CHECK(sum.norm() <= 1e-15);
    const double l = std::sqrt(3.0);
    CHECK((d3q4.v[0] - Vec3(l, l, l)).norm() == 0.0);
    CHECK((d3q4.v[1] - Vec3(l, -l, -l)).norm() == 0.0);
    CHECK((d3q4.v[2] - Vec3(-l, l, -l)).norm() == 0.0);
    CHECK((d3q4.v[3] - Vec3(-l, -l, l)).norm() == 0.0);

    const VelocitySet d1q2 = builtin_velocity_set("D1Q2", 1.0);
    REQUIRE(d1q2.size() == 2);
    CHECK(d1q2.v[0][0] == -1.0);
    CHECK(d1q2.v[1][0] == 1.0);

    const VelocitySet d2q3 = builtin_velocity_set("D2Q3", 2.0);
    REQUIRE(d2q3.size() == 3);
    CHECK((d2q3.v[0] + d2q3.v[1] + d2q3.v[2]).norm() <= 1e-15);
    for (const auto& v : d2q3.v) CHECK(v.norm() == doctest::Approx(2.0));

    CHECK_THROWS_AS(builtin_velocity_set("D3Q19", 1.0), ConfigError);
    CHECK_THROWS_AS(builtin_velocity_set("D3Q4", 0.0), ConfigError);
    CHECK_THROWS_AS(builtin_velocity_set("D3Q4", -1.0), ConfigError);
  }

  TEST_CASE("singular moment systems are rejected") {
    CHECK_THROWS_AS(make_velocity_set("flat", 2, {Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)}), Error);
  }

  TEST_CASE("closed-form D3Q4 Maxwellian example") {
    const VelocitySet set = builtin_velocity_set("D3Q4", std::sqrt(3.0));
    MaxwellModel model;
    const double w[6] = {0, 0, 1, 0, 0, 0};
    double mk[24];
    maxwellian(set, model, Material{}, w, mk);
    const double s = std::sqrt(3.0) / 12.0;
    const double expected[6] = {0, 0, 0.25, s, -s, 0};
    for (int i = 0; i < 6; ++i) CHECK(std::abs(mk[i] - expected[i]) <= 1e-15);
  }

  TEST_CASE("Maxwellians agree with a dense moment solve") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    MaxwellModel maxwell;
    AdvectionModel advection(Vec3(0.5, -0.25, 0.75));
    for (const char* name : {"D1Q2", "D2Q3", "D3Q4"}) {
      const VelocitySet set = builtin_velocity_set(name, 1.7);
      for (const HyperbolicModel* model : {static_cast<const HyperbolicModel*>(&maxwell),
                                           static_cast<const HyperbolicModel*>(&advection)}) {
        const int m = model->num_components();
        for (int t = 0; t < 100; ++t) {
          std::vector<double> w(m), fast(static_cast<std::size_t>(m) * set.size()), generic(fast.size());
          for (double& x : w) x = u(rng);
          maxwellian(set, *model, Material{}, w.data(), fast.data());
          maxwellian_generic(set, *model, Material{}, w.data(), generic.data());
          const auto dense = dense_maxwellian(set, *model, w.data());
          for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(std::abs(fast[i] - dense[i]) <= 1e-12);
            CHECK(std::abs(generic[i] - dense[i]) <= 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("macro reconstruction") {
    Fixture fx;
    const KineticField f = fx.random_field(1), g = fx.random_field(2);
    KineticField sum = f;
    for (std::size_t k = 0; k < f.size(); ++k)
      for (std::size_t i = 0; i < f[k].values().size(); ++i) sum[k].values()[i] += g[k].values()[i];
    const NodalField a = macro(f), b = macro(g), c = macro(sum);
    for (std::size_t i = 0; i < c.values().size(); ++i)
      CHECK(std::abs(c.values()[i] - a.values()[i] - b.values()[i]) <= 1e-14);

    KineticField zero = f;
    for (auto& fk : zero) std::fill(fk.values().begin(), fk.values().end(), 0.0);
    CHECK(max_abs(macro(zero).values()) == 0.0);

    const KineticField eq = equilibrium_init(a, fx.disc.system());
    const NodalField back = macro(eq);
    for (std::size_t i = 0; i < back.values().size(); ++i) CHECK(std::abs(back.values()[i] - a.values()[i]) <= 1e-14);
    CHECK(max_abs(flux_error(eq, fx.disc.system())) <= 1e-14);
  }

  TEST_CASE("relaxation") {
    Fixture fx;
    const KineticSystem& sys = fx.disc.system();
    const KineticField f = fx.random_field(3);
    const NodalField w = macro(f);
    const auto y0 = flux_error(f, sys);
    REQUIRE(max_abs(y0) > 0.1);

    KineticField one = f;
    relax(one, w, 1.0, sys);
    CHECK(max_abs(flux_error(one, sys)) <= 1e-12);

    KineticField two = f;
    relax(two, w, 2.0, sys);
    const auto y2 = flux_error(two, sys);
    for (std::size_t i = 0; i < y0.size(); ++i) CHECK(std::abs(y2[i] + y0[i]) <= 1e-12);

    // Applying the omega = 2 map twice restores Y.
    relax(two, macro(two), 2.0, sys);
    const auto y4 = flux_error(two, sys);
    for (std::size_t i = 0; i < y0.size(); ++i) CHECK(std::abs(y4[i] - y0[i]) <= 1e-12);

    KineticField near = f;
    relax(near, w, 2.0 - 1e-12, sys);
    KineticField exact = f;
    relax(exact, w, 2.0, sys);
    for (std::size_t k = 0; k < f.size(); ++k)
      for (std::size_t i = 0; i < f[k].values().size(); ++i)
        CHECK(std::abs(near[k].values()[i] - exact[k].values()[i]) <= 1e-9);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> om(1.0, 2.0);
    for (int t = 0; t < 5; ++t) {
      KineticField r = f;
      relax(r, w, om(rng), sys);
      const NodalField back = macro(r);
      for (std::size_t i = 0; i < back.values().size(); ++i) CHECK(std::abs(back.values()[i] - w.values()[i]) <= 1e-14);
    }

    KineticField bad = f;
    CHECK_THROWS_AS(relax(bad, w, 0.5, sys), ConfigError);
    CHECK_THROWS_AS(relax(bad, w, 2.5, sys), ConfigError);
  }

  TEST_CASE("sub-characteristic condition") {
    MaxwellModel maxwell;
    CHECK(subcharacteristic_check(builtin_velocity_set("D3Q4", std::sqrt(3.0)), maxwell).ok);
    const auto slow = subcharacteristic_check(builtin_velocity_set("D3Q4", 0.1), maxwell);
    CHECK_FALSE(slow.ok);
    CHECK_FALSE(slow.message.empty());
    AdvectionModel advection(Vec3(1.5, 0, 0));
    CHECK_FALSE(subcharacteristic_check(builtin_velocity_set("D1Q2", 1.5), advection).ok);
    CHECK(subcharacteristic_check(builtin_velocity_set("D1Q2", 1.6), advection).ok);
    const double samples[] = {0.5, 2.5};
    CHECK_FALSE(subcharacteristic_check(builtin_velocity_set("D1Q2", 2.0), advection, samples).ok);
  }
}
