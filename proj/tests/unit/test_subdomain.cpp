#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "kdg/box.hpp"
#include "kdg/error.hpp"
#include "kdg/subdomain.hpp"

using namespace kdg;

namespace {

Partition by_position(const Mesh& mesh, int n, const std::function<int(const Vec3&)>& id) {
  std::vector<int> ids(static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) ids[c] = id(mesh.cell(c).centroid);
  return make_partition(mesh, ids, n);
}

struct StepFixture {
  Mesh mesh = make_unit_cube(4);
  MaxwellModel model;
  Discretization disc;
  KineticField f_old;
  BoundarySpec bc{BoundaryCondition::dirichlet(
      [](const Vec3& x, double t, double* out) { plane_wave_exact(x, t, 2.0, out); })};

  explicit StepFixture(VelocitySet set) : disc(mesh, model, MaterialTable{}, std::move(set)) {
    disc.set_dt(compute_dt(mesh, model, 1.85));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    f_old.assign(disc.num_velocities(), NodalField(mesh.num_cells(), disc.space().num_nodes(), 6));
    for (auto& fk : f_old)
      for (double& x : fk.values()) x = u(rng);
  }

  KineticField monolithic() const {
    KineticField out = f_old;
    MonolithicEngine().transport(disc, f_old, out, bc, 0.0);
    return out;
  }

  double deviation(SubdomainEngine& engine) const {
    KineticField mono = monolithic(), out = f_old;
    engine.transport(disc, f_old, out, bc, 0.0);
    double dev = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k)
      for (std::size_t i = 0; i < out[k].values().size(); ++i) {
        dev = std::max(dev, std::abs(out[k].values()[i] - mono[k].values()[i]));
        scale = std::max(scale, std::abs(mono[k].values()[i]));
      }
    return dev / scale;
  }
};

}  // namespace

TEST_SUITE("subdomain") {
  TEST_CASE("RCB with one subdomain") {
    const Mesh mesh = make_unit_cube(3);
    const Partition p = partition_rcb(mesh, 1);
    CHECK(p.n_subdomains == 1);
    CHECK(p.interface_faces.empty());
    for (int s : p.subdomain_of) CHECK(s == 0);
    CHECK(p.diameter[0] == doctest::Approx(std::sqrt(3.0)));
  }

  TEST_CASE("RCB halves the cube across its median plane") {
    const Mesh mesh = make_unit_cube(4);
    const Partition p = partition_rcb(mesh, 2);
    CHECK(p.cells_of[0].size() == p.cells_of[1].size());
    double lower_max = -1.0, upper_min = 2.0;
    for (int c : p.cells_of[0]) lower_max = std::max(lower_max, mesh.cell(c).centroid[0]);
    for (int c : p.cells_of[1]) upper_min = std::min(upper_min, mesh.cell(c).centroid[0]);
    CHECK(lower_max < upper_min);
    REQUIRE_FALSE(p.interface_faces.empty());
    for (const auto& f : p.interface_faces)
      for (int v : mesh.face(f.face).vertex_ids) CHECK(mesh.vertex(v).coords[0] == doctest::Approx(0.5));
  }

  TEST_CASE("RCB into eight parts gives octants") {
    const Mesh mesh = make_unit_cube(4);
    const Partition p = partition_rcb(mesh, 8);
    std::set<int> signatures;
    for (int s = 0; s < 8; ++s) {
      CHECK(p.cells_of[s].size() == static_cast<std::size_t>(mesh.num_cells() / 8));
      std::set<int> sig;
      for (int c : p.cells_of[s]) {
        const Vec3& x = mesh.cell(c).centroid;
        sig.insert((x[0] > 0.5) + 2 * (x[1] > 0.5) + 4 * (x[2] > 0.5));
      }
      CHECK(sig.size() == 1);
      signatures.insert(*sig.begin());
    }
    CHECK(signatures.size() == 8);
    CHECK_THROWS_AS(partition_rcb(mesh, mesh.num_cells() + 1), ConfigError);
    CHECK_THROWS_AS(partition_rcb(mesh, 0), ConfigError);
  }

  TEST_CASE("RCB balances uneven counts") {
    const Mesh mesh = make_unit_cube(3);
    for (int n : {3, 5, 7}) {
      const Partition p = partition_rcb(mesh, n);
      std::size_t lo = mesh.num_cells(), hi = 0;
      for (const auto& cells : p.cells_of) {
        lo = std::min(lo, cells.size());
        hi = std::max(hi, cells.size());
      }
      CHECK(hi - lo <= 2);
    }
  }

  TEST_CASE("interface faces are exactly the faces between subdomains") {
    const Mesh mesh = make_unit_cube(3);
    const Partition p = partition_rcb(mesh, 5);
    std::set<int> expected;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Face& face = mesh.face(f);
      if (!face.is_boundary() && p.subdomain_of[face.left_cell] != p.subdomain_of[face.right_cell]) expected.insert(f);
    }
    std::set<int> got;
    int previous = -1;
    for (const auto& f : p.interface_faces) {
      CHECK(f.face > previous);
      previous = f.face;
      got.insert(f.face);
      CHECK(f.i == p.subdomain_of[mesh.face(f.face).left_cell]);
      CHECK(f.j == p.subdomain_of[mesh.face(f.face).right_cell]);
      CHECK(f.i != f.j);
    }
    CHECK(got == expected);
  }

  TEST_CASE("partition files") {
    const Mesh mesh = make_unit_cube(2);
    std::string zeros;
    for (int c = 0; c < mesh.num_cells(); ++c) zeros += "0\n";
    std::istringstream in(zeros);
    const Partition single = load_partition(in, mesh);
    CHECK(single.n_subdomains == 1);
    CHECK(single.interface_faces.empty());

    const Partition rcb = partition_rcb(mesh, 4);
    std::stringstream io;
    save_partition(rcb, io);
    const Partition back = load_partition(io, mesh);
    CHECK(back.n_subdomains == 4);
    CHECK(back.subdomain_of == rcb.subdomain_of);

    std::string bad = zeros;
    bad.replace(0, 1, "4");
    std::istringstream out_of_range(bad);
    CHECK_THROWS_AS(load_partition(out_of_range, mesh, 4), ConfigError);
    std::istringstream short_file("0\n1\n");
    CHECK_THROWS_AS(load_partition(short_file, mesh), ConfigError);
    CHECK_THROWS_AS(load_partition("/nonexistent/partition.txt", mesh), ConfigError);
  }

  TEST_CASE("one subdomain reproduces the monolithic step bitwise") {
    StepFixture fx(builtin_velocity_set("D3Q4", std::sqrt(3.0)));
    for (int iterations : {1, 3}) {
      SubdomainEngine engine(fx.disc, partition_rcb(fx.mesh, 1), IterationOptions{iterations, 0.0});
      KineticField out = fx.f_old;
      engine.transport(fx.disc, fx.f_old, out, fx.bc, 0.0);
      const KineticField mono = fx.monolithic();
      for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k].values() == mono[k].values());
    }
  }

  TEST_CASE("aligned slabs converge in two iterations") {
    StepFixture fx(builtin_velocity_set("D1Q2", std::sqrt(3.0)));
    const Partition p = by_position(fx.mesh, 2, [](const Vec3& x) { return x[0] < 0.5 ? 0 : 1; });
    SubdomainEngine exact(fx.disc, p, IterationOptions{2, 0.0});
    CHECK(exact.plan().max_depth() == 2);
    CHECK(fx.deviation(exact) <= 1e-12);
    SubdomainEngine short_of(fx.disc, p, IterationOptions{1, 0.0});
    CHECK(fx.deviation(short_of) > 1e-6);
  }

  TEST_CASE("quadrants converge in three iterations") {
    StepFixture fx(builtin_velocity_set("D2Q3", std::sqrt(3.0)));
    const Partition p =
        by_position(fx.mesh, 4, [](const Vec3& x) { return (x[0] < 0.5 ? 0 : 1) + (x[1] < 0.5 ? 0 : 2); });
    SubdomainEngine engine(fx.disc, p, IterationOptions{3, 0.0});
    CHECK(engine.plan().max_depth() == 3);
    CHECK(fx.deviation(engine) <= 1e-12);
  }

  TEST_CASE("automatic iteration count follows the subdomain DAG depth") {
    StepFixture fx(builtin_velocity_set("D3Q4", std::sqrt(3.0)));
    SubdomainEngine engine(fx.disc, partition_rcb(fx.mesh, 8), IterationOptions{0, 0.0});
    CHECK(engine.iterations() == engine.plan().max_depth());
    CHECK(fx.deviation(engine) <= 1e-12);
  }

  TEST_CASE("interface residuals") {
    CHECK(iterate_residual(std::vector<double>{}, std::vector<double>{}) == 0.0);
    const std::vector<double> a = {1.0, -2.0, 3.0}, b = {1.0, -2.5, 3.25};
    CHECK(iterate_residual(a, a) == 0.0);
    CHECK(iterate_residual(a, b) == 0.5);

    StepFixture fx(builtin_velocity_set("D1Q2", std::sqrt(3.0)));
    const Partition p = by_position(fx.mesh, 2, [](const Vec3& x) { return x[0] < 0.5 ? 0 : 1; });
    SubdomainEngine engine(fx.disc, p, IterationOptions{4, 0.0});
    KineticField out = fx.f_old;
    engine.transport(fx.disc, fx.f_old, out, fx.bc, 0.0);
    const auto res = engine.last_residuals();
    REQUIRE(res.size() >= 3);
    CHECK(res.front() > 0.0);
    CHECK(res.back() <= 1e-12);

    SubdomainEngine early(fx.disc, p, IterationOptions{10, 1e-12});
    out = fx.f_old;
    early.transport(fx.disc, fx.f_old, out, fx.bc, 0.0);
    CHECK(early.last_residuals().size() < 10);
    CHECK(fx.deviation(early) <= 1e-12);
  }

  TEST_CASE("exchange counters are symmetric") {
    StepFixture fx(builtin_velocity_set("D3Q4", std::sqrt(3.0)));
    SubdomainEngine engine(fx.disc, partition_rcb(fx.mesh, 8), IterationOptions{3, 0.0});
    KineticField out = fx.f_old;
    engine.transport(fx.disc, fx.f_old, out, fx.bc, 0.0);
    CHECK(engine.stats().values_sent > 0);
    CHECK(engine.stats().values_sent == engine.stats().values_received);

    const ExchangePlan& plan = engine.plan();
    for (const auto& vel : plan.velocities) {
      std::size_t routed = 0;
      for (const auto& r : vel.routes) {
        CHECK(r.src != r.dst);
        routed += r.faces.size();
      }
      CHECK(routed == vel.slot_face.size());
    }
  }

  TEST_CASE("trace payload encoding") {
    TracePayload p;
    p.iteration = 1;
    p.velocity = 2;
    p.face_count = 2;
    p.values = {0.5, -1.0, 2.0, 3.5, 1e-300, -0.0};
    const auto bytes = encode_payload(p);
    REQUIRE(bytes.size() == 12 + 6 * sizeof(double));
    CHECK(bytes[0] == std::byte{1});
    CHECK(bytes[1] == std::byte{0});
    CHECK(bytes[4] == std::byte{2});
    CHECK(bytes[8] == std::byte{2});
    const TracePayload back = decode_payload(bytes, 3);
    CHECK(back.iteration == 1);
    CHECK(back.velocity == 2);
    CHECK(back.face_count == 2);
    CHECK(back.values == p.values);
    CHECK_THROWS_AS(decode_payload(bytes, 4), Error);
    CHECK_THROWS_AS(decode_payload(std::span<const std::byte>(bytes).first(bytes.size() - 1), 3), Error);
  }

  TEST_CASE("subdomain CFL report") {
    const Mesh mesh = make_unit_cube(2);
    const Partition whole = partition_rcb(mesh, 1);
    const VelocitySet d3q4 = builtin_velocity_set("D3Q4", std::sqrt(3.0));
    const CflReport ok = check_subdomain_cfl(whole, 0.1, d3q4);
    CHECK(ok.ok);
    CHECK(ok.travel == doctest::Approx(0.3));
    CHECK(ok.min_diameter == doctest::Approx(std::sqrt(3.0)));

    const VelocitySet d1q2 = builtin_velocity_set("D1Q2", 2.0);
    CHECK(check_subdomain_cfl(whole, whole.diameter[0] / 2.0, d1q2).ok);

    const Partition many = partition_rcb(make_unit_cube(4), 64);
    const CflReport warn = check_subdomain_cfl(many, 10.0, d3q4);
    CHECK_FALSE(warn.ok);
    CHECK_FALSE(warn.message.empty());
  }
}
