#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdg/box.hpp"
#include "kdg/driver.hpp"
#include "kdg/error.hpp"
#include "kdg/gmsh.hpp"
#include "kdg/graph.hpp"
#include "kdg/kinetic.hpp"

#ifdef KDG_HAVE_MPI
#include <mpi.h>
#endif

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> sets;
  std::string beta, omega, subdomains, iterations, threads, order, theta, backend, output;

  void add_to(CLI::App* app) {
    app->add_option("config", config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a configuration key (key=value)");
    app->add_option("--beta", beta, "CFL number");
    app->add_option("--omega", omega, "Relaxation parameter in [1, 2]");
    app->add_option("--subdomains", subdomains, "Number of subdomains");
    app->add_option("--iterations", iterations, "Subdomain iterations per step, or 'auto'");
    app->add_option("--threads", threads, "Worker threads (0: all)");
    app->add_option("--order", order, "Polynomial order (1 or 2)");
    app->add_option("--theta", theta, "Time scheme: 1 (implicit Euler) or 0.5 (Crank-Nicolson)");
    app->add_option("--backend", backend, "threads or mpi");
    app->add_option("-o,--output", output, "Output directory");
  }

  kdg::RunConfig build() const {
    kdg::ConfigMap keys;
    if (!config.empty()) keys = kdg::load_key_values(config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw kdg::ConfigError("--set expects key=value, got '" + s + "'");
      keys[s.substr(0, eq)] = s.substr(eq + 1);
    }
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) keys[key] = v;
    };
    if (!beta.empty()) keys.erase("dt");
    put("beta", beta);
    put("omega", omega);
    put("subdomains", subdomains);
    put("iterations", iterations);
    put("threads", threads);
    put("order", order);
    put("theta", theta);
    put("backend", backend);
    put("output.dir", output);
    return kdg::build_config(keys);
  }
};

std::vector<long> parse_longs(const std::string& list) {
  std::vector<long> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stol(item));
  return out;
}

std::vector<std::pair<int, int>> parse_grid(const std::string& list) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw kdg::ConfigError("grid entries are SUBDOMAINSxTHREADS, got '" + item + "'");
    out.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
  }
  return out;
}

class MpiSession {
 public:
  MpiSession(bool enable, int& argc, char**& argv) {
#ifdef KDG_HAVE_MPI
    if (enable) {
      MPI_Init(&argc, &argv);
      active_ = true;
    }
#else
    (void)enable;
    (void)argc;
    (void)argv;
#endif
  }
  ~MpiSession() {
#ifdef KDG_HAVE_MPI
    if (active_) MPI_Finalize();
#endif
  }
  MpiSession(const MpiSession&) = delete;
  MpiSession& operator=(const MpiSession&) = delete;

 private:
  bool active_ = false;
};

bool wants_mpi(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--backend=mpi" || a == "backend=mpi") return true;
    if (a == "--backend" && i + 1 < argc && std::string(argv[i + 1]) == "mpi") return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic discontinuous Galerkin solver for hyperbolic systems"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Run a simulation");
  run_opts.add_to(run);
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Suppress per-step log lines");

  Overrides conv_opts;
  std::string conv_steps = "8,16,32";
  auto* converge = app.add_subcommand("converge", "Temporal convergence study");
  conv_opts.add_to(converge);
  converge->add_option("--steps", conv_steps, "Comma-separated step counts");

  Overrides bench_opts;
  std::string grid = "1x1,2x1,4x1";
  long bench_steps = 5;
  auto* bench = app.add_subcommand("bench", "Time a grid of subdomain/thread counts");
  bench_opts.add_to(bench);
  bench->add_option("--grid", grid, "Comma-separated SUBDOMAINSxTHREADS entries");
  bench->add_option("--steps", bench_steps, "Steps per run");

  std::string part_mesh, part_out;
  int part_n = 2;
  auto* part = app.add_subcommand("partition", "Recursive coordinate bisection of a mesh");
  part->add_option("mesh", part_mesh, "Mesh file or builtin spec")->required();
  part->add_option("-n,--subdomains", part_n, "Number of subdomains")->required();
  part->add_option("-o,--output", part_out, "Partition file (default: stdout)");

  std::string dag_mesh, dag_set = "D3Q4", dag_dot;
  int dag_k = 0;
  double dag_lambda = std::sqrt(3.0);
  auto* dag = app.add_subcommand("inspect-dag", "Print the upwind levels of one velocity");
  dag->add_option("mesh", dag_mesh, "Mesh file or builtin spec")->required();
  dag->add_option("--velocity-set", dag_set, "D1Q2, D2Q3 or D3Q4");
  dag->add_option("--lambda", dag_lambda, "Lattice speed");
  dag->add_option("-k,--velocity", dag_k, "Velocity index");
  dag->add_option("--dot", dag_dot, "Write the graph in DOT format");

  int box_n = 4;
  std::string box_out;
  auto* box = app.add_subcommand("gen-box", "Write a structured unit-cube mesh as MSH 4.1");
  box->add_option("-n", box_n, "Intervals per axis");
  box->add_option("-o,--output", box_out, "Output .msh path")->required();

  MpiSession mpi(wants_mpi(argc, argv), argc, argv);
  CLI11_PARSE(app, argc, argv);

  auto mesh_from = [](const std::string& spec) {
    kdg::RunConfig cfg;
    cfg.mesh = spec;
    return kdg::build_mesh(cfg);
  };

  try {
    if (*run) {
      kdg::Simulation sim(run_opts.build());
      const kdg::RunSummary s = sim.run(quiet ? nullptr : &std::cout);
      if (sim.is_root()) {
        std::cout << "steps " << s.steps << " dt " << s.dt << " h_min " << s.h_min << " t " << s.final_time
                  << " max|W| " << s.max_norm;
        if (s.final_error) std::cout << " e_r " << *s.final_error;
        std::cout << '\n';
      }
    } else if (*converge) {
      const auto rows = kdg::convergence_study(conv_opts.build(), parse_longs(conv_steps));
      std::cout << "steps,dt,error,order\n";
      for (const auto& r : rows) {
        std::cout << r.steps << ',' << r.dt << ',' << r.error << ',';
        if (r.order) std::cout << *r.order;
        std::cout << '\n';
      }
    } else if (*bench) {
      const kdg::BenchResult r = kdg::benchmark(bench_opts.build(), parse_grid(grid), bench_steps);
      r.write_csv(std::cout);
      if (!r.outputs_match) {
        std::cerr << "error: outputs differ across the benchmark grid\n";
        return 3;
      }
    } else if (*part) {
      const kdg::Mesh mesh = mesh_from(part_mesh);
      const kdg::Partition p = kdg::partition_rcb(mesh, part_n);
      if (part_out.empty()) {
        kdg::save_partition(p, std::cout);
      } else {
        std::ofstream out(part_out);
        kdg::save_partition(p, out);
      }
    } else if (*dag) {
      const kdg::Mesh mesh = mesh_from(dag_mesh);
      const kdg::VelocitySet set = kdg::builtin_velocity_set(dag_set, dag_lambda);
      if (dag_k < 0 || dag_k >= set.size()) throw kdg::ConfigError("velocity index out of range");
      const auto edges = kdg::orient_edges(mesh, set.v[dag_k]);
      const kdg::VelocityDag d = kdg::topo_levels(edges, mesh.num_cells(), dag_k);
      std::cout << "cells " << mesh.num_cells() << " edges " << edges.size() << " levels " << d.levels.size()
                << '\n';
      for (std::size_t l = 0; l < d.levels.size(); ++l) std::cout << "level " << l << ": " << d.levels[l].size() << '\n';
      if (!dag_dot.empty()) {
        std::ofstream out(dag_dot);
        kdg::write_dot(d, out);
      }
    } else if (*box) {
      std::ofstream out(box_out);
      kdg::write_gmsh(kdg::make_unit_cube(box_n), out);
    }
  } catch (const kdg::CycleError& e) {
    std::cerr << "error: " << e.what() << " (cycle of " << e.cycle().size() << " cells)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
