#include "kdg/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "kdg/box.hpp"
#include "kdg/error.hpp"
#include "kdg/gmsh.hpp"
#include "kdg/vtk.hpp"

#ifdef KDG_HAVE_MPI
#include "kdg/mpi_transport.hpp"
#endif

namespace kdg {
namespace {

/// Relative errors at or below this are round-off; no order is derived from them.
constexpr double kErrorFloor = 1e-13;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double spec_number(const std::vector<std::string>& parts, std::size_t i, double fallback) {
  return parts.size() > i ? std::stod(parts[i]) : fallback;
}

std::vector<double> with_points(std::vector<double> xs, std::initializer_list<double> extra) {
  xs.insert(xs.end(), extra);
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs) {
    if (out.empty() || x - out.back() > 1e-9) out.push_back(x);
  }
  return out;
}

std::string vtk_path(const std::string& dir, long step) {
  std::ostringstream name;
  name << "solution_" << std::setw(6) << std::setfill('0') << step << ".vtk";
  return (std::filesystem::path(dir) / name.str()).string();
}

}  // namespace

void Diagnostics::write_csv(std::ostream& out, bool include_wall) const {
  out << std::setprecision(17);
  out << "step,t,error,max_norm";
  for (const auto& name : components) out << ",l2_" << name;
  out << ",iterations,last_residual";
  if (include_wall) out << ",wall_seconds";
  out << '\n';
  for (const auto& r : records) {
    out << r.step << ',' << r.t << ',' << r.error << ',' << r.max_norm;
    for (double v : r.l2) out << ',' << v;
    out << ',' << r.residuals.size() << ',' << (r.residuals.empty() ? 0.0 : r.residuals.back());
    if (include_wall) out << ',' << r.wall_seconds;
    out << '\n';
  }
}

Mesh build_mesh(const RunConfig& config) {
  const std::string& spec = config.mesh;
  if (spec.rfind("builtin:", 0) != 0) return load_mesh(spec);
  const auto parts = split(spec, ':');
  if (parts.size() < 3) throw ConfigError("builtin mesh spec '" + spec + "' needs a kind and a resolution");
  const std::string& kind = parts[1];
  int n = 0;
  double fine = 0.0;
  int layers = 0;
  try {
    n = std::stoi(parts[2]);
    fine = spec_number(parts, 3, 0.0);
    layers = static_cast<int>(spec_number(parts, 4, 1.0));
  } catch (const std::exception&) {
    throw ConfigError("malformed builtin mesh spec '" + spec + "'");
  }
  if (n < 1) throw ConfigError("builtin mesh resolution must be >= 1");
  if (kind == "cube") return make_unit_cube(n);
  if (kind == "refined") {
    if (!(fine > 0.0)) throw ConfigError("builtin:refined needs a positive fine spacing");
    const auto xs = refined_points(0.0, 1.0, n, 0.5, fine, layers);
    return make_box_mesh(xs, xs, xs);
  }
  if (kind == "slab") {
    const double width = fine > 0.0 ? fine : 1.0 / n;
    return make_box_mesh(uniform_points(0.0, 1.0, n), {0.0, width}, {0.0, width});
  }
  if (kind == "wire") {
    if (!(fine > 0.0)) throw ConfigError("builtin:wire needs a positive fine spacing");
    const double r = config.wire_radius;
    const double half = 0.5 * config.wire_length;
    const auto xs = refined_points(0.0, 1.0, n, 0.5, fine, layers);
    const auto zs = with_points(uniform_points(0.0, 1.0, n), {0.5 - half, 0.5 + half});
    return make_box_mesh(xs, xs, zs, [&](const Vec3& c) {
      const bool inside = std::hypot(c[0] - 0.5, c[1] - 0.5) <= r && std::abs(c[2] - 0.5) < half;
      return inside ? 1 : 0;
    });
  }
  throw ConfigError("unknown builtin mesh kind '" + kind + "'");
}

std::optional<StateFunction> configured_solution(const RunConfig& config) {
  const std::string& s = config.solution;
  if (s == "zero") return std::nullopt;
  if (s == "plane-wave") {
    const double nu = config.nu;
    return StateFunction([nu](const Vec3& x, double t, double* out) { plane_wave_exact(x, t, nu, out); });
  }
  if (s == "bump") {
    const double eta = config.bump_eta;
    const double xc = config.bump_center;
    return StateFunction([eta, xc](const Vec3& x, double t, double* out) { bump_pulse_exact(x, t, out, eta, xc); });
  }
  if (s == "wave") {
    const Vec3 a = config.advection_velocity;
    const double speed = a.norm();
    if (!(speed > 0.0)) throw ConfigError("solution 'wave' needs a nonzero advection velocity");
    const Vec3 dir = a / speed;
    const double nu = config.nu;
    return StateFunction([=](const Vec3& x, double t, double* out) {
      out[0] = std::cos(2.0 * std::numbers::pi * nu * (x.dot(dir) - speed * t));
    });
  }
  if (s == "constant") {
    const double v = config.constant_value;
    const int m = config.model == "advection" ? 1 : 6;
    return StateFunction([v, m](const Vec3&, double, double* out) { std::fill(out, out + m, v); });
  }
  throw ConfigError("unknown solution '" + s + "'");
}

Simulation::Simulation(RunConfig config) : config_(std::move(config)) {
  if (config_.threads > 0) {
    threads_ = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                     static_cast<std::size_t>(config_.threads));
  }
  mesh_ = build_mesh(config_);
  model_ = make_model(config_.model, config_.advection_velocity, config_.antenna);
  if ((config_.model == "advection") != (model_->num_components() == 1)) throw ConfigError("inconsistent model");
  VelocitySet set = builtin_velocity_set(config_.velocity_set, config_.lambda);
  const SubcharacteristicReport sub = subcharacteristic_check(set, *model_);
  if (!sub.ok) throw ConfigError("sub-characteristic condition violated: " + sub.message);

  disc_ = std::make_unique<Discretization>(mesh_, *model_, config_.materials, std::move(set),
                                           SolverOptions{config_.order, config_.theta, config_.omega});
  dt_ = config_.dt ? *config_.dt : compute_dt(mesh_, *model_, *config_.beta);
  disc_->set_dt(dt_);
  total_steps_ = config_.steps ? *config_.steps : static_cast<long>(std::ceil(config_.t_end / dt_ - 1e-9));
  if (total_steps_ < 0) total_steps_ = 0;

  exact_ = configured_solution(config_);
  auto condition = [&](const std::string& kind) {
    if (kind == "zero") return BoundaryCondition::homogeneous();
    if (!exact_) throw ConfigError("boundary kind 'exact' needs a solution other than 'zero'");
    return BoundaryCondition::dirichlet(*exact_);
  };
  BoundarySpec bc(condition(config_.boundary_default));
  for (const auto& [tag, kind] : config_.boundary) bc.set(tag, condition(kind));

  std::unique_ptr<TransportEngine> engine;
  const bool use_mpi = config_.backend == "mpi";
  if (config_.subdomains > 1 || use_mpi) {
    partition_ = config_.partition == "rcb" ? partition_rcb(mesh_, config_.subdomains)
                                            : load_partition(config_.partition, mesh_, config_.subdomains);
    const IterationOptions it{config_.iterations, config_.iteration_tolerance};
    if (use_mpi) {
#ifdef KDG_HAVE_MPI
      auto mpi = std::make_unique<MpiSubdomainEngine>(*disc_, *partition_, it);
      root_ = mpi->rank() == 0;
      engine = std::move(mpi);
#else
      throw ConfigError("backend 'mpi' requested but the library was built without MPI");
#endif
    } else {
      engine = std::make_unique<SubdomainEngine>(*disc_, *partition_, it);
    }
    const CflReport cfl = check_subdomain_cfl(*partition_, dt_, disc_->system().set);
    if (!cfl.ok && root_) std::cerr << "warning: " << cfl.message << '\n';
  }
  solver_ = std::make_unique<Solver>(*disc_, std::move(bc), std::move(engine));
  if (exact_) {
    solver_->initialize(*exact_, 0.0);
  } else {
    const int m = model_->num_components();
    solver_->initialize([m](const Vec3&, double, double* out) { std::fill(out, out + m, 0.0); }, 0.0);
  }
}

Simulation::~Simulation() = default;

StepRecord Simulation::record(double wall_seconds) const {
  StepRecord r;
  r.step = solver_->steps();
  r.t = solver_->time();
  const NodalField& w = solver_->macro_state();
  const DgSpace& space = disc_->space();
  const int m = w.num_components();
  r.error = std::numeric_limits<double>::quiet_NaN();
  if (exact_) {
    try {
      r.error = error_norm(space, w, *exact_, r.t);
    } catch (const NumericalError&) {
    }
  }
  r.l2.assign(m, 0.0);
  const Eigen::MatrixXd& mass = space.reference().mass();
  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const auto block = w.block(c);
    const Eigen::MatrixXd gram = block.transpose() * mass * block;
    for (int i = 0; i < m; ++i) r.l2[i] += space.jacobian_det(c) * gram(i, i);
  }
  for (double& v : r.l2) v = std::sqrt(v);
  r.max_norm = max_abs(w);
  r.residuals = solver_->engine().last_residuals();
  r.wall_seconds = wall_seconds;
  return r;
}

Eigen::VectorXd Simulation::probe(const Vec3& x) const {
  const int c = disc_->space().locate(x);
  if (c == kNoCell) throw ConfigError("probe point outside the mesh");
  return disc_->space().evaluate(solver_->macro_state(), c, x);
}

RunSummary Simulation::run(std::ostream* log) {
  namespace fs = std::filesystem;
  const bool write = root_ && !config_.output_dir.empty();
  const auto names = model_->component_names();
  if (write) fs::create_directories(config_.output_dir);

  RunSummary summary;
  summary.dt = dt_;
  summary.h_min = mesh_.h_min();
  summary.diagnostics.components = names;
  summary.diagnostics.records.push_back(record(0.0));

  std::ostringstream probes;
  probes << std::setprecision(17);
  auto sample_probes = [&] {
    for (const auto& p : config_.probes) {
      const Eigen::VectorXd v = probe(p.x);
      probes << solver_->steps() << ',' << solver_->time() << ',' << p.name;
      for (int i = 0; i < v.size(); ++i) probes << ',' << v[i];
      probes << '\n';
    }
  };
  sample_probes();
  if (write) write_vtk(disc_->space(), solver_->macro_state(), names, vtk_path(config_.output_dir, 0));

  while (solver_->steps() < total_steps_) {
    const long next = solver_->steps() + 1;
    const auto start = std::chrono::steady_clock::now();
    try {
      solver_->step();
    } catch (const Error& e) {
      throw Error("step " + std::to_string(next) + ": " + e.what());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (next % config_.diagnostics_every == 0 || next == total_steps_) {
      summary.diagnostics.records.push_back(record(wall));
      const StepRecord& r = summary.diagnostics.records.back();
      if (!std::isfinite(r.max_norm)) throw NumericalError("step " + std::to_string(next) + ": non-finite solution");
      if (log && root_) {
        *log << "step " << r.step << " t=" << r.t << " max|W|=" << r.max_norm;
        if (!std::isnan(r.error)) *log << " e_r=" << r.error;
        *log << '\n';
      }
    }
    sample_probes();
    if (write && config_.vtk_every > 0 && next % config_.vtk_every == 0) {
      write_vtk(disc_->space(), solver_->macro_state(), names, vtk_path(config_.output_dir, next));
    }
  }

  if (write) {
    if (config_.vtk_every <= 0 || total_steps_ % config_.vtk_every != 0) {
      write_vtk(disc_->space(), solver_->macro_state(), names, vtk_path(config_.output_dir, total_steps_));
    }
    std::ofstream csv(fs::path(config_.output_dir) / "diagnostics.csv");
    summary.diagnostics.write_csv(csv);
    if (!config_.probes.empty()) {
      std::ofstream pcsv(fs::path(config_.output_dir) / "probes.csv");
      pcsv << "step,t,probe";
      for (const auto& n : names) pcsv << ',' << n;
      pcsv << '\n' << probes.str();
    }
    std::ofstream cfg(fs::path(config_.output_dir) / "config.txt");
    cfg << dump_config(config_);
  }

  const StepRecord& last = summary.diagnostics.records.back();
  summary.steps = solver_->steps();
  summary.final_time = solver_->time();
  if (!std::isnan(last.error)) summary.final_error = last.error;
  summary.max_norm = last.max_norm;
  return summary;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& base, const std::vector<long>& step_counts) {
  if (step_counts.size() < 2) throw ConfigError("a convergence study needs at least two refinements");
  if (base.solution == "zero") throw ConfigError("a convergence study needs an exact solution");
  if (!(base.t_end > 0.0)) throw ConfigError("a convergence study needs t_end > 0");
  std::vector<ConvergenceRow> rows;
  for (long n : step_counts) {
    if (n < 1) throw ConfigError("step counts must be positive");
    RunConfig cfg = base;
    cfg.steps = n;
    cfg.dt = base.t_end / static_cast<double>(n);
    cfg.beta.reset();
    cfg.output_dir.clear();
    Simulation sim(cfg);
    const RunSummary s = sim.run();
    ConvergenceRow row;
    row.steps = n;
    row.dt = sim.dt();
    row.error = s.final_error.value_or(std::numeric_limits<double>::quiet_NaN());
    if (!rows.empty()) {
      const double prev = rows.back().error;
      if (prev > kErrorFloor && row.error > kErrorFloor) row.order = std::log2(prev / row.error);
    }
    rows.push_back(row);
  }
  return rows;
}

void BenchResult::write_csv(std::ostream& out) const {
  out << std::setprecision(10);
  out << "subdomains,threads,cores,seconds,efficiency,max_difference\n";
  for (const auto& r : rows) {
    out << r.subdomains << ',' << r.threads << ',' << r.cores << ',' << r.seconds << ',' << r.efficiency << ','
        << r.max_difference << '\n';
  }
}

BenchResult benchmark(const RunConfig& base, const std::vector<std::pair<int, int>>& grid, long steps) {
  if (grid.empty()) throw ConfigError("benchmark grid is empty");
  BenchResult result;
  std::vector<double> reference;
  double reference_scale = 1.0;
  for (const auto& [subdomains, threads] : grid) {
    RunConfig cfg = base;
    cfg.subdomains = subdomains;
    cfg.threads = threads;
    cfg.steps = steps;
    cfg.output_dir.clear();
    Simulation sim(cfg);
    const auto start = std::chrono::steady_clock::now();
    sim.run();
    BenchRow row;
    row.subdomains = subdomains;
    row.threads = threads;
    row.cores = subdomains * threads;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& w = sim.solver().macro_state().values();
    if (reference.empty()) {
      reference = w;
      for (double v : w) reference_scale = std::max(reference_scale, std::abs(v));
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        row.max_difference = std::max(row.max_difference, std::abs(w[i] - reference[i]));
      }
    }
    if (row.max_difference > 1e-10 * reference_scale) result.outputs_match = false;
    result.rows.push_back(row);
  }
  double t1 = result.rows.front().seconds * result.rows.front().cores;
  for (const auto& r : result.rows) {
    if (r.subdomains == 1 && r.threads == 1) t1 = r.seconds;
  }
  for (auto& r : result.rows) r.efficiency = r.seconds > 0.0 ? t1 / (r.seconds * r.cores) : 0.0;
  return result;
}

}  // namespace kdg
