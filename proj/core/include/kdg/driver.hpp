#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <tbb/global_control.h>

#include "kdg/config.hpp"
#include "kdg/subdomain.hpp"
#include "kdg/transport.hpp"

namespace kdg {

struct StepRecord {
  long step = 0;
  double t = 0.0;
  /// NaN when no exact solution is configured.
  double error = 0.0;
  /// L2 norm of each component over the domain.
  std::vector<double> l2;
  double max_norm = 0.0;
  /// Interface residual of each subdomain iteration of this step.
  std::vector<double> residuals;
  double wall_seconds = 0.0;
};

struct Diagnostics {
  std::vector<std::string> components;
  std::vector<StepRecord> records;

  /// Header row then one row per record. Wall-clock is the last column when included.
  void write_csv(std::ostream& out, bool include_wall = true) const;
};

struct RunSummary {
  Diagnostics diagnostics;
  long steps = 0;
  double dt = 0.0;
  double h_min = 0.0;
  double final_time = 0.0;
  std::optional<double> final_error;
  double max_norm = 0.0;
};

/// Builds the mesh named by the configuration (file or builtin generator).
Mesh build_mesh(const RunConfig& config);
/// Exact (or prescribed) state of the configured solution; empty for "zero".
std::optional<StateFunction> configured_solution(const RunConfig& config);

/// One configured run: mesh, model, discretization, engine and solver.
class Simulation {
 public:
  explicit Simulation(RunConfig config);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const RunConfig& config() const noexcept { return config_; }
  const Mesh& mesh() const noexcept { return mesh_; }
  const HyperbolicModel& model() const noexcept { return *model_; }
  const Discretization& discretization() const noexcept { return *disc_; }
  Solver& solver() noexcept { return *solver_; }
  const Solver& solver() const noexcept { return *solver_; }
  const Partition* partition() const noexcept { return partition_ ? &*partition_ : nullptr; }
  const std::optional<StateFunction>& exact() const noexcept { return exact_; }
  double dt() const noexcept { return dt_; }
  /// ceil(t_end / dt), or the configured step count.
  long total_steps() const noexcept { return total_steps_; }
  /// Rank 0 (or the only process) writes files.
  bool is_root() const noexcept { return root_; }

  StepRecord record(double wall_seconds) const;
  /// W at a physical point through the containing cell's basis.
  Eigen::VectorXd probe(const Vec3& x) const;

  /// Advances to total_steps(), writing VTK, diagnostics and probe files when
  /// an output directory is configured.
  RunSummary run(std::ostream* log = nullptr);

 private:
  RunConfig config_;
  std::unique_ptr<tbb::global_control> threads_;
  Mesh mesh_;
  std::unique_ptr<HyperbolicModel> model_;
  std::unique_ptr<Discretization> disc_;
  std::optional<Partition> partition_;
  std::unique_ptr<Solver> solver_;
  std::optional<StateFunction> exact_;
  double dt_ = 0.0;
  long total_steps_ = 0;
  bool root_ = true;
};

struct ConvergenceRow {
  long steps = 0;
  double dt = 0.0;
  double error = 0.0;
  /// log2(e_prev / e); empty on the first row or when either error is at round-off level (<= 1e-13).
  std::optional<double> order;
};

/// Runs the configuration to t_end with each step count (dt = t_end / steps)
/// and reports errors and observed orders. Throws ConfigError with fewer than
/// two refinements or without an exact solution.
std::vector<ConvergenceRow> convergence_study(const RunConfig& base, const std::vector<long>& step_counts);

struct BenchRow {
  int subdomains = 1;
  int threads = 1;
  int cores = 1;
  double seconds = 0.0;
  double efficiency = 1.0;
  /// max |W - W_first row| at the final step.
  double max_difference = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  bool outputs_match = true;
  void write_csv(std::ostream& out) const;
};

/// Times `steps` steps for each (subdomains, threads) pair. Efficiency is
/// T_1 / (T * subdomains * threads) with T_1 the (1, 1) row, or the first row
/// scaled by its core count when (1, 1) is absent.
BenchResult benchmark(const RunConfig& base, const std::vector<std::pair<int, int>>& grid, long steps);

}  // namespace kdg
