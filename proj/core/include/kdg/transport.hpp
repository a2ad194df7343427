#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kdg/dg.hpp"
#include "kdg/graph.hpp"
#include "kdg/kinetic.hpp"
#include "kdg/models.hpp"

namespace kdg {

struct BoundaryCondition {
  enum class Kind { Homogeneous, Dirichlet };
  Kind kind = Kind::Homogeneous;
  /// Macroscopic boundary state; used when kind is Dirichlet.
  StateFunction value;

  static BoundaryCondition homogeneous() { return {}; }
  static BoundaryCondition dirichlet(StateFunction f) { return {Kind::Dirichlet, std::move(f)}; }
};

/// Boundary conditions by face tag. Kinetic inflow traces are the Maxwellians
/// of the prescribed macroscopic state.
class BoundarySpec {
 public:
  BoundarySpec() = default;
  explicit BoundarySpec(BoundaryCondition fallback) : fallback_(std::move(fallback)) {}

  void set(int tag, BoundaryCondition bc) { by_tag_[tag] = std::move(bc); }
  void set_default(BoundaryCondition bc) { fallback_ = std::move(bc); }
  /// Throws ConfigError for an unmapped tag without a default.
  const BoundaryCondition& at(int tag) const;
  /// Checks that every boundary tag of the mesh is mapped.
  void validate(const Mesh& mesh) const;

 private:
  std::map<int, BoundaryCondition> by_tag_;
  std::optional<BoundaryCondition> fallback_;
};

struct SolverOptions {
  int order = 2;
  double theta = 0.5;
  double omega = 2.0 - 1e-12;
};

/// Everything that depends on the mesh, the model and the time step but not
/// on the solution: DG geometry, velocity DAGs and factorized local systems.
class Discretization {
 public:
  Discretization(const Mesh& mesh, const HyperbolicModel& model, const MaterialTable& materials, VelocitySet set,
                 SolverOptions options = {});

  const Mesh& mesh() const noexcept { return *mesh_; }
  const DgSpace& space() const noexcept { return space_; }
  const KineticSystem& system() const noexcept { return system_; }
  const HyperbolicModel& model() const noexcept { return *system_.model; }
  const MaterialTable& materials() const noexcept { return materials_; }
  const SolverOptions& options() const noexcept { return options_; }
  int num_velocities() const noexcept { return system_.num_velocities(); }
  int num_components() const noexcept { return system_.num_components(); }
  const VelocityDag& dag(int k) const { return dags_[static_cast<std::size_t>(k)]; }

  /// Assembles and factorizes every local system. Refactorizes only when dt changes.
  void set_dt(double dt);
  double dt() const noexcept { return dt_; }
  double theta() const noexcept { return options_.theta; }
  const LocalOperator& op(int k, int cell) const {
    return ops_[static_cast<std::size_t>(k) * mesh_->num_cells() + cell];
  }

 private:
  const Mesh* mesh_;
  MaterialTable materials_;
  SolverOptions options_;
  DgSpace space_;
  KineticSystem system_;
  std::vector<VelocityDag> dags_;
  std::vector<LocalOperator> ops_;
  double dt_ = 0.0;
};

/// Source of new-time upwind values for faces whose upwind cell lies outside
/// the region being swept; returns n_q x m row-major values.
using FrozenTraceLookup = std::function<const double*(int face)>;

/// Region restriction for a sweep: cells with region_of[c] != region take
/// their new-time traces from `frozen`.
struct SweepRegion {
  std::span<const int> region_of;
  int region = 0;
  FrozenTraceLookup frozen;
};

/// theta-blended inflow values of one face: upwind trace or boundary Maxwellian.
void inflow_values(const Discretization& disc, int k, int cell, const InflowFace& in, const NodalField& f_old,
                   const NodalField& f_new, const double* frozen_new, const BoundarySpec& bc, double t_prev,
                   TraceBlock& out);

/// Sweeps the given levels of velocity k, writing f_new. Within a level cells
/// run concurrently.
void sweep_levels(const Discretization& disc, int k, std::span<const std::vector<int>> levels, const NodalField& f_old,
                  NodalField& f_new, const BoundarySpec& bc, double t_prev, const SweepRegion* region = nullptr);

/// Advances every F_k by one implicit transport step.
class TransportEngine {
 public:
  virtual ~TransportEngine() = default;
  virtual void transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new,
                         const BoundarySpec& bc, double t_prev) = 0;
  /// Interface residual per iteration of the last call, if iterative.
  virtual std::vector<double> last_residuals() const { return {}; }
};

/// Single-domain downwind sweeps over the full velocity DAGs.
class MonolithicEngine final : public TransportEngine {
 public:
  void transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new, const BoundarySpec& bc,
                 double t_prev) override;
};

/// Interpolates W at the DG nodes.
NodalField interpolate(const DgSpace& space, int m, const StateFunction& w, double t);

/// Time stepper: transport, macro, source, relaxation.
class Solver {
 public:
  Solver(const Discretization& disc, BoundarySpec bc, std::unique_ptr<TransportEngine> engine = nullptr);

  /// Equilibrium kinetic data of the interpolated initial state.
  void initialize(const StateFunction& w0, double t0 = 0.0);
  void set_state(KineticField f, double t);
  void step();

  double time() const noexcept { return t_; }
  long steps() const noexcept { return steps_; }
  const KineticField& kinetic() const noexcept { return f_; }
  /// Macroscopic field of the last completed step.
  const NodalField& macro_state() const noexcept { return w_; }
  const Discretization& discretization() const noexcept { return *disc_; }
  TransportEngine& engine() noexcept { return *engine_; }

 private:
  void apply_source();

  const Discretization* disc_;
  BoundarySpec bc_;
  std::unique_ptr<TransportEngine> engine_;
  bool has_source_ = false;
  KineticField f_;
  KineticField scratch_;
  NodalField w_;
  double t_ = 0.0;
  double t0_ = 0.0;
  long steps_ = 0;
};

/// beta * h_min / lambda_max.
double compute_dt(const Mesh& mesh, const HyperbolicModel& model, double beta);
double compute_dt(double h_min, double max_wave_speed, double beta);

/// Pooled relative L2 error of a nodal field against an exact state.
/// Throws NumericalError when the exact state has zero norm.
double error_norm(const DgSpace& space, const NodalField& w, const StateFunction& exact, double t);

/// max over nodes and components of |W|.
double max_abs(const NodalField& w);

}  // namespace kdg
