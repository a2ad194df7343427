#include "kdg/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "kdg/error.hpp"
#include "kdg/quadrature.hpp"

namespace kdg {

const BoundaryCondition& BoundarySpec::at(int tag) const {
  auto it = by_tag_.find(tag);
  if (it != by_tag_.end()) return it->second;
  if (fallback_) return *fallback_;
  throw ConfigError("no boundary condition for boundary tag " + std::to_string(tag));
}

void BoundarySpec::validate(const Mesh& mesh) const {
  for (int tag : mesh.boundary_tags()) {
    const BoundaryCondition& bc = at(tag);
    if (bc.kind == BoundaryCondition::Kind::Dirichlet && !bc.value) {
      throw ConfigError("Dirichlet condition without a state on boundary tag " + std::to_string(tag));
    }
  }
}

Discretization::Discretization(const Mesh& mesh, const HyperbolicModel& model, const MaterialTable& materials,
                               VelocitySet set, SolverOptions options)
    : mesh_(&mesh), materials_(materials), options_(options), space_(mesh, options.order) {
  if (!(options.theta > 0.0 && options.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  if (!(options.omega >= 1.0 && options.omega <= 2.0)) throw ConfigError("omega must lie in [1, 2]");
  if (model.num_components() > kMaxComponents) throw ConfigError("too many model components");
  system_.model = &model;
  system_.set = std::move(set);
  system_.cell_material.reserve(mesh.num_cells());
  for (const Cell& c : mesh.cells()) system_.cell_material.push_back(materials_.get(c.physical_tag));
  for (int k = 0; k < system_.num_velocities(); ++k) {
    dags_.push_back(topo_levels(orient_edges(mesh, system_.set.v[k]), mesh.num_cells(), k));
  }
}

void Discretization::set_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive and finite");
  if (dt == dt_ && !ops_.empty()) return;
  const int nc = mesh_->num_cells();
  const int q = num_velocities();
  std::vector<LocalOperator> ops(static_cast<std::size_t>(q) * nc);
  tbb::parallel_for(0, q * nc, [&](int idx) {
    const int k = idx / nc;
    const int c = idx % nc;
    const LocalMatrices local = assemble_local(space_, c, system_.set.v[k], dt, options_.theta);
    ops[idx] = factorize(space_, c, local, dt, options_.theta);
  });
  ops_ = std::move(ops);
  dt_ = dt;
}

void inflow_values(const Discretization& disc, int k, int cell, const InflowFace& in, const NodalField& f_old,
                   const NodalField& f_new, const double* frozen_new, const BoundarySpec& bc, double t_prev,
                   TraceBlock& out) {
  const DgSpace& space = disc.space();
  const int m = disc.num_components();
  const int nq = space.num_face_points();
  const double theta = disc.theta();
  if (in.neighbor != kNoCell) {
    TraceBlock now(nq, m);
    TraceBlock before(nq, m);
    if (frozen_new != nullptr) {
      now = Eigen::Map<const RowMatrix>(frozen_new, nq, m);
    } else {
      space.trace(in.neighbor, in.neighbor_local, f_new.cell_data(in.neighbor), m, now);
    }
    space.trace(in.neighbor, in.neighbor_local, f_old.cell_data(in.neighbor), m, before);
    out = theta * now + (1.0 - theta) * before;
    return;
  }
  const BoundaryCondition& cond = bc.at(disc.mesh().face(in.face).boundary_tag);
  out.setZero(nq, m);
  if (cond.kind == BoundaryCondition::Kind::Homogeneous) return;
  const double t_eval = t_prev + theta * disc.dt();
  double w[kMaxComponents];
  double mk[4 * kMaxComponents];
  const auto pts = space.face_points(in.face);
  for (int q = 0; q < nq; ++q) {
    cond.value(pts[q], t_eval, w);
    disc.system().maxwellian(cell, w, mk);
    for (int i = 0; i < m; ++i) out(q, i) = mk[k * m + i];
  }
}

void sweep_levels(const Discretization& disc, int k, std::span<const std::vector<int>> levels, const NodalField& f_old,
                  NodalField& f_new, const BoundarySpec& bc, double t_prev, const SweepRegion* region) {
  const DgSpace& space = disc.space();
  const int m = disc.num_components();
  for (const auto& level : levels) {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, level.size()), [&](const tbb::blocked_range<std::size_t>& r) {
      std::array<TraceBlock, 4> g;
      for (std::size_t i = r.begin(); i != r.end(); ++i) {
        const int c = level[i];
        const LocalOperator& op = disc.op(k, c);
        for (int a = 0; a < op.n_inflow; ++a) {
          const InflowFace& in = op.inflow[a];
          const double* frozen = nullptr;
          if (region != nullptr && in.neighbor != kNoCell &&
              region->region_of[static_cast<std::size_t>(in.neighbor)] != region->region) {
            frozen = region->frozen(in.face);
          }
          inflow_values(disc, k, c, in, f_old, f_new, frozen, bc, t_prev, g[a]);
        }
        solve_cell(op, space, c, f_old.cell_data(c), m, std::span<const TraceBlock>(g.data(), op.n_inflow),
                   f_new.cell_data(c));
      }
    });
  }
}

void MonolithicEngine::transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new,
                                 const BoundarySpec& bc, double t_prev) {
  tbb::parallel_for(0, disc.num_velocities(), [&](int k) {
    sweep_levels(disc, k, disc.dag(k).levels, f_old[k], f_new[k], bc, t_prev);
  });
}

NodalField interpolate(const DgSpace& space, int m, const StateFunction& w, double t) {
  const int nc = space.mesh().num_cells();
  NodalField out(nc, space.num_nodes(), m);
  for (int c = 0; c < nc; ++c) {
    for (int j = 0; j < space.num_nodes(); ++j) w(space.node_position(c, j), t, out.node_data(c, j));
  }
  return out;
}

Solver::Solver(const Discretization& disc, BoundarySpec bc, std::unique_ptr<TransportEngine> engine)
    : disc_(&disc), bc_(std::move(bc)), engine_(std::move(engine)) {
  if (!engine_) engine_ = std::make_unique<MonolithicEngine>();
  bc_.validate(disc.mesh());
  has_source_ = disc.model().has_source(disc.materials());
}

void Solver::initialize(const StateFunction& w0, double t0) {
  const NodalField w = interpolate(disc_->space(), disc_->num_components(), w0, t0);
  set_state(equilibrium_init(w, disc_->system()), t0);
}

void Solver::set_state(KineticField f, double t) {
  f_ = std::move(f);
  scratch_ = f_;
  macro_into(f_, w_);
  t_ = t;
  t0_ = t;
  steps_ = 0;
}

void Solver::step() {
  if (!(disc_->dt() > 0.0)) throw ConfigError("time step not set");
  if (f_.empty()) throw Error("solver state not initialized");
  const double t_prev = t_;
  engine_->transport(*disc_, f_, scratch_, bc_, t_prev);
  std::swap(f_, scratch_);
  macro_into(f_, w_);
  if (has_source_) apply_source();
  relax(f_, w_, disc_->options().omega, disc_->system());
  ++steps_;
  t_ = t0_ + static_cast<double>(steps_) * disc_->dt();
}

void Solver::apply_source() {
  const DgSpace& space = disc_->space();
  const KineticSystem& sys = disc_->system();
  const int m = sys.num_components();
  const int q = sys.num_velocities();
  const double t = t_;
  const double dt = disc_->dt();
  tbb::parallel_for(0, w_.num_cells(), [&](int c) {
    const Material& mat = sys.cell_material[static_cast<std::size_t>(c)];
    double before[kMaxComponents];
    double m_before[4 * kMaxComponents];
    double m_after[4 * kMaxComponents];
    for (int j = 0; j < space.num_nodes(); ++j) {
      double* w = w_.node_data(c, j);
      std::copy(w, w + m, before);
      sys.model->apply_source(w, mat, space.node_position(c, j), t, dt);
      if (std::equal(w, w + m, before)) continue;
      sys.maxwellian(c, before, m_before);
      sys.maxwellian(c, w, m_after);
      for (int k = 0; k < q; ++k) {
        double* fk = f_[k].node_data(c, j);
        for (int i = 0; i < m; ++i) fk[i] += m_after[k * m + i] - m_before[k * m + i];
      }
    }
  });
}

double compute_dt(double h_min, double max_wave_speed, double beta) {
  if (!(beta > 0.0)) throw ConfigError("CFL number beta must be positive");
  if (!(max_wave_speed > 0.0)) throw ConfigError("maximal wave speed must be positive");
  return beta * h_min / max_wave_speed;
}

double compute_dt(const Mesh& mesh, const HyperbolicModel& model, double beta) {
  return compute_dt(mesh.h_min(), model.max_wave_speed(), beta);
}

double error_norm(const DgSpace& space, const NodalField& w, const StateFunction& exact, double t) {
  static const std::vector<TetPoint> rule = conical_tet_rule(6);
  const int m = w.num_components();
  const int nc = space.mesh().num_cells();
  std::vector<double> diff(static_cast<std::size_t>(nc), 0.0);
  std::vector<double> ref(static_cast<std::size_t>(nc), 0.0);
  tbb::parallel_for(0, nc, [&](int c) {
    double we[kMaxComponents];
    double d2 = 0.0;
    double r2 = 0.0;
    for (const auto& q : rule) {
      const Eigen::VectorXd psi = space.reference().values(q.xi);
      const Eigen::VectorXd wh = w.block(c).transpose() * psi;
      exact(space.to_physical(c, q.xi), t, we);
      for (int i = 0; i < m; ++i) {
        d2 += q.weight * (wh[i] - we[i]) * (wh[i] - we[i]);
        r2 += q.weight * we[i] * we[i];
      }
    }
    diff[c] = space.jacobian_det(c) * d2;
    ref[c] = space.jacobian_det(c) * r2;
  });
  double num = 0.0;
  double den = 0.0;
  for (int c = 0; c < nc; ++c) {
    num += diff[c];
    den += ref[c];
  }
  if (!(den > 0.0)) throw NumericalError("relative error against an exact state of zero norm");
  return std::sqrt(num / den);
}

double max_abs(const NodalField& w) {
  double mx = 0.0;
  for (double v : w.values()) mx = std::max(mx, std::abs(v));
  return mx;
}

}  // namespace kdg
