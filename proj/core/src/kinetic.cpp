#include "kdg/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <tbb/parallel_for.h>

#include "kdg/error.hpp"

namespace kdg {
namespace {

constexpr int kMaxVelocities = 4;

}  // namespace

double VelocitySet::max_speed() const {
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, x.norm());
  return s;
}

double VelocitySet::min_speed() const {
  double s = v.empty() ? 0.0 : v.front().norm();
  for (const auto& x : v) s = std::min(s, x.norm());
  return s;
}

VelocitySet make_velocity_set(std::string name, int dim, std::vector<Vec3> vectors, double lambda) {
  if (dim < 1 || dim > 3) throw ConfigError("velocity set dimension must be 1, 2 or 3");
  if (static_cast<int>(vectors.size()) != dim + 1) throw ConfigError("velocity set needs exactly d+1 vectors");
  VelocitySet set;
  set.name = std::move(name);
  set.dim = dim;
  set.lambda = lambda;
  set.v = std::move(vectors);
  const int q = dim + 1;
  Eigen::MatrixXd s(q, q);
  for (int k = 0; k < q; ++k) {
    s(0, k) = 1.0;
    for (int i = 0; i < dim; ++i) s(i + 1, k) = set.v[k][i];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) throw ConfigError("singular moment system for velocity set " + set.name);
  set.moment_inverse = lu.inverse();
  return set;
}

VelocitySet builtin_velocity_set(const std::string& name, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("velocity scale lambda must be positive");
  const double l = lambda;
  if (name == "D1Q2") return make_velocity_set(name, 1, {Vec3(-l, 0, 0), Vec3(l, 0, 0)}, l);
  if (name == "D2Q3") {
    std::vector<Vec3> v;
    for (int k = 0; k < 3; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 3.0;
      v.emplace_back(l * std::cos(a), l * std::sin(a), 0.0);
    }
    return make_velocity_set(name, 2, std::move(v), l);
  }
  if (name == "D3Q4") {
    return make_velocity_set(name, 3, {Vec3(l, l, l), Vec3(l, -l, -l), Vec3(-l, l, -l), Vec3(-l, -l, l)}, l);
  }
  throw ConfigError("unknown velocity set '" + name + "'");
}

void maxwellian_generic(const VelocitySet& set, const HyperbolicModel& model, const Material& mat, const double* w,
                        double* out) {
  const int m = model.num_components();
  const int q = set.size();
  double q_dir[3][kMaxComponents];
  for (int i = 0; i < set.dim; ++i) model.flux(w, Vec3::Unit(i), mat, q_dir[i]);
  for (int k = 0; k < q; ++k) {
    double* mk = out + k * m;
    const double c0 = set.moment_inverse(k, 0);
    for (int c = 0; c < m; ++c) mk[c] = c0 * w[c];
    for (int i = 0; i < set.dim; ++i) {
      const double ci = set.moment_inverse(k, i + 1);
      for (int c = 0; c < m; ++c) mk[c] += ci * q_dir[i][c];
    }
  }
}

void maxwellian_d3q4(const VelocitySet& set, const HyperbolicModel& model, const Material& mat, const double* w,
                     double* out) {
  const int m = model.num_components();
  const double inv = 1.0 / (4.0 * set.lambda * set.lambda);
  double qk[kMaxComponents];
  for (int k = 0; k < 4; ++k) {
    model.flux(w, set.v[k], mat, qk);
    double* mk = out + k * m;
    for (int c = 0; c < m; ++c) mk[c] = 0.25 * w[c] + inv * qk[c];
  }
}

void maxwellian(const VelocitySet& set, const HyperbolicModel& model, const Material& mat, const double* w,
                double* out) {
  if (set.name == "D3Q4") maxwellian_d3q4(set, model, mat, w, out);
  else maxwellian_generic(set, model, mat, w, out);
}

void KineticSystem::maxwellian(int cell, const double* w, double* out) const {
  kdg::maxwellian(set, *model, cell_material[static_cast<std::size_t>(cell)], w, out);
}

void macro_into(const KineticField& f, NodalField& w) {
  if (f.empty()) throw Error("macro of an empty kinetic field");
  if (w.values().size() != f.front().values().size()) {
    w = NodalField(f.front().num_cells(), f.front().num_nodes(), f.front().num_components());
  }
  auto& out = w.values();
  std::copy(f.front().values().begin(), f.front().values().end(), out.begin());
  for (std::size_t k = 1; k < f.size(); ++k) {
    const auto& fk = f[k].values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += fk[i];
  }
}

NodalField macro(const KineticField& f) {
  NodalField w;
  macro_into(f, w);
  return w;
}

void relax(KineticField& f, const NodalField& w, double omega, const KineticSystem& sys) {
  if (!(omega >= 1.0 && omega <= 2.0)) throw ConfigError("relaxation parameter omega must lie in [1, 2]");
  const int m = sys.num_components();
  const int q = sys.num_velocities();
  const int nn = w.num_nodes();
  tbb::parallel_for(0, w.num_cells(), [&](int c) {
    double mk[kMaxVelocities * kMaxComponents];
    for (int j = 0; j < nn; ++j) {
      sys.maxwellian(c, w.node_data(c, j), mk);
      for (int k = 0; k < q; ++k) {
        double* fk = f[k].node_data(c, j);
        for (int i = 0; i < m; ++i) fk[i] = omega * mk[k * m + i] + (1.0 - omega) * fk[i];
      }
    }
  });
}

KineticField equilibrium_init(const NodalField& w, const KineticSystem& sys) {
  const int m = sys.num_components();
  const int q = sys.num_velocities();
  KineticField f(q, NodalField(w.num_cells(), w.num_nodes(), m));
  double mk[kMaxVelocities * kMaxComponents];
  for (int c = 0; c < w.num_cells(); ++c) {
    for (int j = 0; j < w.num_nodes(); ++j) {
      sys.maxwellian(c, w.node_data(c, j), mk);
      for (int k = 0; k < q; ++k) std::copy(mk + k * m, mk + (k + 1) * m, f[k].node_data(c, j));
    }
  }
  return f;
}

std::vector<double> flux_error(const KineticField& f, const KineticSystem& sys) {
  const NodalField w = macro(f);
  const int m = sys.num_components();
  const int d = sys.set.dim;
  const int nn = w.num_nodes();
  std::vector<double> y(static_cast<std::size_t>(w.num_cells()) * nn * d * m, 0.0);
  double qi[kMaxComponents];
  for (int c = 0; c < w.num_cells(); ++c) {
    const Material& mat = sys.cell_material[static_cast<std::size_t>(c)];
    for (int j = 0; j < nn; ++j) {
      double* yn = y.data() + ((static_cast<std::size_t>(c) * nn + j) * d) * m;
      for (int i = 0; i < d; ++i) {
        sys.model->flux(w.node_data(c, j), Vec3::Unit(i), mat, qi);
        for (int comp = 0; comp < m; ++comp) {
          double z = 0.0;
          for (int k = 0; k < sys.num_velocities(); ++k) z += sys.set.v[k][i] * f[k].node_data(c, j)[comp];
          yn[i * m + comp] = z - qi[comp];
        }
      }
    }
  }
  return y;
}

SubcharacteristicReport subcharacteristic_check(const VelocitySet& set, const HyperbolicModel& model,
                                                std::span<const double> sample_speeds) {
  SubcharacteristicReport r;
  r.min_kinetic_speed = set.min_speed();
  r.max_wave_speed = model.max_wave_speed();
  for (double s : sample_speeds) r.max_wave_speed = std::max(r.max_wave_speed, s);
  r.ok = r.min_kinetic_speed > r.max_wave_speed;
  std::ostringstream msg;
  msg << "kinetic speed " << r.min_kinetic_speed << (r.ok ? " exceeds" : " does not exceed") << " wave speed "
      << r.max_wave_speed;
  r.message = msg.str();
  return r;
}

}  // namespace kdg
