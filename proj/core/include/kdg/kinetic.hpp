#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kdg/dg.hpp"
#include "kdg/models.hpp"

namespace kdg {

/// d+1 kinetic velocities, embedded in 3D (unused coordinates are zero).
struct VelocitySet {
  std::string name;
  int dim = 3;
  double lambda = 1.0;
  std::vector<Vec3> v;
  /// Inverse of the (d+1)x(d+1) moment matrix with rows (1..1) and (V_k^i).
  Eigen::MatrixXd moment_inverse;

  int size() const noexcept { return static_cast<int>(v.size()); }
  double max_speed() const;
  double min_speed() const;
};

/// Builds a set from explicit vectors. Throws when the moment matrix is singular.
VelocitySet make_velocity_set(std::string name, int dim, std::vector<Vec3> vectors, double lambda = 1.0);

/// D1Q2 {-l, l}; D2Q3 l(cos 2k pi/3, sin 2k pi/3); D3Q4 (+-l, +-l, +-l) with an
/// even number of minus signs.
VelocitySet builtin_velocity_set(const std::string& name, double lambda);

/// Kinetic data for one velocity set over one DG space.
using KineticField = std::vector<NodalField>;

/// Model, velocity set and per-cell materials: everything needed to evaluate
/// equilibria on a mesh.
struct KineticSystem {
  const HyperbolicModel* model = nullptr;
  VelocitySet set;
  std::vector<Material> cell_material;

  int num_components() const { return model->num_components(); }
  int num_velocities() const { return set.size(); }
  /// M_k(W) for all k into out[k*m + i].
  void maxwellian(int cell, const double* w, double* out) const;
};

/// Solves the moment system: sum_k M_k = W, sum_k V_k^i M_k = Q^i(W).
void maxwellian_generic(const VelocitySet& set, const HyperbolicModel& model, const Material& mat, const double* w,
                        double* out);
/// D3Q4: M_k = W/4 + Q(W, V_k)/(4 lambda^2).
void maxwellian_d3q4(const VelocitySet& set, const HyperbolicModel& model, const Material& mat, const double* w,
                     double* out);
/// Closed form for D3Q4, moment solve otherwise.
void maxwellian(const VelocitySet& set, const HyperbolicModel& model, const Material& mat, const double* w,
                double* out);

/// W = sum_k F_k, nodewise.
NodalField macro(const KineticField& f);
void macro_into(const KineticField& f, NodalField& w);

/// F_k <- omega M_k(W) + (1 - omega) F_k. Throws ConfigError unless omega in [1, 2].
void relax(KineticField& f, const NodalField& w, double omega, const KineticSystem& sys);

/// F_k = M_k(W) nodewise.
KineticField equilibrium_init(const NodalField& w, const KineticSystem& sys);

/// Y^i = sum_k V_k^i F_k - Q^i(W(F)) per node, stored as (cell, node, i, component).
std::vector<double> flux_error(const KineticField& f, const KineticSystem& sys);

struct SubcharacteristicReport {
  bool ok = true;
  double min_kinetic_speed = 0.0;
  double max_wave_speed = 0.0;
  std::string message;
};

/// Requires min_k |V_k| > the largest wave speed (strict).
SubcharacteristicReport subcharacteristic_check(const VelocitySet& set, const HyperbolicModel& model,
                                                std::span<const double> sample_speeds = {});

}  // namespace kdg
