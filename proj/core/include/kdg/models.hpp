#pragma once

#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kdg/mesh.hpp"

namespace kdg {

/// Per-region material constants.
struct Material {
  double eps_r = 1.0;
  double sigma = 0.0;
};

/// Materials keyed by cell physical tag; unlisted tags are vacuum.
class MaterialTable {
 public:
  void set(int tag, Material m);
  Material get(int tag) const;
  bool empty() const noexcept { return by_tag_.empty(); }
  const std::map<int, Material>& entries() const noexcept { return by_tag_; }

  /// Lines "tag eps_r sigma"; '#' starts a comment.
  static MaterialTable load(const std::string& path);
  static MaterialTable parse(std::istream& in);

 private:
  std::map<int, Material> by_tag_;
};

/// Exact or prescribed macroscopic state W(X, t), written to `out`.
using StateFunction = std::function<void(const Vec3& x, double t, double* out)>;

/// Linear conservation law with an optional pointwise source.
class HyperbolicModel {
 public:
  virtual ~HyperbolicModel() = default;

  virtual std::string name() const = 0;
  virtual int num_components() const = 0;
  virtual std::vector<std::string> component_names() const = 0;
  /// Q(W, N) for an arbitrary (not necessarily unit) direction N; linear in N.
  virtual void flux(const double* w, const Vec3& n, const Material& mat, double* out) const = 0;
  /// Upper bound on the wave speeds over all admissible states and materials.
  virtual double max_wave_speed() const = 0;

  /// Whether apply_source can change a state for the given materials.
  virtual bool has_source(const MaterialTable& /*materials*/) const { return false; }
  /// One source step of length dt starting at time t, at point x.
  virtual void apply_source(double* /*w*/, const Material& /*mat*/, const Vec3& /*x*/, double /*t*/,
                            double /*dt*/) const {}
};

/// Scalar advection with constant velocity a.
class AdvectionModel final : public HyperbolicModel {
 public:
  explicit AdvectionModel(const Vec3& a) : a_(a) {}
  std::string name() const override { return "advection"; }
  int num_components() const override { return 1; }
  std::vector<std::string> component_names() const override { return {"u"}; }
  void flux(const double* w, const Vec3& n, const Material&, double* out) const override { out[0] = a_.dot(n) * w[0]; }
  double max_wave_speed() const override { return a_.norm(); }
  const Vec3& velocity() const noexcept { return a_; }

 private:
  Vec3 a_;
};

/// Maxwell's equations in vacuum units, W = (E, H), with the conductivity
/// source -sigma E integrated by Crank-Nicolson.
class MaxwellModel final : public HyperbolicModel {
 public:
  std::string name() const override { return "maxwell"; }
  int num_components() const override { return 6; }
  std::vector<std::string> component_names() const override { return {"E1", "E2", "E3", "H1", "H2", "H3"}; }
  void flux(const double* w, const Vec3& n, const Material& mat, double* out) const override;
  double max_wave_speed() const override { return 1.0; }
  bool has_source(const MaterialTable& materials) const override;
  void apply_source(double* w, const Material& mat, const Vec3& x, double t, double dt) const override;
};

/// Current density confined to a cylinder around the segment [a, b], directed
/// along b - a, with a modulated Gaussian time profile
/// amplitude * sin(2 pi f (t - delay)) * exp(-((t - delay)/width)^2).
struct AntennaCurrent {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::UnitZ();
  double radius = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  double width = 1.0;
  double delay = 0.0;

  Vec3 evaluate(const Vec3& x, double t) const;
};

/// Maxwell's equations with piecewise constant permittivity, unknowns
/// (eps_r E, H), conductivity and an optional imposed current.
class PermittivityMaxwellModel final : public HyperbolicModel {
 public:
  explicit PermittivityMaxwellModel(std::optional<AntennaCurrent> current = std::nullopt)
      : current_(std::move(current)) {}
  std::string name() const override { return "permittivity-maxwell"; }
  int num_components() const override { return 6; }
  std::vector<std::string> component_names() const override { return {"D1", "D2", "D3", "H1", "H2", "H3"}; }
  void flux(const double* w, const Vec3& n, const Material& mat, double* out) const override;
  double max_wave_speed() const override { return 1.0; }
  bool has_source(const MaterialTable& materials) const override;
  void apply_source(double* w, const Material& mat, const Vec3& x, double t, double dt) const override;

 private:
  std::optional<AntennaCurrent> current_;
};

std::unique_ptr<HyperbolicModel> make_model(const std::string& name, const Vec3& advection_velocity = Vec3::UnitX(),
                                            std::optional<AntennaCurrent> current = std::nullopt);

/// (-N x H, N x E) for W = (E, H).
void maxwell_flux(const double* w, const Vec3& n, double* out);
/// (-N x H, N x (E~/eps_r)) for W = (E~, H).
void permittivity_maxwell_flux(const double* w, const Vec3& n, double eps_r, double* out);

/// (1 - sigma dt/2) / (1 + sigma dt/2)
double conductivity_factor(double sigma, double dt);
/// E <- mu E, H unchanged.
void conductivity_update(double* w, double sigma, double dt);
/// E~ <- mu~ E~ - dt J_mid / (eps_r (1 + sigma dt/(2 eps_r))), H unchanged.
void current_source_update(double* w, double eps_r, double sigma, const Vec3& j_mid, double dt);

/// (0, 0, c, 0, -c, 0) with c = cos(2 pi nu (x1 - t)).
void plane_wave_exact(const Vec3& x, double t, double nu, double* out);
/// exp(1 - 1/(1 - |s|/eta)) for |s| < eta, else 0.
double bump(double s, double eta);
/// (0, 0, p, p, 0, 0) with p = bump(x2 - xc - t).
void bump_pulse_exact(const Vec3& x, double t, double* out, double eta = 0.25, double xc = 0.25);

}  // namespace kdg
