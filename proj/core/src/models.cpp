#include "kdg/models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kdg/error.hpp"

namespace kdg {
namespace {

Vec3 vec(const double* p) { return {p[0], p[1], p[2]}; }

void store(const Vec3& v, double* out) {
  out[0] = v[0];
  out[1] = v[1];
  out[2] = v[2];
}

}  // namespace

void MaterialTable::set(int tag, Material m) {
  if (!(m.eps_r >= 1.0)) throw ConfigError("relative permittivity must be >= 1 for tag " + std::to_string(tag));
  if (!(m.sigma >= 0.0)) throw ConfigError("conductivity must be >= 0 for tag " + std::to_string(tag));
  by_tag_[tag] = m;
}

Material MaterialTable::get(int tag) const {
  auto it = by_tag_.find(tag);
  return it == by_tag_.end() ? Material{} : it->second;
}

MaterialTable MaterialTable::parse(std::istream& in) {
  MaterialTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int tag = 0;
    Material m;
    if (!(ss >> tag)) continue;
    if (!(ss >> m.eps_r >> m.sigma)) throw ConfigError("material line " + std::to_string(lineno) + ": expected 'tag eps_r sigma'");
    table.set(tag, m);
  }
  return table;
}

MaterialTable MaterialTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open material table '" + path + "'");
  return parse(in);
}

void maxwell_flux(const double* w, const Vec3& n, double* out) {
  store(-n.cross(vec(w + 3)), out);
  store(n.cross(vec(w)), out + 3);
}

void permittivity_maxwell_flux(const double* w, const Vec3& n, double eps_r, double* out) {
  store(-n.cross(vec(w + 3)), out);
  store(n.cross(vec(w) / eps_r), out + 3);
}

double conductivity_factor(double sigma, double dt) {
  const double h = 0.5 * sigma * dt;
  return (1.0 - h) / (1.0 + h);
}

void conductivity_update(double* w, double sigma, double dt) {
  const double mu = conductivity_factor(sigma, dt);
  for (int i = 0; i < 3; ++i) w[i] *= mu;
}

void current_source_update(double* w, double eps_r, double sigma, const Vec3& j_mid, double dt) {
  const double h = 0.5 * sigma * dt / eps_r;
  const double mu = (1.0 - h) / (1.0 + h);
  const double scale = dt / (eps_r * (1.0 + h));
  for (int i = 0; i < 3; ++i) w[i] = mu * w[i] - scale * j_mid[i];
}

void MaxwellModel::flux(const double* w, const Vec3& n, const Material&, double* out) const { maxwell_flux(w, n, out); }

bool MaxwellModel::has_source(const MaterialTable& materials) const {
  for (const auto& [tag, m] : materials.entries()) {
    if (m.sigma != 0.0) return true;
  }
  return false;
}

void MaxwellModel::apply_source(double* w, const Material& mat, const Vec3&, double, double dt) const {
  if (mat.sigma != 0.0) conductivity_update(w, mat.sigma, dt);
}

Vec3 AntennaCurrent::evaluate(const Vec3& x, double t) const {
  const Vec3 axis = b - a;
  const double len2 = axis.squaredNorm();
  const double s = (x - a).dot(axis) / len2;
  if (s < 0.0 || s > 1.0) return Vec3::Zero();
  if ((x - a - s * axis).norm() > radius) return Vec3::Zero();
  const double tau = t - delay;
  const double profile = amplitude * std::sin(2.0 * std::numbers::pi * frequency * tau) * std::exp(-(tau / width) * (tau / width));
  return profile * axis / std::sqrt(len2);
}

void PermittivityMaxwellModel::flux(const double* w, const Vec3& n, const Material& mat, double* out) const {
  permittivity_maxwell_flux(w, n, mat.eps_r, out);
}

bool PermittivityMaxwellModel::has_source(const MaterialTable& materials) const {
  if (current_) return true;
  for (const auto& [tag, m] : materials.entries()) {
    if (m.sigma != 0.0) return true;
  }
  return false;
}

void PermittivityMaxwellModel::apply_source(double* w, const Material& mat, const Vec3& x, double t, double dt) const {
  const Vec3 j = current_ ? current_->evaluate(x, t + 0.5 * dt) : Vec3::Zero();
  if (mat.sigma == 0.0 && j.isZero(0.0)) return;
  current_source_update(w, mat.eps_r, mat.sigma, j, dt);
}

std::unique_ptr<HyperbolicModel> make_model(const std::string& name, const Vec3& advection_velocity,
                                            std::optional<AntennaCurrent> current) {
  if (name == "maxwell") return std::make_unique<MaxwellModel>();
  if (name == "permittivity-maxwell") return std::make_unique<PermittivityMaxwellModel>(std::move(current));
  if (name == "advection") return std::make_unique<AdvectionModel>(advection_velocity);
  throw ConfigError("unknown model '" + name + "'");
}

void plane_wave_exact(const Vec3& x, double t, double nu, double* out) {
  const double c = std::cos(2.0 * std::numbers::pi * nu * (x[0] - t));
  out[0] = 0.0;
  out[1] = 0.0;
  out[2] = c;
  out[3] = 0.0;
  out[4] = -c;
  out[5] = 0.0;
}

double bump(double s, double eta) {
  const double r = std::abs(s) / eta;
  if (r >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r));
}

void bump_pulse_exact(const Vec3& x, double t, double* out, double eta, double xc) {
  const double p = bump(x[1] - xc - t, eta);
  out[0] = 0.0;
  out[1] = 0.0;
  out[2] = p;
  out[3] = p;
  out[4] = 0.0;
  out[5] = 0.0;
}

}  // namespace kdg
