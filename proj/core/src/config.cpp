#include "kdg/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "kdg/error.hpp"

namespace kdg {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || !std::isfinite(x)) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long x = to_long(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError("key '" + key + "': integer out of range");
  }
  return static_cast<int>(x);
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
  std::string s = v;
  for (char& ch : s) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream ss(s);
  Vec3 x;
  std::string extra;
  if (!(ss >> x[0] >> x[1] >> x[2]) || (ss >> extra)) {
    throw ConfigError("key '" + key + "': expected three numbers, got '" + v + "'");
  }
  return x;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

ConfigMap parse_key_values(std::istream& in) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in);
}

RunConfig build_config(const ConfigMap& keys) {
  RunConfig c;
  AntennaCurrent antenna;
  bool has_antenna = false;
  std::string materials_path;

  for (const auto& [key, value] : keys) {
    if (key == "mesh") c.mesh = value;
    else if (key == "mesh.wire.radius") c.wire_radius = to_double(key, value);
    else if (key == "mesh.wire.length") c.wire_length = to_double(key, value);
    else if (key == "model") c.model = value;
    else if (key == "model.advection") c.advection_velocity = to_vec3(key, value);
    else if (key == "materials") materials_path = value;
    else if (starts_with(key, "material.")) {
      const int tag = to_int(key, key.substr(9));
      std::istringstream ss(value);
      Material m;
      if (!(ss >> m.eps_r >> m.sigma)) throw ConfigError("key '" + key + "': expected 'eps_r sigma'");
      c.materials.set(tag, m);
    } else if (starts_with(key, "antenna.")) {
      has_antenna = true;
      const std::string field = key.substr(8);
      if (field == "a") antenna.a = to_vec3(key, value);
      else if (field == "b") antenna.b = to_vec3(key, value);
      else if (field == "radius") antenna.radius = to_double(key, value);
      else if (field == "amplitude") antenna.amplitude = to_double(key, value);
      else if (field == "frequency") antenna.frequency = to_double(key, value);
      else if (field == "width") antenna.width = to_double(key, value);
      else if (field == "delay") antenna.delay = to_double(key, value);
      else throw ConfigError("unknown key '" + key + "'");
    } else if (key == "velocity.set") c.velocity_set = value;
    else if (key == "velocity.lambda") c.lambda = to_double(key, value);
    else if (key == "order") c.order = to_int(key, value);
    else if (key == "theta") c.theta = to_double(key, value);
    else if (key == "omega") c.omega = to_double(key, value);
    else if (key == "beta") c.beta = to_double(key, value);
    else if (key == "dt") c.dt = to_double(key, value);
    else if (key == "t_end") c.t_end = to_double(key, value);
    else if (key == "steps") c.steps = to_long(key, value);
    else if (key == "subdomains") c.subdomains = to_int(key, value);
    else if (key == "iterations") c.iterations = value == "auto" ? 0 : to_int(key, value);
    else if (key == "iterations.tolerance") c.iteration_tolerance = to_double(key, value);
    else if (key == "partition") c.partition = value;
    else if (key == "backend") c.backend = value;
    else if (key == "threads") c.threads = to_int(key, value);
    else if (key == "solution") c.solution = value;
    else if (key == "solution.nu") c.nu = to_double(key, value);
    else if (key == "solution.eta") c.bump_eta = to_double(key, value);
    else if (key == "solution.center") c.bump_center = to_double(key, value);
    else if (key == "solution.value") c.constant_value = to_double(key, value);
    else if (key == "boundary.default") c.boundary_default = value;
    else if (starts_with(key, "boundary.")) c.boundary[to_int(key, key.substr(9))] = value;
    else if (starts_with(key, "probe.")) c.probes.push_back({key.substr(6), to_vec3(key, value)});
    else if (key == "output.dir") c.output_dir = value;
    else if (key == "output.vtk_every") c.vtk_every = to_int(key, value);
    else if (key == "output.diagnostics_every") c.diagnostics_every = to_int(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  }

  if (!materials_path.empty()) {
    MaterialTable file = MaterialTable::load(materials_path);
    for (const auto& [tag, m] : c.materials.entries()) file.set(tag, m);
    c.materials = file;
  }
  if (has_antenna) {
    if (!(antenna.radius > 0.0)) throw ConfigError("antenna.radius must be positive");
    if (!((antenna.b - antenna.a).norm() > 0.0)) throw ConfigError("antenna segment has zero length");
    c.antenna = antenna;
  }
  if (c.beta.has_value() == c.dt.has_value()) throw ConfigError("exactly one of 'beta' and 'dt' must be given");
  if (c.beta && !(*c.beta > 0.0)) throw ConfigError("beta must be positive");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.omega >= 1.0 && c.omega <= 2.0)) throw ConfigError("omega must lie in [1, 2]");
  if (c.theta != 1.0 && c.theta != 0.5) throw ConfigError("theta must be 1 or 0.5");
  if (c.order != 1 && c.order != 2) throw ConfigError("order must be 1 or 2");
  if (c.iterations < 0) throw ConfigError("iterations must be >= 1 or 'auto'");
  if (c.subdomains < 1) throw ConfigError("subdomains must be >= 1");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  if (c.steps && *c.steps < 0) throw ConfigError("steps must be non-negative");
  if (c.backend != "threads" && c.backend != "mpi") throw ConfigError("backend must be 'threads' or 'mpi'");
  if (c.diagnostics_every < 1) throw ConfigError("output.diagnostics_every must be >= 1");
  static const std::set<std::string> solutions = {"plane-wave", "bump", "wave", "constant", "zero"};
  if (!solutions.count(c.solution)) throw ConfigError("unknown solution '" + c.solution + "'");
  for (const auto& [tag, kind] : c.boundary) {
    if (kind != "exact" && kind != "zero") throw ConfigError("boundary kind must be 'exact' or 'zero'");
  }
  if (c.boundary_default != "exact" && c.boundary_default != "zero") {
    throw ConfigError("boundary kind must be 'exact' or 'zero'");
  }
  return c;
}

RunConfig load_config(const std::string& path) { return build_config(load_key_values(path)); }

std::string dump_config(const RunConfig& c) {
  std::ostringstream out;
  out << std::setprecision(17);
  auto vec = [](const Vec3& v) {
    std::ostringstream s;
    s << std::setprecision(17) << v[0] << ',' << v[1] << ',' << v[2];
    return s.str();
  };
  out << "mesh = " << c.mesh << '\n';
  out << "mesh.wire.radius = " << c.wire_radius << '\n';
  out << "mesh.wire.length = " << c.wire_length << '\n';
  out << "model = " << c.model << '\n';
  out << "model.advection = " << vec(c.advection_velocity) << '\n';
  for (const auto& [tag, m] : c.materials.entries()) out << "material." << tag << " = " << m.eps_r << ' ' << m.sigma << '\n';
  if (c.antenna) {
    const auto& a = *c.antenna;
    out << "antenna.a = " << vec(a.a) << "\nantenna.b = " << vec(a.b) << "\nantenna.radius = " << a.radius
        << "\nantenna.amplitude = " << a.amplitude << "\nantenna.frequency = " << a.frequency
        << "\nantenna.width = " << a.width << "\nantenna.delay = " << a.delay << '\n';
  }
  out << "velocity.set = " << c.velocity_set << '\n';
  out << "velocity.lambda = " << c.lambda << '\n';
  out << "order = " << c.order << '\n';
  out << "theta = " << c.theta << '\n';
  out << "omega = " << c.omega << '\n';
  if (c.beta) out << "beta = " << *c.beta << '\n';
  if (c.dt) out << "dt = " << *c.dt << '\n';
  out << "t_end = " << c.t_end << '\n';
  if (c.steps) out << "steps = " << *c.steps << '\n';
  out << "subdomains = " << c.subdomains << '\n';
  out << "iterations = " << (c.iterations == 0 ? std::string("auto") : std::to_string(c.iterations)) << '\n';
  out << "iterations.tolerance = " << c.iteration_tolerance << '\n';
  out << "partition = " << c.partition << '\n';
  out << "backend = " << c.backend << '\n';
  out << "threads = " << c.threads << '\n';
  out << "solution = " << c.solution << '\n';
  out << "solution.nu = " << c.nu << '\n';
  out << "solution.eta = " << c.bump_eta << '\n';
  out << "solution.center = " << c.bump_center << '\n';
  out << "solution.value = " << c.constant_value << '\n';
  out << "boundary.default = " << c.boundary_default << '\n';
  for (const auto& [tag, kind] : c.boundary) out << "boundary." << tag << " = " << kind << '\n';
  for (const auto& p : c.probes) out << "probe." << p.name << " = " << vec(p.x) << '\n';
  if (!c.output_dir.empty()) out << "output.dir = " << c.output_dir << '\n';
  out << "output.vtk_every = " << c.vtk_every << '\n';
  out << "output.diagnostics_every = " << c.diagnostics_every << '\n';
  return out.str();
}

}  // namespace kdg
