#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kdg/models.hpp"

namespace kdg {

/// Flat "key = value" configuration; '#' starts a comment.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_key_values(std::istream& in);
ConfigMap load_key_values(const std::string& path);

struct ProbePoint {
  std::string name;
  Vec3 x = Vec3::Zero();
};

struct RunConfig {
  /// File path (.msh or .mesh) or builtin:cube:N, builtin:refined:N:fine:layers,
  /// builtin:slab:N, builtin:wire:N:fine:layers.
  std::string mesh = "builtin:cube:4";
  double wire_radius = 0.02;
  double wire_length = 0.4;

  std::string model = "maxwell";
  Vec3 advection_velocity = Vec3::UnitX();
  MaterialTable materials;
  std::optional<AntennaCurrent> antenna;

  std::string velocity_set = "D3Q4";
  double lambda = 1.7320508075688772;

  int order = 2;
  double theta = 0.5;
  double omega = 2.0 - 1e-12;
  std::optional<double> beta;
  std::optional<double> dt;
  double t_end = 1.0;
  /// Overrides t_end when set.
  std::optional<long> steps;

  int subdomains = 1;
  /// 0 selects the subdomain DAG depth.
  int iterations = 3;
  double iteration_tolerance = 0.0;
  /// "rcb" or a partition file path.
  std::string partition = "rcb";
  /// "threads" (in-process) or "mpi".
  std::string backend = "threads";
  int threads = 0;

  /// plane-wave, bump, wave (advection), constant, zero.
  std::string solution = "plane-wave";
  double nu = 2.0;
  double bump_eta = 0.25;
  double bump_center = 0.25;
  double constant_value = 1.0;
  /// "exact" or "zero" per boundary tag; `boundary_default` for the rest.
  std::string boundary_default = "exact";
  std::map<int, std::string> boundary;

  std::vector<ProbePoint> probes;
  std::string output_dir;
  /// VTK snapshot every n steps (0: initial and final only, when output_dir is set).
  int vtk_every = 0;
  /// Diagnostics cadence in steps.
  int diagnostics_every = 1;
};

/// Validates and converts a key map. Unknown keys raise ConfigError.
RunConfig build_config(const ConfigMap& keys);
RunConfig load_config(const std::string& path);

/// Canonical dump of every key, parseable by parse_key_values.
std::string dump_config(const RunConfig& config);

}  // namespace kdg
