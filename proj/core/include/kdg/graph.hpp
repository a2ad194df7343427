#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "kdg/mesh.hpp"

namespace kdg {

struct Edge {
  int from = 0;
  int to = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Faces with |V·N| at or below this value carry no upwind coupling.
inline double tangential_threshold(const Vec3& v) { return 1e-12 * v.norm(); }

/// One edge per interior face crossed by V, oriented downwind. Edges are
/// listed in face order.
std::vector<Edge> orient_edges(const Mesh& mesh, const Vec3& v);

/// Per-velocity cell DAG with breadth-first topological levels.
struct VelocityDag {
  int velocity_index = 0;
  std::vector<Edge> edges;
  /// Cells of each level, ascending within a level.
  std::vector<std::vector<int>> levels;
  std::vector<int> level_of;
};

/// Kahn level assignment: a cell sits one level above its highest upwind
/// neighbor. Throws CycleError carrying one cycle when the graph is cyclic.
VelocityDag topo_levels(std::span<const Edge> edges, int n_cells, int velocity_index = 0);

/// Quotient of a cell DAG by a partition.
struct SubdomainDag {
  int n_nodes = 0;
  /// Distinct (i, j) pairs, i != j, sorted.
  std::vector<Edge> edges;
  bool cyclic = false;
  /// Node count of the longest path; 0 when cyclic.
  int depth = 0;
};

SubdomainDag condense_to_subdomain_dag(std::span<const Edge> edges, std::span<const int> subdomain_of,
                                       int n_subdomains);

/// Graphviz dump, one cluster per level.
void write_dot(const VelocityDag& dag, std::ostream& out);

}  // namespace kdg
