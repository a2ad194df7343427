#include "kdg/graph.hpp"

#include <algorithm>
#include <string>

#include "kdg/error.hpp"

namespace kdg {
namespace {

struct Adjacency {
  std::vector<int> offset;
  std::vector<int> target;
};

Adjacency build_adjacency(std::span<const Edge> edges, int n, bool reverse) {
  Adjacency adj;
  adj.offset.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const Edge& e : edges) ++adj.offset[(reverse ? e.to : e.from) + 1];
  for (int i = 0; i < n; ++i) adj.offset[i + 1] += adj.offset[i];
  adj.target.resize(edges.size());
  std::vector<int> fill(adj.offset.begin(), adj.offset.end() - 1);
  for (const Edge& e : edges) {
    const int src = reverse ? e.to : e.from;
    adj.target[fill[src]++] = reverse ? e.from : e.to;
  }
  for (int i = 0; i < n; ++i) std::sort(adj.target.begin() + adj.offset[i], adj.target.begin() + adj.offset[i + 1]);
  return adj;
}

std::vector<int> find_cycle(const Adjacency& preds, const std::vector<int>& remaining_indegree) {
  // Every unfinished node has an unfinished predecessor; walking back must revisit a node.
  const int n = static_cast<int>(remaining_indegree.size());
  int start = -1;
  for (int i = 0; i < n && start < 0; ++i) {
    if (remaining_indegree[i] > 0) start = i;
  }
  std::vector<int> seen_at(static_cast<std::size_t>(n), -1);
  std::vector<int> walk;
  int v = start;
  while (seen_at[v] < 0) {
    seen_at[v] = static_cast<int>(walk.size());
    walk.push_back(v);
    int next = -1;
    for (int p = preds.offset[v]; p < preds.offset[v + 1]; ++p) {
      if (remaining_indegree[preds.target[p]] > 0) {
        next = preds.target[p];
        break;
      }
    }
    v = next;
  }
  std::vector<int> cycle(walk.begin() + seen_at[v], walk.end());
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

}  // namespace

std::vector<Edge> orient_edges(const Mesh& mesh, const Vec3& v) {
  if (!(v.norm() > 0.0)) throw Error("orient_edges needs a nonzero velocity");
  const double eps = tangential_threshold(v);
  std::vector<Edge> edges;
  for (const Face& f : mesh.faces()) {
    if (f.is_boundary()) continue;
    const double vn = v.dot(f.normal);
    if (vn > eps) edges.push_back({f.left_cell, f.right_cell});
    else if (vn < -eps) edges.push_back({f.right_cell, f.left_cell});
  }
  return edges;
}

VelocityDag topo_levels(std::span<const Edge> edges, int n_cells, int velocity_index) {
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= n_cells || e.to < 0 || e.to >= n_cells) {
      throw Error("edge references a cell outside 0.." + std::to_string(n_cells));
    }
  }
  const Adjacency succ = build_adjacency(edges, n_cells, false);
  std::vector<int> indegree(static_cast<std::size_t>(n_cells), 0);
  for (const Edge& e : edges) ++indegree[e.to];

  VelocityDag dag;
  dag.velocity_index = velocity_index;
  dag.edges.assign(edges.begin(), edges.end());
  dag.level_of.assign(static_cast<std::size_t>(n_cells), -1);

  std::vector<int> frontier;
  for (int c = 0; c < n_cells; ++c) {
    if (indegree[c] == 0) frontier.push_back(c);
  }
  int placed = 0;
  while (!frontier.empty()) {
    const int level = static_cast<int>(dag.levels.size());
    std::vector<int> next;
    for (int c : frontier) {
      dag.level_of[c] = level;
      for (int p = succ.offset[c]; p < succ.offset[c + 1]; ++p) {
        if (--indegree[succ.target[p]] == 0) next.push_back(succ.target[p]);
      }
    }
    placed += static_cast<int>(frontier.size());
    dag.levels.push_back(std::move(frontier));
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  if (placed != n_cells) {
    const Adjacency preds = build_adjacency(edges, n_cells, true);
    auto cycle = find_cycle(preds, indegree);
    std::string msg = "cell graph contains a cycle through cells";
    for (int c : cycle) msg += " " + std::to_string(c);
    throw CycleError(msg, std::move(cycle));
  }
  return dag;
}

SubdomainDag condense_to_subdomain_dag(std::span<const Edge> edges, std::span<const int> subdomain_of,
                                       int n_subdomains) {
  SubdomainDag out;
  out.n_nodes = n_subdomains;
  for (const Edge& e : edges) {
    const int i = subdomain_of[e.from];
    const int j = subdomain_of[e.to];
    if (i != j) out.edges.push_back({i, j});
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const Edge& a, const Edge& b) { return a.from != b.from ? a.from < b.from : a.to < b.to; });
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  try {
    const VelocityDag levels = topo_levels(out.edges, n_subdomains);
    // Longest path in nodes equals the level count for Kahn levels.
    out.depth = static_cast<int>(levels.levels.size());
  } catch (const CycleError&) {
    out.cyclic = true;
    out.depth = 0;
  }
  return out;
}

void write_dot(const VelocityDag& dag, std::ostream& out) {
  out << "digraph velocity_" << dag.velocity_index << " {\n  rankdir=LR;\n";
  for (std::size_t l = 0; l < dag.levels.size(); ++l) {
    out << "  { rank=same;";
    for (int c : dag.levels[l]) out << ' ' << c << ';';
    out << " }\n";
  }
  for (const Edge& e : dag.edges) out << "  " << e.from << " -> " << e.to << ";\n";
  out << "}\n";
}

}  // namespace kdg
