#include "kdg/subdomain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <tbb/parallel_for.h>

#include "kdg/error.hpp"

namespace kdg {
namespace {

void bisect(const Mesh& mesh, std::vector<int>& cells, std::size_t lo, std::size_t hi, int parts, int first,
            std::vector<int>& out) {
  if (parts == 1) {
    for (std::size_t i = lo; i < hi; ++i) out[cells[i]] = first;
    return;
  }
  Vec3 bmin = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 bmax = -bmin;
  for (std::size_t i = lo; i < hi; ++i) {
    bmin = bmin.cwiseMin(mesh.cell(cells[i]).centroid);
    bmax = bmax.cwiseMax(mesh.cell(cells[i]).centroid);
  }
  const Vec3 extent = bmax - bmin;
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (extent[a] > extent[axis]) axis = a;
  }
  std::sort(cells.begin() + static_cast<std::ptrdiff_t>(lo), cells.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](int x, int y) {
              const double cx = mesh.cell(x).centroid[axis];
              const double cy = mesh.cell(y).centroid[axis];
              return cx != cy ? cx < cy : x < y;
            });
  const int n_lo = parts / 2;
  const auto n = static_cast<double>(hi - lo);
  const auto count = static_cast<std::size_t>(std::llround(n * n_lo / parts));
  bisect(mesh, cells, lo, lo + count, n_lo, first, out);
  bisect(mesh, cells, lo + count, hi, parts - n_lo, first + n_lo, out);
}

}  // namespace

Partition make_partition(const Mesh& mesh, std::vector<int> subdomain_of, int n_subdomains) {
  if (static_cast<int>(subdomain_of.size()) != mesh.num_cells()) {
    throw ConfigError("partition has " + std::to_string(subdomain_of.size()) + " entries for " +
                      std::to_string(mesh.num_cells()) + " cells");
  }
  if (n_subdomains < 1) throw ConfigError("partition needs at least one subdomain");
  Partition p;
  p.n_subdomains = n_subdomains;
  p.cells_of.resize(n_subdomains);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int s = subdomain_of[c];
    if (s < 0 || s >= n_subdomains) {
      throw ConfigError("cell " + std::to_string(c) + " assigned to subdomain " + std::to_string(s) + " outside 0.." +
                        std::to_string(n_subdomains - 1));
    }
    p.cells_of[s].push_back(c);
  }
  p.subdomain_of = std::move(subdomain_of);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (face.is_boundary()) continue;
    const int i = p.subdomain_of[face.left_cell];
    const int j = p.subdomain_of[face.right_cell];
    if (i != j) p.interface_faces.push_back({f, i, j});
  }
  p.diameter.assign(n_subdomains, 0.0);
  for (int s = 0; s < n_subdomains; ++s) {
    if (p.cells_of[s].empty()) continue;
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (int c : p.cells_of[s]) {
      for (int v : mesh.cell(c).vertex_ids) {
        lo = lo.cwiseMin(mesh.vertex(v).coords);
        hi = hi.cwiseMax(mesh.vertex(v).coords);
      }
    }
    p.diameter[s] = (hi - lo).norm();
  }
  return p;
}

Partition partition_rcb(const Mesh& mesh, int n_subdomains) {
  if (n_subdomains < 1) throw ConfigError("number of subdomains must be at least 1");
  if (n_subdomains > mesh.num_cells()) {
    throw ConfigError("cannot split " + std::to_string(mesh.num_cells()) + " cells into " +
                      std::to_string(n_subdomains) + " subdomains");
  }
  std::vector<int> cells(static_cast<std::size_t>(mesh.num_cells()));
  std::iota(cells.begin(), cells.end(), 0);
  std::vector<int> out(cells.size(), 0);
  bisect(mesh, cells, 0, cells.size(), n_subdomains, 0, out);
  return make_partition(mesh, std::move(out), n_subdomains);
}

Partition load_partition(std::istream& in, const Mesh& mesh, int n_subdomains) {
  std::vector<int> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    int id = 0;
    if (!(ss >> id)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("partition line " + std::to_string(lineno) + " is not an integer");
    }
    ids.push_back(id);
  }
  int n = n_subdomains;
  if (n <= 0) n = ids.empty() ? 1 : *std::max_element(ids.begin(), ids.end()) + 1;
  return make_partition(mesh, std::move(ids), n);
}

Partition load_partition(const std::string& path, const Mesh& mesh, int n_subdomains) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open partition file '" + path + "'");
  return load_partition(in, mesh, n_subdomains);
}

void save_partition(const Partition& partition, std::ostream& out) {
  for (int s : partition.subdomain_of) out << s << '\n';
}

ExchangePlan ExchangePlan::build(const Discretization& disc, const Partition& partition) {
  const Mesh& mesh = disc.mesh();
  ExchangePlan plan;
  plan.face_points = disc.space().num_face_points();
  plan.components = disc.num_components();
  const auto& part = partition.subdomain_of;
  for (int k = 0; k < disc.num_velocities(); ++k) {
    const VelocityDag& dag = disc.dag(k);
    VelocityExchange ex;
    ex.face_slot.assign(static_cast<std::size_t>(mesh.num_faces()), -1);

    // Crossing edges are identified through the downwind cell's inflow faces.
    std::map<std::pair<int, int>, std::vector<int>> routes;
    std::vector<std::pair<int, std::pair<int, int>>> crossing;  // face, (upwind cell, local)
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const LocalOperator& op = disc.op(k, c);
      for (int a = 0; a < op.n_inflow; ++a) {
        const InflowFace& in = op.inflow[a];
        if (in.neighbor == kNoCell || part[in.neighbor] == part[c]) continue;
        crossing.push_back({in.face, {in.neighbor, in.neighbor_local}});
        routes[{part[in.neighbor], part[c]}].push_back(in.face);
      }
    }
    std::sort(crossing.begin(), crossing.end());
    for (const auto& [face, up] : crossing) {
      ex.face_slot[face] = static_cast<int>(ex.slot_face.size());
      ex.slot_face.push_back(face);
      ex.slot_upwind_cell.push_back(up.first);
      ex.slot_upwind_local.push_back(up.second);
    }
    for (auto& [key, faces] : routes) {
      std::sort(faces.begin(), faces.end());
      ex.routes.push_back({key.first, key.second, std::move(faces)});
    }

    ex.local_levels.resize(partition.n_subdomains);
    for (int s = 0; s < partition.n_subdomains; ++s) {
      const auto& cells = partition.cells_of[s];
      std::vector<int> local_id(static_cast<std::size_t>(mesh.num_cells()), -1);
      for (std::size_t i = 0; i < cells.size(); ++i) local_id[cells[i]] = static_cast<int>(i);
      std::vector<Edge> local_edges;
      for (const Edge& e : dag.edges) {
        if (part[e.from] == s && part[e.to] == s) local_edges.push_back({local_id[e.from], local_id[e.to]});
      }
      VelocityDag local = topo_levels(local_edges, static_cast<int>(cells.size()), k);
      for (auto& level : local.levels) {
        for (int& c : level) c = cells[c];
      }
      ex.local_levels[s] = std::move(local.levels);
    }
    ex.dag = condense_to_subdomain_dag(dag.edges, part, partition.n_subdomains);
    plan.velocities.push_back(std::move(ex));
  }
  return plan;
}

int ExchangePlan::max_depth() const {
  int depth = 0;
  for (const auto& v : velocities) {
    if (v.dag.cyclic) return -1;
    depth = std::max(depth, v.dag.depth);
  }
  return depth;
}

double iterate_residual(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("iterate_residual on buffers of different sizes");
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

CflReport check_subdomain_cfl(const Partition& partition, double dt, const VelocitySet& set) {
  CflReport r;
  r.travel = dt * set.max_speed();
  r.min_diameter = std::numeric_limits<double>::infinity();
  for (double d : partition.diameter) r.min_diameter = std::min(r.min_diameter, d);
  r.ok = r.travel <= r.min_diameter;
  std::ostringstream msg;
  msg << "dt*|V| = " << r.travel << (r.ok ? " within" : " exceeds") << " smallest subdomain diameter "
      << r.min_diameter;
  r.message = msg.str();
  return r;
}

SubdomainEngine::SubdomainEngine(const Discretization& disc, Partition partition, IterationOptions options)
    : partition_(std::move(partition)), plan_(ExchangePlan::build(disc, partition_)), options_(options) {
  if (options_.iterations < 0) throw ConfigError("iteration count must be positive");
  if (options_.iterations > 0) {
    iterations_ = options_.iterations;
  } else {
    const int depth = plan_.max_depth();
    // Cyclic subdomain graphs have no finite bound; iterate to the residual tolerance instead.
    if (depth < 0) {
      iterations_ = std::max(3, partition_.n_subdomains);
      if (options_.tolerance <= 0.0) options_.tolerance = 1e-12;
    } else {
      iterations_ = std::max(1, depth);
    }
  }
}

void SubdomainEngine::fill_traces(const Discretization& disc, int k, const NodalField& f, TraceBuffer& buffer) const {
  const VelocityExchange& ex = plan_.velocities[k];
  const std::size_t stride = plan_.slot_stride();
  const int nq = plan_.face_points;
  const int m = plan_.components;
  buffer.values.assign(ex.slot_face.size() * stride, 0.0);
  TraceBlock t(nq, m);
  for (std::size_t s = 0; s < ex.slot_face.size(); ++s) {
    const int c = ex.slot_upwind_cell[s];
    disc.space().trace(c, ex.slot_upwind_local[s], f.cell_data(c), m, t);
    std::copy(t.data(), t.data() + stride, buffer.slot(s, stride));
  }
}

void SubdomainEngine::sweep_subdomain(const Discretization& disc, int k, int sub, const NodalField& f_old,
                                      NodalField& f_new, const BoundarySpec& bc, double t_prev,
                                      const TraceBuffer& frozen) const {
  const VelocityExchange& ex = plan_.velocities[k];
  const std::size_t stride = plan_.slot_stride();
  SweepRegion region;
  region.region_of = partition_.subdomain_of;
  region.region = sub;
  region.frozen = [&](int face) { return frozen.slot(static_cast<std::size_t>(ex.face_slot[face]), stride); };
  sweep_levels(disc, k, ex.local_levels[sub], f_old, f_new, bc, t_prev, &region);
}

std::vector<std::byte> SubdomainEngine::pack_route(const Discretization& disc, int k, const ExchangeRoute& route,
                                                   int iteration, const NodalField& f) const {
  const VelocityExchange& ex = plan_.velocities[k];
  const int nq = plan_.face_points;
  const int m = plan_.components;
  TracePayload payload;
  payload.iteration = static_cast<std::uint32_t>(iteration);
  payload.velocity = static_cast<std::uint32_t>(k);
  payload.face_count = static_cast<std::uint32_t>(route.faces.size());
  payload.values.reserve(route.faces.size() * plan_.slot_stride());
  TraceBlock t(nq, m);
  for (int face : route.faces) {
    const auto s = static_cast<std::size_t>(ex.face_slot[face]);
    const int c = ex.slot_upwind_cell[s];
    disc.space().trace(c, ex.slot_upwind_local[s], f.cell_data(c), m, t);
    payload.values.insert(payload.values.end(), t.data(), t.data() + plan_.slot_stride());
  }
  return encode_payload(payload);
}

std::size_t SubdomainEngine::unpack_route(int k, const ExchangeRoute& route, std::span<const std::byte> bytes,
                                          int iteration, TraceBuffer& buffer) const {
  const VelocityExchange& ex = plan_.velocities[k];
  const std::size_t stride = plan_.slot_stride();
  const TracePayload payload = decode_payload(bytes, stride);
  if (payload.velocity != static_cast<std::uint32_t>(k) || payload.iteration != static_cast<std::uint32_t>(iteration) ||
      payload.face_count != route.faces.size()) {
    throw Error("trace payload does not match the exchange plan");
  }
  for (std::size_t i = 0; i < route.faces.size(); ++i) {
    const auto s = static_cast<std::size_t>(ex.face_slot[route.faces[i]]);
    std::copy(payload.values.begin() + static_cast<std::ptrdiff_t>(i * stride),
              payload.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * stride), buffer.slot(s, stride));
  }
  return payload.values.size();
}

void SubdomainEngine::transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new,
                                const BoundarySpec& bc, double t_prev) {
  const int q = disc.num_velocities();
  std::vector<std::vector<double>> residuals(q);
  std::vector<ExchangeStats> stats(q);
  tbb::parallel_for(0, q, [&](int k) {
    const VelocityExchange& ex = plan_.velocities[k];
    TraceBuffer prev;
    fill_traces(disc, k, f_old[k], prev);
    TraceBuffer next;
    next.values.resize(prev.values.size());
    for (int p = 1; p <= iterations_; ++p) {
      tbb::parallel_for(0, partition_.n_subdomains,
                        [&](int s) { sweep_subdomain(disc, k, s, f_old[k], f_new[k], bc, t_prev, prev); });
      next.iteration = p;
      for (const ExchangeRoute& route : ex.routes) {
        const auto bytes = pack_route(disc, k, route, p, f_new[k]);
        const std::size_t n = unpack_route(k, route, bytes, p, next);
        stats[k].values_sent += n;
        stats[k].values_received += n;
        ++stats[k].messages;
      }
      residuals[k].push_back(iterate_residual(next.values, prev.values));
      std::swap(prev, next);
      if (options_.tolerance > 0.0 && residuals[k].back() <= options_.tolerance) break;
    }
  });
  residuals_.clear();
  stats_ = {};
  for (int k = 0; k < q; ++k) {
    for (std::size_t p = 0; p < residuals[k].size(); ++p) {
      if (residuals_.size() <= p) residuals_.push_back(0.0);
      residuals_[p] = std::max(residuals_[p], residuals[k][p]);
    }
    stats_.values_sent += stats[k].values_sent;
    stats_.values_received += stats[k].values_received;
    stats_.messages += stats[k].messages;
  }
}

}  // namespace kdg
