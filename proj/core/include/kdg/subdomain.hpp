#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kdg/graph.hpp"
#include "kdg/transport.hpp"

namespace kdg {

/// Interior face whose incident cells lie in different subdomains.
struct InterfaceFace {
  int face = 0;
  /// Subdomain of the left cell.
  int i = 0;
  /// Subdomain of the right cell.
  int j = 0;
};

struct Partition {
  int n_subdomains = 1;
  std::vector<int> subdomain_of;
  /// Ascending by face id.
  std::vector<InterfaceFace> interface_faces;
  /// Vertex bounding-box diagonal of each subdomain.
  std::vector<double> diameter;
  /// Cells of each subdomain, ascending.
  std::vector<std::vector<int>> cells_of;
};

/// Derives interfaces, diameters and cell lists from an assignment. Throws
/// ConfigError on a wrong count or an id outside 0..n_subdomains-1.
Partition make_partition(const Mesh& mesh, std::vector<int> subdomain_of, int n_subdomains);

/// Recursive coordinate bisection of cell centroids. Each split cuts the
/// longest centroid bounding-box axis, sending round(N * floor(n/2) / n) cells
/// (ordered by coordinate, then id) to the lower half.
Partition partition_rcb(const Mesh& mesh, int n_subdomains);

/// One subdomain id per line. When n_subdomains <= 0 it is inferred as max id + 1.
Partition load_partition(std::istream& in, const Mesh& mesh, int n_subdomains = 0);
Partition load_partition(const std::string& path, const Mesh& mesh, int n_subdomains = 0);
void save_partition(const Partition& partition, std::ostream& out);

/// Faces carrying velocity k from subdomain src into subdomain dst.
struct ExchangeRoute {
  int src = 0;
  int dst = 0;
  /// Ascending face ids.
  std::vector<int> faces;
};

/// Interface bookkeeping of one velocity.
struct VelocityExchange {
  /// Trace slot of every face, -1 for faces not crossed between subdomains.
  std::vector<int> face_slot;
  /// Face of each slot, ascending.
  std::vector<int> slot_face;
  std::vector<int> slot_upwind_cell;
  std::vector<int> slot_upwind_local;
  /// Ordered by (src, dst).
  std::vector<ExchangeRoute> routes;
  /// Topological levels of each subdomain's induced cell graph.
  std::vector<std::vector<std::vector<int>>> local_levels;
  SubdomainDag dag;
};

/// Per-velocity exchange contract shared by all backends.
struct ExchangePlan {
  int face_points = 0;
  int components = 0;
  std::vector<VelocityExchange> velocities;

  static ExchangePlan build(const Discretization& disc, const Partition& partition);
  std::size_t slot_stride() const noexcept { return static_cast<std::size_t>(face_points) * components; }
  /// Largest subdomain DAG depth over velocities, or -1 if any is cyclic.
  int max_depth() const;
};

/// Trace message body: little-endian u32 iteration, u32 velocity, u32 face
/// count, then f64 values ordered by (face, quadrature point, component).
struct TracePayload {
  std::uint32_t iteration = 0;
  std::uint32_t velocity = 0;
  std::uint32_t face_count = 0;
  std::vector<double> values;
};

std::vector<std::byte> encode_payload(const TracePayload& payload);
/// Throws Error when the byte count disagrees with the header.
TracePayload decode_payload(std::span<const std::byte> bytes, std::size_t values_per_face);

/// Interface trace values of one velocity at one iteration.
struct TraceBuffer {
  int iteration = 0;
  std::vector<double> values;

  double* slot(std::size_t s, std::size_t stride) noexcept { return values.data() + s * stride; }
  const double* slot(std::size_t s, std::size_t stride) const noexcept { return values.data() + s * stride; }
};

/// max |a - b|, 0 for empty inputs.
double iterate_residual(std::span<const double> a, std::span<const double> b);

struct CflReport {
  bool ok = true;
  double travel = 0.0;
  double min_diameter = 0.0;
  std::string message;
};

/// Warns when dt * max_k |V_k| exceeds the smallest subdomain diameter.
CflReport check_subdomain_cfl(const Partition& partition, double dt, const VelocitySet& set);

struct IterationOptions {
  /// Iterations per step; 0 selects the largest subdomain DAG depth.
  int iterations = 3;
  /// Stop early once the interface residual is at or below this value (0 disables).
  double tolerance = 0.0;
};

/// Counters of the last transport call, summed over velocities and iterations.
struct ExchangeStats {
  std::size_t values_sent = 0;
  std::size_t values_received = 0;
  std::size_t messages = 0;
};

/// Block iteration over subdomains in one process. Every iteration sweeps all
/// subdomains with the previous iterate's interface traces, then exchanges the
/// new traces as encoded payloads. Iterate 0 is the previous time level.
class SubdomainEngine : public TransportEngine {
 public:
  SubdomainEngine(const Discretization& disc, Partition partition, IterationOptions options = {});

  void transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new, const BoundarySpec& bc,
                 double t_prev) override;
  std::vector<double> last_residuals() const override { return residuals_; }

  const Partition& partition() const noexcept { return partition_; }
  const ExchangePlan& plan() const noexcept { return plan_; }
  const ExchangeStats& stats() const noexcept { return stats_; }
  int iterations() const noexcept { return iterations_; }

 protected:
  /// Traces of f on the upwind side of every slot of velocity k.
  void fill_traces(const Discretization& disc, int k, const NodalField& f, TraceBuffer& buffer) const;
  void sweep_subdomain(const Discretization& disc, int k, int sub, const NodalField& f_old, NodalField& f_new,
                       const BoundarySpec& bc, double t_prev, const TraceBuffer& frozen) const;
  /// Encoded traces of route r of velocity k, taken from f.
  std::vector<std::byte> pack_route(const Discretization& disc, int k, const ExchangeRoute& route, int iteration,
                                    const NodalField& f) const;
  /// Decodes a payload of route r into the buffer slots; returns the value count.
  std::size_t unpack_route(int k, const ExchangeRoute& route, std::span<const std::byte> bytes, int iteration,
                           TraceBuffer& buffer) const;

  Partition partition_;
  ExchangePlan plan_;
  IterationOptions options_;
  int iterations_ = 3;
  std::vector<double> residuals_;
  ExchangeStats stats_;
};

}  // namespace kdg
