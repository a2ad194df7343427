#include "kdg/mpi_transport.hpp"

#include <algorithm>
#include <cstring>

#include <tbb/parallel_for.h>

#include "kdg/error.hpp"

namespace kdg {
namespace {

constexpr std::size_t kEnvelopeBytes = 12;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

void check(int rc, const char* what) {
  if (rc != MPI_SUCCESS) throw Error(std::string("MPI call failed: ") + what);
}

}  // namespace

MpiSubdomainEngine::MpiSubdomainEngine(const Discretization& disc, Partition partition, IterationOptions options,
                                       MPI_Comm comm)
    : SubdomainEngine(disc, std::move(partition), options), comm_(comm) {
  check(MPI_Comm_rank(comm_, &rank_), "MPI_Comm_rank");
  check(MPI_Comm_size(comm_, &size_), "MPI_Comm_size");
}

void MpiSubdomainEngine::transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new,
                                   const BoundarySpec& bc, double t_prev) {
  const int q = disc.num_velocities();
  std::vector<int> owned;
  for (int s = 0; s < partition_.n_subdomains; ++s) {
    if (owner(s) == rank_) owned.push_back(s);
  }
  residuals_.clear();
  stats_ = {};
  std::vector<int> send_counts(size_), recv_counts(size_), send_displs(size_), recv_displs(size_);

  for (int k = 0; k < q; ++k) {
    const VelocityExchange& ex = plan_.velocities[k];
    TraceBuffer prev;
    fill_traces(disc, k, f_old[k], prev);
    for (int p = 1; p <= iterations_; ++p) {
      tbb::parallel_for(0, static_cast<int>(owned.size()),
                        [&](int i) { sweep_subdomain(disc, k, owned[i], f_old[k], f_new[k], bc, t_prev, prev); });

      std::vector<std::vector<std::byte>> outgoing(size_);
      for (const ExchangeRoute& route : ex.routes) {
        if (owner(route.src) != rank_) continue;
        const auto payload = pack_route(disc, k, route, p, f_new[k]);
        auto& buf = outgoing[owner(route.dst)];
        put_u32(buf, static_cast<std::uint32_t>(route.src));
        put_u32(buf, static_cast<std::uint32_t>(route.dst));
        put_u32(buf, static_cast<std::uint32_t>(payload.size()));
        buf.insert(buf.end(), payload.begin(), payload.end());
        stats_.values_sent += route.faces.size() * plan_.slot_stride();
        ++stats_.messages;
      }
      std::vector<std::byte> send_bytes;
      for (int r = 0; r < size_; ++r) {
        send_displs[r] = static_cast<int>(send_bytes.size());
        send_counts[r] = static_cast<int>(outgoing[r].size());
        send_bytes.insert(send_bytes.end(), outgoing[r].begin(), outgoing[r].end());
      }
      check(MPI_Alltoall(send_counts.data(), 1, MPI_INT, recv_counts.data(), 1, MPI_INT, comm_), "MPI_Alltoall");
      int total = 0;
      for (int r = 0; r < size_; ++r) {
        recv_displs[r] = total;
        total += recv_counts[r];
      }
      std::vector<std::byte> recv_bytes(static_cast<std::size_t>(total));
      check(MPI_Alltoallv(send_bytes.data(), send_counts.data(), send_displs.data(), MPI_BYTE, recv_bytes.data(),
                          recv_counts.data(), recv_displs.data(), MPI_BYTE, comm_),
            "MPI_Alltoallv");

      TraceBuffer next = prev;
      next.iteration = p;
      std::size_t pos = 0;
      while (pos < recv_bytes.size()) {
        if (recv_bytes.size() - pos < kEnvelopeBytes) throw Error("truncated trace envelope");
        const int src = static_cast<int>(get_u32(recv_bytes.data() + pos));
        const int dst = static_cast<int>(get_u32(recv_bytes.data() + pos + 4));
        const std::size_t len = get_u32(recv_bytes.data() + pos + 8);
        pos += kEnvelopeBytes;
        auto it = std::find_if(ex.routes.begin(), ex.routes.end(),
                               [&](const ExchangeRoute& r) { return r.src == src && r.dst == dst; });
        if (it == ex.routes.end() || owner(dst) != rank_) throw Error("trace message for an unknown route");
        stats_.values_received += unpack_route(k, *it, {recv_bytes.data() + pos, len}, p, next);
        pos += len;
      }

      double local = iterate_residual(next.values, prev.values);
      double global = 0.0;
      check(MPI_Allreduce(&local, &global, 1, MPI_DOUBLE, MPI_MAX, comm_), "MPI_Allreduce");
      if (residuals_.size() < static_cast<std::size_t>(p)) residuals_.push_back(0.0);
      residuals_[p - 1] = std::max(residuals_[p - 1], global);
      std::swap(prev, next);
      if (options_.tolerance > 0.0 && global <= options_.tolerance) break;
    }

    // Every rank keeps the full field: owned cells contribute, the rest add zero.
    std::vector<double> mine(f_new[k].values().size(), 0.0);
    const std::size_t bs = f_new[k].block_size();
    for (int s : owned) {
      for (int c : partition_.cells_of[s]) {
        std::copy(f_new[k].cell_data(c), f_new[k].cell_data(c) + bs, mine.begin() + static_cast<std::ptrdiff_t>(c * bs));
      }
    }
    check(MPI_Allreduce(mine.data(), f_new[k].values().data(), static_cast<int>(mine.size()), MPI_DOUBLE, MPI_SUM,
                        comm_),
          "MPI_Allreduce");
  }

  unsigned long long counts[3] = {stats_.values_sent, stats_.values_received, stats_.messages};
  unsigned long long totals[3] = {0, 0, 0};
  check(MPI_Allreduce(counts, totals, 3, MPI_UNSIGNED_LONG_LONG, MPI_SUM, comm_), "MPI_Allreduce");
  stats_ = {totals[0], totals[1], totals[2]};
}

}  // namespace kdg
