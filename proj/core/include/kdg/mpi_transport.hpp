#pragma once

#include <mpi.h>

#include "kdg/subdomain.hpp"

namespace kdg {

/// Subdomain iteration across MPI ranks. Subdomain i is swept by rank
/// i % size; trace payloads travel through MPI_Alltoallv wrapped in a
/// (src, dst, byte count) envelope, and the new kinetic field is gathered on
/// every rank after the last iteration. Results match SubdomainEngine bitwise.
class MpiSubdomainEngine final : public SubdomainEngine {
 public:
  MpiSubdomainEngine(const Discretization& disc, Partition partition, IterationOptions options = {},
                     MPI_Comm comm = MPI_COMM_WORLD);

  void transport(const Discretization& disc, const KineticField& f_old, KineticField& f_new, const BoundarySpec& bc,
                 double t_prev) override;

  int rank() const noexcept { return rank_; }
  int size() const noexcept { return size_; }
  int owner(int subdomain) const noexcept { return subdomain % size_; }

 private:
  MPI_Comm comm_;
  int rank_ = 0;
  int size_ = 1;
};

}  // namespace kdg
