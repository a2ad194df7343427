#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "kdg/mesh.hpp"
#include "kdg/reference.hpp"

namespace kdg {

inline constexpr int kMaxNodes = 10;
inline constexpr int kMaxComponents = 8;
inline constexpr int kMaxFacePoints = 6;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// n_n x m coefficients of one cell, stack-allocated.
using CellBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxNodes, kMaxComponents>;
/// n_q x m values at the quadrature points of one face.
using TraceBlock =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxFacePoints, kMaxComponents>;
using BlockMap = Eigen::Map<RowMatrix>;
using ConstBlockMap = Eigen::Map<const RowMatrix>;
using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxNodes, kMaxNodes>;

/// Per-cell nodal coefficients of m scalar unknowns, stored cell-major then
/// node-major then component.
class NodalField {
 public:
  NodalField() = default;
  NodalField(int n_cells, int n_nodes, int n_components)
      : n_cells_(n_cells), n_nodes_(n_nodes), n_components_(n_components),
        values_(static_cast<std::size_t>(n_cells) * n_nodes * n_components, 0.0) {}

  int num_cells() const noexcept { return n_cells_; }
  int num_nodes() const noexcept { return n_nodes_; }
  int num_components() const noexcept { return n_components_; }
  std::size_t block_size() const noexcept { return static_cast<std::size_t>(n_nodes_) * n_components_; }

  double* cell_data(int c) noexcept { return values_.data() + c * block_size(); }
  const double* cell_data(int c) const noexcept { return values_.data() + c * block_size(); }
  double* node_data(int c, int j) noexcept { return cell_data(c) + j * n_components_; }
  const double* node_data(int c, int j) const noexcept { return cell_data(c) + j * n_components_; }

  BlockMap block(int c) noexcept { return {cell_data(c), n_nodes_, n_components_}; }
  ConstBlockMap block(int c) const noexcept { return {cell_data(c), n_nodes_, n_components_}; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  int n_cells_ = 0;
  int n_nodes_ = 0;
  int n_components_ = 0;
  std::vector<double> values_;
};

/// Geometry and basis data of the DG discretization on a fixed mesh. Face
/// quadrature points are defined once per global face in physical space and
/// evaluated in each incident cell's basis, so neighbors agree on the points
/// without sharing a node numbering.
class DgSpace {
 public:
  DgSpace(const Mesh& mesh, int order);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const ReferenceElement& reference() const noexcept { return ref_; }
  int num_nodes() const noexcept { return ref_.num_nodes(); }
  int num_face_points() const noexcept { return static_cast<int>(ref_.face_rule().size()); }

  const Eigen::Matrix3d& jacobian(int c) const { return jac_[static_cast<std::size_t>(c)]; }
  const Eigen::Matrix3d& jacobian_inverse(int c) const { return jinv_[static_cast<std::size_t>(c)]; }
  /// 6 x volume of cell c.
  double jacobian_det(int c) const { return det_[static_cast<std::size_t>(c)]; }

  const Vec3& node_position(int c, int j) const {
    return node_pos_[static_cast<std::size_t>(c) * num_nodes() + j];
  }
  std::span<const Vec3> face_points(int f) const {
    return {face_pts_.data() + static_cast<std::size_t>(f) * num_face_points(), static_cast<std::size_t>(num_face_points())};
  }
  /// Physical quadrature weights of face f (sum to its area).
  std::span<const double> face_weights(int f) const {
    return {face_w_.data() + static_cast<std::size_t>(f) * num_face_points(), static_cast<std::size_t>(num_face_points())};
  }
  /// n_q x n_n basis values of cell c at the points of its local face.
  const Eigen::MatrixXd& trace_matrix(int c, int local) const { return trace_[4 * static_cast<std::size_t>(c) + local]; }
  /// n_n x n_q product trace_matrix^T * diag(weights).
  const Eigen::MatrixXd& weighted_trace(int c, int local) const {
    return wtrace_[4 * static_cast<std::size_t>(c) + local];
  }
  /// Local index of face f inside its right (side 1) or left (side 0) cell.
  int local_index(int f, int side) const { return face_local_[2 * static_cast<std::size_t>(f) + side]; }

  Vec3 to_reference(int c, const Vec3& x) const { return jinv_[static_cast<std::size_t>(c)] * (x - origin(c)); }
  Vec3 to_physical(int c, const Vec3& xi) const { return origin(c) + jac_[static_cast<std::size_t>(c)] * xi; }
  const Vec3& origin(int c) const { return mesh_->vertex(mesh_->cell(c).vertex_ids[0]).coords; }

  /// Cell containing x (lowest id on ties), or kNoCell.
  int locate(const Vec3& x) const;
  /// Values of an m-component field at physical point x of cell c.
  Eigen::VectorXd evaluate(const NodalField& field, int c, const Vec3& x) const;

  /// Values at face points of local face `local` of cell c.
  void trace(int c, int local, const double* cell_block, int m, TraceBlock& out) const;

 private:
  const Mesh* mesh_;
  ReferenceElement ref_;
  std::vector<Eigen::Matrix3d> jac_;
  std::vector<Eigen::Matrix3d> jinv_;
  std::vector<double> det_;
  std::vector<Vec3> node_pos_;
  std::vector<Vec3> face_pts_;
  std::vector<double> face_w_;
  std::vector<Eigen::MatrixXd> trace_;
  std::vector<Eigen::MatrixXd> wtrace_;
  std::vector<int> face_local_;
};

/// Face through which a velocity enters a cell.
struct InflowFace {
  int local = 0;
  int face = 0;
  /// V·N_out, strictly negative.
  double vn = 0.0;
  /// Upwind cell, or kNoCell on the boundary.
  int neighbor = kNoCell;
  int neighbor_local = -1;
};

/// Dense matrices of the theta-scheme on one cell for one velocity.
struct LocalMatrices {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd convection;
  Eigen::MatrixXd outflow;
  /// mass/dt - theta*convection + theta*outflow
  Eigen::MatrixXd system;
  std::vector<InflowFace> inflow;
};

LocalMatrices assemble_local(const DgSpace& space, int cell, const Vec3& v, double dt, double theta);

/// Factorized system plus the scalars of the explicit part. With
/// A = M/dt - theta*K + theta*B_out the update reads
/// f_new = A^{-1}[M f_old/(theta dt) + b_in] - (1-theta)/theta f_old.
struct LocalOperator {
  Eigen::PartialPivLU<LocalMatrix> lu;
  /// det(J) / (theta dt), applied to the reference mass matrix.
  double mass_scale = 0.0;
  /// (1 - theta) / theta
  double carry = 0.0;
  std::array<InflowFace, 4> inflow{};
  int n_inflow = 0;
};

LocalOperator factorize(const DgSpace& space, int cell, const LocalMatrices& local, double dt, double theta);

/// Solves one cell. `inflow_values[a]` holds the theta-blended upwind values
/// at the points of face op.inflow[a], n_q x m.
void solve_cell(const LocalOperator& op, const DgSpace& space, int cell, const double* f_prev, int m,
                std::span<const TraceBlock> inflow_values, double* f_out);

/// Right-hand side contribution -vn * T^T diag(w) g of one inflow face.
void add_inflow(const DgSpace& space, int cell, const InflowFace& in, const TraceBlock& g, CellBlock& rhs);

}  // namespace kdg
