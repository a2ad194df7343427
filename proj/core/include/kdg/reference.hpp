#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "kdg/quadrature.hpp"

namespace kdg {

using Vec3 = Eigen::Vector3d;

/// Nodal Lagrange element on the reference tetrahedron. P1 nodes are the
/// vertices; P2 adds the edge midpoints of (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
class ReferenceElement {
 public:
  explicit ReferenceElement(int order);

  int order() const noexcept { return order_; }
  int num_nodes() const noexcept { return n_nodes_; }
  const std::vector<Vec3>& nodes() const noexcept { return nodes_; }

  /// Basis values at reference point xi.
  Eigen::VectorXd values(const Vec3& xi) const;
  /// Reference gradients: row j is grad psi_j at xi.
  Eigen::MatrixX3d gradients(const Vec3& xi) const;

  /// Mass matrix on the reference tetrahedron (volume 1/6).
  const Eigen::MatrixXd& mass() const noexcept { return mass_; }
  /// G_e(i, j) = integral of psi_j * d(psi_i)/d(xi_e) on the reference tetrahedron.
  const Eigen::MatrixXd& convection(int e) const { return convection_[static_cast<std::size_t>(e)]; }

  const std::vector<TetPoint>& volume_rule() const noexcept { return tet_rule_degree5(); }
  const std::vector<TriPoint>& face_rule() const noexcept { return tri_rule_degree4(); }

 private:
  int order_;
  int n_nodes_;
  std::vector<Vec3> nodes_;
  Eigen::MatrixXd mass_;
  std::array<Eigen::MatrixXd, 3> convection_;
};

/// Barycentric coordinates (lambda_0..lambda_3) of a reference point.
inline Eigen::Vector4d barycentric(const Vec3& xi) {
  return {1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]};
}

}  // namespace kdg
