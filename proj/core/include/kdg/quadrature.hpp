#pragma once

#include <vector>

#include <Eigen/Core>

namespace kdg {

/// Point on the reference tetrahedron (0,0,0),(1,0,0),(0,1,0),(0,0,1).
struct TetPoint {
  Eigen::Vector3d xi;
  double weight;
};

/// Point on the reference triangle (0,0),(1,0),(0,1).
struct TriPoint {
  Eigen::Vector2d xi;
  double weight;
};

/// Symmetric 14-point rule, exact to degree 5. Weights sum to 1/6.
const std::vector<TetPoint>& tet_rule_degree5();

/// Symmetric 6-point rule, exact to degree 4. Weights sum to 1/2.
const std::vector<TriPoint>& tri_rule_degree4();

/// Gauss-Jacobi nodes and weights on [0, 1] for the weight (1-t)^alpha.
void gauss_jacobi(int n, double alpha, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed-coordinate product rule with n points per direction, exact to
/// degree 2n-1.
std::vector<TetPoint> conical_tet_rule(int n);

}  // namespace kdg
