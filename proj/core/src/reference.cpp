#include "kdg/reference.hpp"

#include "kdg/error.hpp"

namespace kdg {
namespace {

constexpr int kEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// Reference gradients of the barycentric coordinates.
const Eigen::Matrix<double, 4, 3>& barycentric_gradients() {
  static const Eigen::Matrix<double, 4, 3> g = [] {
    Eigen::Matrix<double, 4, 3> m;
    m << -1, -1, -1, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    return m;
  }();
  return g;
}

}  // namespace

ReferenceElement::ReferenceElement(int order) : order_(order) {
  if (order != 1 && order != 2) throw Error("unsupported element order " + std::to_string(order));
  n_nodes_ = order == 1 ? 4 : 10;
  const Vec3 verts[4] = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  nodes_.assign(verts, verts + 4);
  if (order == 2) {
    for (const auto& e : kEdges) nodes_.push_back(0.5 * (verts[e[0]] + verts[e[1]]));
  }

  mass_ = Eigen::MatrixXd::Zero(n_nodes_, n_nodes_);
  for (auto& g : convection_) g = Eigen::MatrixXd::Zero(n_nodes_, n_nodes_);
  for (const auto& q : volume_rule()) {
    const Eigen::VectorXd psi = values(q.xi);
    const Eigen::MatrixX3d grad = gradients(q.xi);
    mass_ += q.weight * psi * psi.transpose();
    for (int e = 0; e < 3; ++e) convection_[e] += q.weight * grad.col(e) * psi.transpose();
  }
}

Eigen::VectorXd ReferenceElement::values(const Vec3& xi) const {
  const Eigen::Vector4d l = barycentric(xi);
  Eigen::VectorXd v(n_nodes_);
  if (order_ == 1) {
    v = l;
    return v;
  }
  for (int a = 0; a < 4; ++a) v[a] = l[a] * (2.0 * l[a] - 1.0);
  for (int e = 0; e < 6; ++e) v[4 + e] = 4.0 * l[kEdges[e][0]] * l[kEdges[e][1]];
  return v;
}

Eigen::MatrixX3d ReferenceElement::gradients(const Vec3& xi) const {
  const auto& dl = barycentric_gradients();
  Eigen::MatrixX3d g(n_nodes_, 3);
  if (order_ == 1) {
    g = dl;
    return g;
  }
  const Eigen::Vector4d l = barycentric(xi);
  for (int a = 0; a < 4; ++a) g.row(a) = (4.0 * l[a] - 1.0) * dl.row(a);
  for (int e = 0; e < 6; ++e) {
    const int a = kEdges[e][0];
    const int b = kEdges[e][1];
    g.row(4 + e) = 4.0 * (l[a] * dl.row(b) + l[b] * dl.row(a));
  }
  return g;
}

}  // namespace kdg
