#include "kdg/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "kdg/error.hpp"

namespace kdg {
namespace {

std::vector<TetPoint> make_tet14() {
  std::vector<TetPoint> pts;
  auto add_vertex_orbit = [&](double a, double w) {
    const double b = 1.0 - 3.0 * a;
    pts.push_back({{a, a, a}, w});
    pts.push_back({{b, a, a}, w});
    pts.push_back({{a, b, a}, w});
    pts.push_back({{a, a, b}, w});
  };
  add_vertex_orbit(0.092735250310891237329, 0.012248840519393661405);
  add_vertex_orbit(0.3108859192633006135, 0.01878132095300264863);
  // Edge-midpoint orbit: barycentrics (b, b, 1/2-b, 1/2-b) and permutations.
  const double b = 0.045503704125649601532;
  const double c = 0.5 - b;
  const double w = 0.007091003462846904421;
  pts.push_back({{b, c, c}, w});
  pts.push_back({{c, b, c}, w});
  pts.push_back({{c, c, b}, w});
  pts.push_back({{c, b, b}, w});
  pts.push_back({{b, c, b}, w});
  pts.push_back({{b, b, c}, w});
  return pts;
}

std::vector<TriPoint> make_tri6() {
  std::vector<TriPoint> pts;
  auto add_orbit = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    pts.push_back({{a, a}, w});
    pts.push_back({{b, a}, w});
    pts.push_back({{a, b}, w});
  };
  add_orbit(0.44594849091596488632, 0.11169079483900573285);
  add_orbit(0.09157621350977074346, 0.054975871827660933819);
  return pts;
}

}  // namespace

const std::vector<TetPoint>& tet_rule_degree5() {
  static const std::vector<TetPoint> rule = make_tet14();
  return rule;
}

const std::vector<TriPoint>& tri_rule_degree4() {
  static const std::vector<TriPoint> rule = make_tri6();
  return rule;
}

void gauss_jacobi(int n, double alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error("gauss_jacobi needs n >= 1");
  // Golub-Welsch on [-1, 1] for (1-x)^alpha, then mapped to [0, 1].
  const double a = alpha;
  const double b = 0.0;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    jacobi(k, k) = k == 0 ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double j = k + 1.0;
      const double t = 2.0 * j + a + b;
      const double off = std::sqrt(4.0 * j * (j + a) * (j + b) * (j + a + b) / (t * t * (t + 1.0) * (t - 1.0)));
      jacobi(k, k + 1) = off;
      jacobi(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    nodes[k] = 0.5 * (1.0 + eig.eigenvalues()(k));
    weights[k] = mu0 * v0 * v0 / std::pow(2.0, a + 1.0);
  }
}

std::vector<TetPoint> conical_tet_rule(int n) {
  std::vector<double> u, wu, v, wv, s, ws;
  gauss_jacobi(n, 2.0, u, wu);
  gauss_jacobi(n, 1.0, v, wv);
  gauss_jacobi(n, 0.0, s, ws);
  std::vector<TetPoint> pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double x = u[i];
        const double y = (1.0 - u[i]) * v[j];
        const double z = (1.0 - u[i]) * (1.0 - v[j]) * s[k];
        pts.push_back({{x, y, z}, wu[i] * wv[j] * ws[k]});
      }
    }
  }
  return pts;
}

}  // namespace kdg
