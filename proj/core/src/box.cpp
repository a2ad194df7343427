#include "kdg/box.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "kdg/error.hpp"

namespace kdg {

std::vector<double> uniform_points(double a, double b, int n) {
  if (n < 1 || !(b > a)) throw MeshError("uniform_points needs n >= 1 and b > a");
  std::vector<double> xs(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) xs[i] = a + (b - a) * i / n;
  xs.back() = b;
  return xs;
}

std::vector<double> refined_points(double a, double b, int n, double center, double fine, int layers) {
  std::vector<double> xs = uniform_points(a, b, n);
  xs.push_back(center);
  for (int k = 1; k <= layers; ++k) {
    xs.push_back(center - k * fine);
    xs.push_back(center + k * fine);
  }
  std::sort(xs.begin(), xs.end());
  const double tol = 1e-3 * fine;
  std::vector<double> out;
  for (double x : xs) {
    if (x < a || x > b) continue;
    if (!out.empty() && x - out.back() < tol) continue;
    out.push_back(x);
  }
  return out;
}

Mesh make_box_mesh(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& zs,
                   const std::function<int(const Vec3&)>& cell_tag) {
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  const int nz = static_cast<int>(zs.size()) - 1;
  if (nx < 1 || ny < 1 || nz < 1) throw MeshError("box mesh needs at least one interval per axis");

  auto vid = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) vertices.emplace_back(xs[i], ys[j], zs[k]);

  // Kuhn split: one tetrahedron per axis permutation, all sharing the main diagonal.
  static constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<int, 4>> cells;
  std::vector<int> tags;
  cells.reserve(6 * static_cast<std::size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Vec3 center(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]), 0.5 * (zs[k] + zs[k + 1]));
        const int tag = cell_tag ? cell_tag(center) : 0;
        for (const auto& perm : kPerms) {
          std::array<int, 3> corner = {i, j, k};
          std::array<int, 4> ids{};
          ids[0] = vid(corner[0], corner[1], corner[2]);
          for (int s = 0; s < 3; ++s) {
            ++corner[perm[s]];
            ids[s + 1] = vid(corner[0], corner[1], corner[2]);
          }
          cells.push_back(ids);
          tags.push_back(tag);
        }
      }
    }
  }

  const Mesh untagged = Mesh::build(vertices, cells, tags);
  const Vec3 lo(xs.front(), ys.front(), zs.front());
  const Vec3 hi(xs.back(), ys.back(), zs.back());
  const double tol = untagged.geometric_tolerance();
  std::vector<BoundaryTriangle> boundary;
  for (const auto& face : untagged.faces()) {
    if (!face.is_boundary()) continue;
    const Vec3 c = (vertices[face.vertex_ids[0]] + vertices[face.vertex_ids[1]] + vertices[face.vertex_ids[2]]) / 3.0;
    int tag = 0;
    for (int axis = 0; axis < 3 && tag == 0; ++axis) {
      if (std::abs(c[axis] - lo[axis]) <= tol) tag = 2 * axis + 1;
      else if (std::abs(c[axis] - hi[axis]) <= tol) tag = 2 * axis + 2;
    }
    boundary.push_back({face.vertex_ids, tag});
  }
  return Mesh::build(std::move(vertices), std::move(cells), std::move(tags), boundary);
}

Mesh make_unit_cube(int n) {
  const auto xs = uniform_points(0.0, 1.0, n);
  return make_box_mesh(xs, xs, xs);
}

}  // namespace kdg
