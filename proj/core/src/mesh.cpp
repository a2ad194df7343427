#include "kdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "kdg/error.hpp"

namespace kdg {
namespace {

using FaceKey = std::array<int, 3>;

FaceKey sorted_key(std::array<int, 3> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

struct FaceSlot {
  FaceKey key;
  int cell;
  int local;
};

}  // namespace

double cell_size(double volume, std::span<const double, 4> face_areas) {
  double surface = 0.0;
  for (double a : face_areas) surface += a;
  return volume / surface;
}

double compute_h_min(const Mesh& mesh) {
  if (mesh.num_cells() == 0) throw MeshError("h_min of an empty mesh");
  double h = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.num_cells(); ++c) h = std::min(h, mesh.cell_size(c));
  return h;
}

Mesh Mesh::build(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells,
                 std::vector<int> cell_tags, std::span<const BoundaryTriangle> boundary) {
  if (cell_tags.empty()) cell_tags.assign(cells.size(), 0);
  if (cell_tags.size() != cells.size()) throw MeshError("cell tag count does not match cell count");

  Mesh mesh;
  mesh.vertices_.reserve(vertices.size());
  for (const auto& x : vertices) {
    if (!x.allFinite()) throw MeshError("vertex with non-finite coordinates");
    mesh.vertices_.push_back(Vertex{x});
  }
  if (!vertices.empty()) {
    mesh.bbox_min_ = vertices.front();
    mesh.bbox_max_ = vertices.front();
    for (const auto& x : vertices) {
      mesh.bbox_min_ = mesh.bbox_min_.cwiseMin(x);
      mesh.bbox_max_ = mesh.bbox_max_.cwiseMax(x);
    }
  }
  const double diam = mesh.diameter();
  const double volume_tol = 1e-12 * diam * diam * diam;
  const int nv = static_cast<int>(vertices.size());

  mesh.cells_.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto ids = cells[c];
    for (int id : ids) {
      if (id < 0 || id >= nv) {
        throw MeshError("cell " + std::to_string(c) + " references unknown vertex " + std::to_string(id));
      }
    }
    if (std::set<int>(ids.begin(), ids.end()).size() != 4) {
      throw MeshError("cell " + std::to_string(c) + " has repeated vertices");
    }
    double vol = signed_volume(vertices[ids[0]], vertices[ids[1]], vertices[ids[2]], vertices[ids[3]]);
    if (std::abs(vol) <= volume_tol) {
      throw MeshError("cell " + std::to_string(c) + " has zero volume");
    }
    if (vol < 0) {
      std::swap(ids[2], ids[3]);
      vol = -vol;
    }
    Cell& cell = mesh.cells_[c];
    cell.vertex_ids = ids;
    cell.volume = vol;
    cell.centroid = (vertices[ids[0]] + vertices[ids[1]] + vertices[ids[2]] + vertices[ids[3]]) / 4.0;
    cell.physical_tag = cell_tags[c];
  }

  // Group the four faces of every cell by their sorted vertex triple.
  std::vector<FaceSlot> slots;
  slots.reserve(4 * cells.size());
  for (int c = 0; c < static_cast<int>(mesh.cells_.size()); ++c) {
    const auto& ids = mesh.cells_[c].vertex_ids;
    for (int a = 0; a < 4; ++a) {
      std::array<int, 3> tri{};
      int n = 0;
      for (int b = 0; b < 4; ++b) {
        if (b != a) tri[n++] = ids[b];
      }
      slots.push_back({sorted_key(tri), c, a});
    }
  }
  std::stable_sort(slots.begin(), slots.end(),
                   [](const FaceSlot& x, const FaceSlot& y) { return x.key < y.key; });

  std::vector<FaceKey> keys;
  for (std::size_t i = 0; i < slots.size();) {
    std::size_t j = i + 1;
    while (j < slots.size() && slots[j].key == slots[i].key) ++j;
    if (j - i > 2) {
      throw MeshError("non-manifold face shared by " + std::to_string(j - i) + " cells");
    }
    const FaceSlot& left = slots[i];
    Face face;
    const auto& lids = mesh.cells_[left.cell].vertex_ids;
    int n = 0;
    for (int b = 0; b < 4; ++b) {
      if (b != left.local) face.vertex_ids[n++] = lids[b];
    }
    const Vec3& p0 = vertices[face.vertex_ids[0]];
    const Vec3& p1 = vertices[face.vertex_ids[1]];
    const Vec3& p2 = vertices[face.vertex_ids[2]];
    Vec3 cross = (p1 - p0).cross(p2 - p0);
    face.area = 0.5 * cross.norm();
    face.normal = cross.normalized();
    const Vec3 face_center = (p0 + p1 + p2) / 3.0;
    if (face.normal.dot(face_center - mesh.cells_[left.cell].centroid) < 0) face.normal = -face.normal;
    face.left_cell = left.cell;

    const int fid = static_cast<int>(mesh.faces_.size());
    mesh.cells_[left.cell].faces[left.local] = fid;
    mesh.cells_[left.cell].face_sign[left.local] = 1.0;
    if (j - i == 2) {
      const FaceSlot& right = slots[i + 1];
      face.right_cell = right.cell;
      mesh.cells_[right.cell].faces[right.local] = fid;
      mesh.cells_[right.cell].face_sign[right.local] = -1.0;
    }
    mesh.faces_.push_back(face);
    keys.push_back(left.key);
    i = j;
  }

  for (const auto& tri : boundary) {
    const FaceKey key = sorted_key(tri.vertex_ids);
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) continue;
    Face& face = mesh.faces_[static_cast<std::size_t>(it - keys.begin())];
    if (face.is_boundary()) face.boundary_tag = tri.tag;
  }

  mesh.h_min_ = mesh.cells_.empty() ? 0.0 : compute_h_min(mesh);
  return mesh;
}

std::vector<int> Mesh::boundary_faces(int tag) const {
  std::vector<int> out;
  for (int f = 0; f < num_faces(); ++f) {
    if (faces_[f].is_boundary() && faces_[f].boundary_tag == tag) out.push_back(f);
  }
  return out;
}

std::vector<int> Mesh::boundary_tags() const {
  std::set<int> tags;
  for (const auto& f : faces_) {
    if (f.is_boundary()) tags.insert(f.boundary_tag);
  }
  return {tags.begin(), tags.end()};
}

Vec3 Mesh::outward_normal(int c, int local) const {
  const Cell& cell = cells_[static_cast<std::size_t>(c)];
  return cell.face_sign[local] * faces_[static_cast<std::size_t>(cell.faces[local])].normal;
}

double Mesh::cell_size(int c) const {
  const Cell& cell = cells_[static_cast<std::size_t>(c)];
  std::array<double, 4> areas{};
  for (int a = 0; a < 4; ++a) areas[a] = faces_[static_cast<std::size_t>(cell.faces[a])].area;
  return kdg::cell_size(cell.volume, areas);
}

}  // namespace kdg
