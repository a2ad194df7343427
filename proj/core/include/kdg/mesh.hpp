#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace kdg {

using Vec3 = Eigen::Vector3d;

inline constexpr int kFacesPerCell = 4;
inline constexpr int kNoCell = -1;

struct Vertex {
  Vec3 coords;
};

/// Straight-sided tetrahedron. Local face `a` is the face opposite local vertex `a`.
struct Cell {
  std::array<int, 4> vertex_ids{};
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  int physical_tag = 0;
  std::array<int, 4> faces{};
  /// +1 when the face normal points out of this cell, -1 otherwise.
  std::array<double, 4> face_sign{};
};

/// Triangle shared by one or two cells. The normal is a unit vector oriented
/// from `left_cell` towards `right_cell` (outward on the boundary).
struct Face {
  std::array<int, 3> vertex_ids{};
  double area = 0.0;
  Vec3 normal = Vec3::Zero();
  int left_cell = kNoCell;
  int right_cell = kNoCell;
  int boundary_tag = 0;

  bool is_boundary() const noexcept { return right_cell == kNoCell; }
  int other(int cell) const noexcept { return cell == left_cell ? right_cell : left_cell; }
};

/// Tagged boundary triangle, as read from a mesh file.
struct BoundaryTriangle {
  std::array<int, 3> vertex_ids{};
  int tag = 0;
};

/// Immutable tetrahedral mesh with face connectivity and geometry.
class Mesh {
 public:
  Mesh() = default;

  /// Builds connectivity and geometry. Negatively oriented cells are
  /// renumbered; degenerate cells, unknown vertices and faces shared by more
  /// than two cells raise MeshError. Boundary faces not matched by any entry of
  /// `boundary` receive tag 0.
  static Mesh build(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> cells,
                    std::vector<int> cell_tags, std::span<const BoundaryTriangle> boundary = {});

  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  std::span<const Cell> cells() const noexcept { return cells_; }
  std::span<const Face> faces() const noexcept { return faces_; }

  const Vertex& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Cell& cell(int i) const { return cells_[static_cast<std::size_t>(i)]; }
  const Face& face(int i) const { return faces_[static_cast<std::size_t>(i)]; }

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_cells() const noexcept { return static_cast<int>(cells_.size()); }
  int num_faces() const noexcept { return static_cast<int>(faces_.size()); }

  /// Boundary face ids carrying `tag`, ascending.
  std::vector<int> boundary_faces(int tag) const;
  /// Distinct boundary tags, ascending.
  std::vector<int> boundary_tags() const;

  /// Outward unit normal of local face `local` of `cell`.
  Vec3 outward_normal(int cell, int local) const;

  /// volume / surface of one cell.
  double cell_size(int cell) const;
  double h_min() const noexcept { return h_min_; }

  const Vec3& bbox_min() const noexcept { return bbox_min_; }
  const Vec3& bbox_max() const noexcept { return bbox_max_; }
  double diameter() const noexcept { return (bbox_max_ - bbox_min_).norm(); }
  /// Coincidence tolerance, scaled by the bounding-box diameter.
  double geometric_tolerance() const noexcept { return 1e-12 * diameter(); }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  Vec3 bbox_min_ = Vec3::Zero();
  Vec3 bbox_max_ = Vec3::Zero();
  double h_min_ = 0.0;
};

/// Cell size metric: volume divided by the summed area of the four faces.
double cell_size(double volume, std::span<const double, 4> face_areas);

/// Minimum cell size over the mesh. Throws MeshError on an empty mesh.
double compute_h_min(const Mesh& mesh);

}  // namespace kdg
