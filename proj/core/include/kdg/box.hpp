#pragma once

#include <functional>
#include <vector>

#include "kdg/mesh.hpp"

namespace kdg {

/// n+1 equispaced coordinates spanning [a, b].
std::vector<double> uniform_points(double a, double b, int n);

/// Coordinates of a uniform n-interval grid on [a, b] with extra planes
/// inserted at center ± k·fine for k = 1..layers, giving a band of thin cells.
std::vector<double> refined_points(double a, double b, int n, double center, double fine, int layers);

/// Tensor-product box split into six tetrahedra per hexahedron (Kuhn
/// subdivision, conforming across hexahedra). Boundary faces are tagged
/// x-:1, x+:2, y-:3, y+:4, z-:5, z+:6; cell tags come from `cell_tag` applied
/// to the hexahedron center, or 0.
Mesh make_box_mesh(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& zs,
                   const std::function<int(const Vec3&)>& cell_tag = {});

/// Unit cube with n intervals per axis.
Mesh make_unit_cube(int n);

}  // namespace kdg
