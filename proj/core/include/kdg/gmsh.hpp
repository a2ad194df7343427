#pragma once

#include <istream>
#include <ostream>

#include "kdg/mesh.hpp"

namespace kdg {

/// Reads a Gmsh MSH 4.1 ASCII file. 4-node tetrahedra become cells and 3-node
/// triangles tag the boundary faces they coincide with; physical tags are
/// resolved through the $Entities section (0 when an entity has none). Other
/// linear element types are skipped; second-order tetrahedra are rejected.
Mesh parse_gmsh(std::istream& in);

/// Writes `mesh` as MSH 4.1 ASCII, including tagged boundary triangles, so that
/// parse_gmsh(write_gmsh(mesh)) reproduces connectivity, geometry and tags.
void write_gmsh(const Mesh& mesh, std::ostream& out);

/// Canonical plain-text dump: a header with counts, one "x y z" line per vertex
/// and one "v0 v1 v2 v3 tag" line per cell.
void write_mesh_dump(const Mesh& mesh, std::ostream& out);
Mesh read_mesh_dump(std::istream& in);

/// Loads a mesh from a path, dispatching on the extension (.msh or .mesh dump).
Mesh load_mesh(const std::string& path);

}  // namespace kdg
