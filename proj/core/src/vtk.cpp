#include "kdg/vtk.hpp"

#include <fstream>
#include <iomanip>

#include "kdg/error.hpp"

namespace kdg {

void write_vtk(const DgSpace& space, const NodalField& w, std::span<const std::string> names, std::ostream& out) {
  const Mesh& mesh = space.mesh();
  const int nv = mesh.num_vertices();
  const int nc = mesh.num_cells();
  const int m = w.num_components();
  if (static_cast<int>(names.size()) != m) throw Error("VTK component names do not match the field");

  // Vertex nodes 0..3 of the nodal basis sit at the cell's vertices.
  std::vector<double> sum(static_cast<std::size_t>(nv) * m, 0.0);
  std::vector<int> count(static_cast<std::size_t>(nv), 0);
  for (int c = 0; c < nc; ++c) {
    const auto& ids = mesh.cell(c).vertex_ids;
    for (int a = 0; a < 4; ++a) {
      const double* val = w.node_data(c, a);
      for (int i = 0; i < m; ++i) sum[static_cast<std::size_t>(ids[a]) * m + i] += val[i];
      ++count[ids[a]];
    }
  }

  out << std::setprecision(12);
  out << "# vtk DataFile Version 3.0\nkdg solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices()) out << v.coords[0] << ' ' << v.coords[1] << ' ' << v.coords[2] << '\n';
  out << "CELLS " << nc << ' ' << 5 * nc << '\n';
  for (const auto& c : mesh.cells()) {
    out << "4 " << c.vertex_ids[0] << ' ' << c.vertex_ids[1] << ' ' << c.vertex_ids[2] << ' ' << c.vertex_ids[3] << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c) out << "10\n";
  out << "CELL_DATA " << nc << "\nSCALARS tag int 1\nLOOKUP_TABLE default\n";
  for (const auto& c : mesh.cells()) out << c.physical_tag << '\n';
  out << "POINT_DATA " << nv << '\n';
  for (int i = 0; i < m; ++i) {
    out << "SCALARS " << names[i] << " double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) {
      out << (count[v] > 0 ? sum[static_cast<std::size_t>(v) * m + i] / count[v] : 0.0) << '\n';
    }
  }
}

void write_vtk(const DgSpace& space, const NodalField& w, std::span<const std::string> names, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write VTK file '" + path + "'");
  write_vtk(space, w, names, out);
  if (!out) throw Error("failed while writing VTK file '" + path + "'");
}

}  // namespace kdg
