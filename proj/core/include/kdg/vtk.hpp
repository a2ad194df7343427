#pragma once

#include <ostream>
#include <span>
#include <string>

#include "kdg/dg.hpp"

namespace kdg {

/// Legacy VTK 3.0 ASCII unstructured grid. Point data holds each component at
/// the mesh vertices, averaged over the cells sharing the vertex; cell data
/// holds the physical tag.
void write_vtk(const DgSpace& space, const NodalField& w, std::span<const std::string> names, std::ostream& out);
/// Throws Error when the file cannot be written.
void write_vtk(const DgSpace& space, const NodalField& w, std::span<const std::string> names, const std::string& path);

}  // namespace kdg
