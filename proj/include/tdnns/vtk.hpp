#pragma once

// Legacy ASCII VTK export of a solution. Every element is subdivided
// uniformly in reference coordinates into linear hexahedra or wedges; points
// are not shared between elements, so discontinuous fields show as jumps.
// Point data: u, phi, E, sigma (full tensor) and S11.

#include "tdnns/solvers.hpp"

#include <iosfwd>
#include <string>

namespace tdnns {

void write_vtk(std::ostream& os, const Solution& s, int subdivision, const std::string& title = "tdnns solution");
/// Throws std::runtime_error on I/O failure.
void write_vtk_file(const std::string& path, const Solution& s, int subdivision);

}  // namespace tdnns
