#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "circlemap/complex.hpp"

namespace circlemap {

/// Contents of an M3T v1 mesh file.
///
///   m3t 1
///   vertices N
///   coords [D]        optional, D = 3 (default) or 4; N lines of D numbers
///   periods           optional; 3 lines of D numbers (lattice periods)
///   tets T            T lines of 4 vertex ids (0-based, oriented)
///   shifts T          optional; T lines of 12 integers (lattice shift per corner)
///   lengths E         optional; E lines "edge-id length", edge ids in canonical
///                     sorted (a, b, shift) order
///
/// Blank lines and text after '#' are ignored.
struct MeshFile {
  SimplicialComplex3 complex;
  std::optional<std::vector<double>> lengths;
};

/// Throws InputError with the offending line number on malformed input.
MeshFile read_m3t(std::istream& in);
MeshFile read_m3t_file(const std::string& path);

void write_m3t(std::ostream& out, const SimplicialComplex3& c,
               const std::vector<double>* lengths = nullptr);

}  // namespace circlemap
