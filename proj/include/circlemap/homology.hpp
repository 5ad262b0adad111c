#pragma once

#include <array>
#include <vector>

#include "circlemap/complex.hpp"

namespace circlemap {

using IntCochain = std::vector<long long>;
using IntChain = std::vector<long long>;

/// Class in H_2(M;Z) (degree 2) or H^1/H_1 (degree 1) given by integer
/// coordinates in the stored cocycle basis. Degree-2 classes are carried by
/// their Poincare-dual cohomology coordinates.
struct HomologyClass {
  int degree = 2;
  std::vector<long long> coordinates;

  bool is_zero() const;
};

/// Integer (co)homology of a closed oriented connected 3-complex.
struct HomologyBasis {
  std::array<int, 4> betti{};
  std::vector<long long> torsion;  // H_1 torsion coefficients (> 1)
  std::vector<IntCochain> cocycles;  // closed 1-cochains, basis of H^1(M;Z)
  std::vector<IntChain> cycles;      // 1-cycles with <cocycles[i], cycles[j]> = delta_ij
  bool used_bigint = false;

  int rank() const { return static_cast<int>(cocycles.size()); }
};

/// Betti numbers, torsion and integral bases. Periodic complexes put their
/// lattice-shift cocycles first whenever those extend to a basis (so T^3
/// classes read as (x, y, z) and the circle class of a product comes first).
/// Throws InputError if the complex is not closed and connected.
HomologyBasis compute_homology(const SimplicialComplex3& c);

std::array<int, 4> betti_numbers(const SimplicialComplex3& c);

std::vector<IntCochain> integral_cocycle_basis(const SimplicialComplex3& c);

/// Integer combination of basis cocycles with the class coordinates. Throws
/// InputError for the zero class or a coordinate vector of the wrong length.
IntCochain cocycle_for_class(const HomologyBasis& basis, const HomologyClass& alpha);

/// Coordinates of the cohomology class of a closed cochain.
HomologyClass class_of_cocycle(const HomologyBasis& basis, const IntCochain& omega);

/// Integer coboundary of a 1-cochain evaluated on every face.
std::vector<long long> coboundary(const SimplicialComplex3& c, const IntCochain& omega);
std::vector<double> coboundary(const SimplicialComplex3& c, const std::vector<double>& omega);

/// Integer coboundary of a 0-cochain (vertex function).
IntCochain vertex_coboundary(const SimplicialComplex3& c, const std::vector<long long>& psi);

long long pairing(const IntCochain& omega, const IntChain& z);

}  // namespace circlemap
