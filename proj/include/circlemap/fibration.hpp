#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "circlemap/hodge.hpp"

namespace circlemap {

/// Point where the lift of u along edge `edge` (from its canonical start
/// vertex a) reaches theta + crossing, at parameter s in (0, 1) from a.
struct CrossingVertex {
  int edge = 0;
  int crossing = 0;
  double s = 0.0;
};

struct SurfaceComponent {
  int vertices = 0;
  int edges = 0;
  int triangles = 0;
  int euler_characteristic = 0;
  double area = 0.0;
  /// Algebraic intersection number with each supplied basis cycle.
  std::vector<long long> cycle_pairings;
};

/// Level set u^{-1}(theta), oriented by the direction of increasing u.
struct LevelSurface {
  double theta = 0.0;
  std::vector<CrossingVertex> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> triangle_tet;
  std::vector<double> triangle_area;
  std::vector<int> triangle_component;
  std::vector<SurfaceComponent> components;

  int euler_characteristic() const;
  double area() const;
  int component_count() const { return static_cast<int>(components.size()); }
};

/// Guard half-width around theta + Z: 1e-9 times the largest per-tet lift span.
double regularity_guard(const SimplicialComplex3& c, const HarmonicOneForm& form);

/// Marching tetrahedra on the per-tet lifts anchored at the vertex phases.
/// `cycles` (optional) are the edge cycles to pair each component with.
/// Throws CriticalLevelError (with a suggested level) if some vertex phase
/// is within the guard of theta mod 1, InvariantError if the extracted
/// surface is not closed and consistently oriented.
LevelSurface extract_level(const SimplicialComplex3& c, const ReggeMetric& g,
                           const HarmonicOneForm& form, double theta,
                           const std::vector<IntChain>* cycles = nullptr);

/// Sum over components of max(0, -chi).
int chi_minus(const LevelSurface& s);
int chi_minus(const std::vector<SurfaceComponent>& components);

struct SweepOptions {
  int levels = 64;  // K >= 8
  std::uint64_t seed = 1;
  const std::vector<IntChain>* cycles = nullptr;
};

struct SweepSample {
  double theta = 0.0;  // level actually used (after any perturbation)
  int euler_characteristic = 0;
  double area = 0.0;
  int chi_minus = 0;
  bool perturbed = false;
  std::vector<SurfaceComponent> components;
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct SweepTable {
  std::vector<SweepSample> samples;  // ordered by theta
  Estimate chi;                      // integral of chi over the circle
  Estimate area;
  Estimate components;
  int rejected = 0;
};

/// One level uniformly at random in each of K equal strata of [0, 1).
/// Near-critical draws are pushed by +3 guard up to three times; throws
/// NumericalError if more than 10% of strata are rejected.
SweepTable sweep(const SimplicialComplex3& c, const ReggeMetric& g, const HarmonicOneForm& form,
                 const SweepOptions& options = {});

/// ASCII OFF triangle soup (each triangle with its own three corners) in the
/// chart coordinates of the complex. 4-dimensional charts drop the circle
/// coordinate. Throws InputError if the complex has no embedding.
void write_off(std::ostream& out, const SimplicialComplex3& c, const LevelSurface& s);

}  // namespace circlemap
