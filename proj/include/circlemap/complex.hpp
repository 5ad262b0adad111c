#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace circlemap {

/// Integer lattice translation attached to a tetrahedron corner. Periodic
/// model meshes place each corner in a fundamental domain plus a shift; for
/// ordinary simplicial complexes every shift is zero.
using Shift = std::array<int, 3>;

inline Shift operator-(const Shift& a, const Shift& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

/// Canonical edge: a < b, `d` is shift(b) - shift(a).
struct EdgeKey {
  int a = 0;
  int b = 0;
  Shift d{};
  auto operator<=>(const EdgeKey&) const = default;
};

/// Canonical face: a < b < c, shifts of b and c relative to a.
struct FaceKey {
  int a = 0;
  int b = 0;
  int c = 0;
  Shift db{};
  Shift dc{};
  auto operator<=>(const FaceKey&) const = default;
};

/// Chart coordinates for model meshes. A tet corner (v, s) sits at
/// coords[v] + sum_j s[j] * periods[j]. `dim` is 3 for T^3 charts and 4 for
/// S^2 x S^1 (unit-sphere point plus circle coordinate).
struct Embedding {
  int dim = 3;
  std::vector<Eigen::Vector4d> coords;
  std::array<Eigen::Vector4d, 3> periods{Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero(),
                                         Eigen::Vector4d::Zero()};

  Eigen::Vector4d position(int vertex, const Shift& shift) const;
};

/// Local edge order inside a tetrahedron: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Local edge opposite to local edge i.
inline constexpr std::array<int, 6> kOppositeEdge{5, 4, 3, 2, 1, 0};

struct Incidence {
  int index;
  int sign;
};

/// Oriented closed 3-dimensional (Delta-)complex with derived edge and face
/// tables. Immutable after construction.
class SimplicialComplex3 {
 public:
  SimplicialComplex3() = default;

  /// Throws InputError on out-of-range ids or a simplex with repeated
  /// (vertex, shift) corners. Manifold invariants are checked by validate().
  SimplicialComplex3(int vertex_count, std::vector<std::array<int, 4>> tets,
                     std::vector<std::array<Shift, 4>> shifts = {},
                     std::optional<Embedding> embedding = std::nullopt);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  int tet_count() const { return static_cast<int>(tets_.size()); }
  long euler_characteristic() const {
    return static_cast<long>(vertex_count_) - edge_count() + face_count() - tet_count();
  }

  const std::vector<std::array<int, 4>>& tets() const { return tets_; }
  const std::array<Shift, 4>& tet_shifts(int t) const { return shifts_[t]; }
  bool has_shifts() const { return has_shifts_; }

  const EdgeKey& edge(int e) const { return edges_[e]; }
  const FaceKey& face(int f) const { return faces_[f]; }

  /// Edge ids in kTetEdges order, with +1 when local i->j (i<j) agrees with
  /// the canonical a->b direction.
  const std::array<int, 6>& tet_edges(int t) const { return tet_edges_[t]; }
  const std::array<int, 6>& tet_edge_signs(int t) const { return tet_edge_signs_[t]; }

  /// Face opposite local vertex i, with the sign of the induced orientation
  /// relative to the canonical (sorted) face orientation.
  const std::array<int, 4>& tet_faces(int t) const { return tet_faces_[t]; }
  const std::array<int, 4>& tet_face_signs(int t) const { return tet_face_signs_[t]; }

  /// d[a,b,c] = [b,c] - [a,c] + [a,b]
  const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }
  const std::array<int, 3>& face_edge_signs(int f) const { return face_edge_signs_[f]; }

  const std::vector<Incidence>& face_tets(int f) const { return face_tets_[f]; }
  const std::vector<int>& edge_tets(int e) const { return edge_tets_[e]; }
  const std::vector<int>& vertex_edges(int v) const { return vertex_edges_[v]; }

  const std::optional<Embedding>& embedding() const { return embedding_; }

  /// Integer boundary matrix d_k : C_k -> C_{k-1} as (row, col, value) triplets.
  std::vector<std::array<int, 3>> boundary(int k) const;

  /// Integer 1-cochain counting how often an edge wraps in lattice direction j.
  std::vector<long long> shift_cocycle(int direction) const;

  /// Copy with one tetrahedron dropped (for diagnostics and tests).
  SimplicialComplex3 without_tet(int t) const;
  /// Copy with local vertices 0 and 1 of tetrahedron t swapped.
  SimplicialComplex3 with_flipped_tet(int t) const;

 private:
  int vertex_count_ = 0;
  bool has_shifts_ = false;
  std::vector<std::array<int, 4>> tets_;
  std::vector<std::array<Shift, 4>> shifts_;
  std::vector<EdgeKey> edges_;
  std::vector<FaceKey> faces_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::vector<std::array<int, 6>> tet_edge_signs_;
  std::vector<std::array<int, 4>> tet_faces_;
  std::vector<std::array<int, 4>> tet_face_signs_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<std::array<int, 3>> face_edge_signs_;
  std::vector<std::vector<Incidence>> face_tets_;
  std::vector<std::vector<int>> edge_tets_;
  std::vector<std::vector<int>> vertex_edges_;
  std::optional<Embedding> embedding_;
};

struct Diagnostic {
  std::string kind;     // closedness, orientation, vertex-link, boundary, euler, connectivity
  std::string simplex;  // e.g. "face 12 (3,7,9)"
  std::string detail;
};

/// Every violated invariant, one entry per offending simplex. Empty iff valid.
std::vector<Diagnostic> validate(const SimplicialComplex3& c);

// ---------------------------------------------------------------------------
// Fiber surfaces and model builders

/// Closed oriented triangulated surface with intrinsic edge lengths.
struct SurfaceMesh {
  int vertex_count = 0;
  int genus = 0;
  std::vector<std::array<int, 3>> triangles;  // consistently oriented
  std::map<std::pair<int, int>, double> edge_lengths;  // keyed by sorted vertex pair
  std::vector<Eigen::Vector3d> positions;               // optional display positions

  int euler_characteristic() const;
  double edge_length(int u, int v) const;
  double area() const;
};

/// Icosahedron subdivided `level` times, vertices on the sphere of radius
/// `radius`, edge lengths = great-circle arcs.
SurfaceMesh build_icosphere(int level, double radius = 1.0);

/// Flat square torus of unit area on an n x n grid (n >= 3).
SurfaceMesh build_flat_torus(int n);

/// Genus g >= 2 surface from the regular hyperbolic 4g-gon with angle 2pi/4g,
/// each fan triangle split into k^2 pieces (k >= 3; k = 2 would create double
/// edges at the polygon corner). Edge lengths are hyperbolic distances
/// (curvature -1); the flat triangles overestimate the area 4pi(g-1) by O(1/k).
SurfaceMesh build_hyperbolic_surface(int genus, int k);

/// genus 0: icosphere(level); genus 1: flat torus n = 3*2^level;
/// genus >= 2: hyperbolic surface with k = 3*2^level.
SurfaceMesh build_fiber(int genus, int level);

/// Periodic n x n x n grid of the unit cube, six tetrahedra per cube along the
/// main diagonal. Throws InputError for n < 2.
SimplicialComplex3 build_three_torus(int n);

/// Prism product of `fiber` with a circle of `layers` >= 3 segments. Vertex
/// id = layer * fiber.vertex_count + fiber vertex. Sphere fibers (with
/// positions) carry a 4-dimensional chart embedding with circle period L.
SimplicialComplex3 build_surface_times_circle(const SurfaceMesh& fiber, int layers,
                                              double circle_length = 1.0);

/// Convenience overload: build_fiber(genus, fiber_level) times the circle.
SimplicialComplex3 build_surface_times_circle(int genus, int fiber_level, int layers,
                                              double circle_length = 1.0);

}  // namespace circlemap
