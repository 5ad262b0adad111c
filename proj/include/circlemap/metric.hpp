#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "circlemap/complex.hpp"

namespace circlemap {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Euclidean realization of one tetrahedron from its six edge lengths
/// (kTetEdges order). Corner 0 at the origin, corner 1 on +x, corner 2 in the
/// upper xy half-plane, corner 3 above it, so the oriented volume is positive.
struct TetGeometry {
  std::array<Eigen::Vector3d, 4> corners;
  double volume = 0.0;
  std::array<double, 6> dihedral{};  // interior dihedral angle at each local edge
  std::array<double, 6> star{};      // circumcentric dual area / length, per local edge
  std::array<double, 6> stiffness{};  // P1 finite-element weights (1/6) l_opp cot(theta_opp)
};

/// Throws NumericalError if the lengths violate a Cayley-Menger condition.
TetGeometry embed_tet(const std::array<double, 6>& lengths);

/// 288 V^2 from the Cayley-Menger determinant (independent of embed_tet).
double cayley_menger_288v2(const std::array<double, 6>& lengths);

/// Which per-tet edge weights feed the discrete Hodge star on 1-forms.
enum class StarKind {
  kCircumcentric,  // dual face area / edge length; may be negative off well-centered tets
  kFiniteElement,  // P1 stiffness entries; the Laplacian is always positive semidefinite
};

/// Piecewise-flat metric given by edge lengths, with derived quantities.
struct ReggeMetric {
  std::vector<double> lengths;                 // per edge
  std::vector<TetGeometry> tets;               // per tet
  std::vector<double> edge_dual_volume;        // barycentric: vol/6 per incident tet
  std::vector<double> vertex_dual_volume;      // barycentric: vol/4 per incident tet
  std::vector<double> star_weight;             // w_e, may be negative off-Delaunay
  StarKind star_kind = StarKind::kCircumcentric;
  double total_volume = 0.0;
  std::vector<std::string> warnings;

  int negative_weight_count() const;
};

/// Throws InputError on a length vector of the wrong size or a nonpositive
/// length, NumericalError (naming the tet) if some tet is not realizable.
ReggeMetric regge_from_lengths(const SimplicialComplex3& c, std::vector<double> lengths,
                               StarKind star = StarKind::kCircumcentric);

/// Smooth metric tensor on the chart of a model mesh. Only the leading
/// `dim` x `dim` block of the returned matrix is used.
struct MetricSpec {
  std::string name;
  std::function<Eigen::Matrix4d(const Eigen::Vector4d&)> tensor;
};

MetricSpec flat_metric();
/// e^{2 phi(x)} times the Euclidean metric.
MetricSpec conformal_flat_metric(std::function<double(const Eigen::Vector4d&)> phi);
/// Round sphere of the given radius times the circle, pulled back to the
/// 4-dimensional chart (x, y, z, t) by radial projection in the first three.
MetricSpec round_sphere_times_circle(double radius = 1.0);

/// Edge lengths by 3-point Gauss-Legendre quadrature of the metric speed
/// along the straight chart segment of each edge.
ReggeMetric regge_from_coordinates(const SimplicialComplex3& c, const MetricSpec& spec,
                                   StarKind star = StarKind::kCircumcentric);

/// Exact product lengths for build_surface_times_circle(fiber, layers, L):
/// l^2 = (fiber length)^2 + (layer step * L / layers)^2.
ReggeMetric product_metric(const SimplicialComplex3& c, const SurfaceMesh& fiber, int layers,
                           double circle_length = 1.0,
                           StarKind star = StarKind::kCircumcentric);

/// Same complex, all lengths multiplied by `factor`.
ReggeMetric scaled(const SimplicialComplex3& c, const ReggeMetric& g, double factor);

struct CurvatureField {
  std::vector<double> deficit;         // epsilon_e = 2pi - sum of dihedral angles
  std::vector<double> edge_density;    // R_e = 2 eps_e l_e / V_e
  std::vector<double> vertex_density;  // R_v = sum_{e ∋ v} eps_e l_e / V_v
  double total = 0.0;                  // integral of R dV = 2 sum eps_e l_e
};

CurvatureField deficit_angles(const SimplicialComplex3& c, const ReggeMetric& g);

struct ScalarStats {
  double min_r = 0.0;
  double negative_l2 = 0.0;  // ||R^-||_{L^2}
  double integral = 0.0;
};

/// Statistics of the vertex-lumped density R_v over the vertex dual cells.
ScalarStats scalar_stats(const CurvatureField& field, const ReggeMetric& g);

const std::vector<double>& star_weights(const ReggeMetric& g);

}  // namespace circlemap
