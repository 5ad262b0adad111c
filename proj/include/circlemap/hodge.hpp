#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "circlemap/complex.hpp"
#include "circlemap/homology.hpp"
#include "circlemap/metric.hpp"

namespace circlemap {

using Cochain1 = std::vector<double>;

struct HarmonicOptions {
  double tol = 1e-10;       // relative residual, in (0, 1e-4]
  int max_iterations = 0;   // 0: 10 * vertex count + 1000
  std::optional<std::vector<double>> initial_potential;
  // With negative star weights, certify the Laplacian by a sparse LDLT
  // (the dominant cost on fine meshes).
  bool certify_definite = true;
};

/// h = omega - d(phi) with phi minimizing sum_e w_e (omega_e - (d phi)_e)^2.
struct HarmonicOneForm {
  Cochain1 h;
  std::vector<double> potential;  // phi, zero mean
  IntCochain omega;
  double energy = 0.0;                  // sum_e w_e h_e^2
  double closedness_residual = 0.0;     // max |face sum of h|
  double coclosedness_residual = 0.0;   // ||d^T W h|| / ||d^T W omega||
  double max_divergence = 0.0;          // max_v |sum_{e ∋ v} ± w_e h_e|
  int iterations = 0;

  /// Circle-valued vertex phase u_v = -phi_v mod 1; u_b - u_a = h_e mod 1.
  double phase(int v) const;
};

/// Throws InputError if omega is not closed or tol is out of range,
/// NumericalError if the weighted Laplacian is indefinite or the iteration
/// does not converge (the message carries the residual).
HarmonicOneForm solve_harmonic(const SimplicialComplex3& c, const ReggeMetric& g,
                               const IntCochain& omega, const HarmonicOptions& options = {});

double harmonic_norm(const HarmonicOneForm& form);

/// Sum_e w_e x_e^2 for an arbitrary real 1-cochain.
double cochain_energy(const ReggeMetric& g, const Cochain1& x);

/// Values of a local lift of h at the four corners of tet t (corner 0 at 0).
std::array<double, 4> tet_lift(const SimplicialComplex3& c, const Cochain1& h, int t);

/// Gradient of the linear interpolant of the local lift in the tet embedding.
Eigen::Vector3d tet_gradient(const SimplicialComplex3& c, const ReggeMetric& g, const Cochain1& h,
                             int t);

/// |du| per tetrahedron.
std::vector<double> pointwise_speed(const SimplicialComplex3& c, const ReggeMetric& g,
                                    const Cochain1& h);

/// Sum_tets |du| vol: the bulk side of the coarea formula.
double speed_integral(const SimplicialComplex3& c, const ReggeMetric& g, const Cochain1& h);

/// Volume-weighted average of |du| over the tets around each vertex.
std::vector<double> vertex_speed(const SimplicialComplex3& c, const ReggeMetric& g,
                                 const Cochain1& h);

/// First-order surrogate for the integral of |Hess u|^2: the normal-gradient
/// jump across each interior face, squared, times A_f^2 / (vol_sigma + vol_tau).
double hessian_surrogate(const SimplicialComplex3& c, const ReggeMetric& g, const Cochain1& h);

}  // namespace circlemap
