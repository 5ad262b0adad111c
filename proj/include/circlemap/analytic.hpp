#pragma once

#include <functional>
#include <string>
#include <vector>

namespace circlemap {

/// Smooth positive periodic warping profile f with derivatives. Profiles
/// built from f alone get 5-point finite-difference derivatives and are
/// flagged so that callers relax tolerances to 1e-5.
struct WarpingProfile {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> ddf;
  bool finite_difference = false;
};

WarpingProfile constant_profile(double value);
/// mean + amplitude * sin(2 pi t / period).
WarpingProfile sine_profile(double mean, double amplitude, double period = 1.0);
WarpingProfile profile_from_function(std::string name, std::function<double(double)> f);

enum class FiberKind { kSphere, kTorus, kHyperbolic };

/// dt^2 + f(t)^2 g_fiber on [0, L] x fiber, fiber of constant curvature
/// kappa in {1, 0, -1}.
struct WarpedProductModel {
  FiberKind kind = FiberKind::kSphere;
  int fiber_euler = 2;
  double fiber_area = 0.0;
  double circle_length = 1.0;
  WarpingProfile profile;

  double kappa() const;
};

/// Unit round sphere fiber (area 4 pi, chi 2).
WarpedProductModel sphere_model(WarpingProfile f, double circle_length = 1.0);
/// Flat torus fiber of the given area (chi 0).
WarpedProductModel torus_model(double area, WarpingProfile f, double circle_length = 1.0);
/// Closed hyperbolic fiber of genus >= 2 (area -2 pi chi).
WarpedProductModel hyperbolic_model(int genus, WarpingProfile f, double circle_length = 1.0);

/// Throws InputError unless f > 0 on a 1024-point grid, f and f' are
/// periodic to 1e-9, L > 0, and kappa * area = 2 pi chi when kappa != 0.
void validate_model(const WarpedProductModel& m);

struct QuadratureOptions {
  double abs_tol = 1e-11;
  int max_depth = 16;  // at most 2^16 subintervals
};

/// Adaptive Gauss-Kronrod (61 point) on [a, b]. Throws NumericalError if the
/// error estimate exceeds abs_tol * max(1, L1 norm).
double integrate(const std::function<double(double)>& g, double a, double b,
                 const QuadratureOptions& q = {});

/// h = c f^{-2} dt with c = 1 / integral of f^{-2}.
struct ModelHarmonicForm {
  double c = 0.0;
  double period = 0.0;         // c * integral of f^{-2}; 1 up to quadrature
  double flux_spread = 0.0;    // max |f^2 (c f^{-2}) - c| on samples: coclosedness
  double energy = 0.0;         // A c
  double harmonic_norm = 0.0;  // sqrt(A c)
};

ModelHarmonicForm model_harmonic_form(const WarpedProductModel& m, const QuadratureOptions& q = {});

double model_speed(const WarpedProductModel& m, double c, double t);
/// |Hess u|^2 = 6 c^2 f'^2 / f^6.
double model_hessian_norm_sq(const WarpedProductModel& m, double c, double t);
/// R = 2 kappa / f^2 - 4 f'' / f - 2 (f'/f)^2.
double model_scalar_curvature(const WarpedProductModel& m, double t);

/// Both sides of the level-set identity; on submersion models they agree.
struct IdentitySides {
  double lhs = 0.0;             // 2 pi chi
  double rhs = 0.0;             // hessian_term + curvature_term
  double hessian_term = 0.0;    // (1/2) A c integral 6 f'^2 / f^2
  double curvature_term = 0.0;  // (1/2) A c integral R
  double c = 0.0;
};

IdentitySides main_identity_sides(const WarpedProductModel& m, const QuadratureOptions& q = {});

/// Test function psi(t) with derivative.
struct TestFunction {
  std::function<double(double)> psi;
  std::function<double(double)> dpsi;
};

struct WeightedSides {
  double lhs = 0.0;    // (1/2) A c integral (4 f'^2/f^2 - 4 f''/f) psi^2
  double rhs = 0.0;    // 4 A c integral psi psi' f'/f
  double slack = 0.0;  // rhs - lhs
};

WeightedSides weighted_inequality(const WarpedProductModel& m, const TestFunction& psi,
                                  const QuadratureOptions& q = {});

/// Fiber over the level theta of u(t) = c * integral_0^t f^{-2}.
struct ModelFiber {
  double theta = 0.0;
  double t = 0.0;
  double area = 0.0;  // A f(t)^2
  int euler = 0;
  int components = 1;
};

ModelFiber model_fiber(const WarpedProductModel& m, double theta, const QuadratureOptions& q = {});

/// Global minimum over [0, L] by a 4096-point scan refined with Brent's method.
double minimize_on_circle(const std::function<double(double)>& g, double length);

struct SystoleModel {
  double min_r = 0.0;
  double sys2 = 0.0;  // least fiber area: 4 pi min f^2 (assumed, see README)
  double product = 0.0;
};

/// Sphere-fiber models only; throws InputError otherwise.
SystoleModel systole_model_check(const WarpedProductModel& m);

/// Metric family on the complement of a norm-minimizing surface with p
/// torus components of area delta and product necks of length r.
struct KMFamilySpec {
  int thurston_norm = 0;
  int tori = 0;  // p
  double delta = 1e-3;
  double r = 1.0;
  double complement_curvature = 100.0;  // C(delta)
};

struct KMFamilyValues {
  double curvature_l2_sq = 0.0;  // C + 8 pi r n
  double energy_upper = 0.0;     // (p delta + 2 pi n) / r
  double product_bound_sq = 0.0;
  double product_bound = 0.0;    // compare with 4 pi n
};

void validate_km(const KMFamilySpec& s);
KMFamilyValues km_family_eval(const KMFamilySpec& s);

}  // namespace circlemap
