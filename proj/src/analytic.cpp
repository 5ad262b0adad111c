#include "circlemap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

WarpingProfile constant_profile(double value) {
  WarpingProfile p;
  p.name = "constant " + std::to_string(value);
  p.f = [value](double) { return value; };
  p.df = [](double) { return 0.0; };
  p.ddf = [](double) { return 0.0; };
  return p;
}

WarpingProfile sine_profile(double mean, double amplitude, double period) {
  const double w = 2 * kPi / period;
  WarpingProfile p;
  std::ostringstream os;
  os << mean << " + " << amplitude << " sin(2 pi t / " << period << ")";
  p.name = os.str();
  p.f = [=](double t) { return mean + amplitude * std::sin(w * t); };
  p.df = [=](double t) { return amplitude * w * std::cos(w * t); };
  p.ddf = [=](double t) { return -amplitude * w * w * std::sin(w * t); };
  return p;
}

WarpingProfile profile_from_function(std::string name, std::function<double(double)> f) {
  constexpr double h = 1e-3;
  WarpingProfile p;
  p.name = std::move(name);
  p.f = f;
  p.df = [f](double t) {
    return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
  };
  p.ddf = [f](double t) {
    return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) /
           (12 * h * h);
  };
  p.finite_difference = true;
  return p;
}

double WarpedProductModel::kappa() const {
  switch (kind) {
    case FiberKind::kSphere:
      return 1.0;
    case FiberKind::kTorus:
      return 0.0;
    case FiberKind::kHyperbolic:
      return -1.0;
  }
  return 0.0;
}

WarpedProductModel sphere_model(WarpingProfile f, double circle_length) {
  return {FiberKind::kSphere, 2, 4 * kPi, circle_length, std::move(f)};
}

WarpedProductModel torus_model(double area, WarpingProfile f, double circle_length) {
  return {FiberKind::kTorus, 0, area, circle_length, std::move(f)};
}

WarpedProductModel hyperbolic_model(int genus, WarpingProfile f, double circle_length) {
  if (genus < 2) throw InputError("hyperbolic fiber needs genus >= 2");
  return {FiberKind::kHyperbolic, 2 - 2 * genus, 4 * kPi * (genus - 1), circle_length,
          std::move(f)};
}

void validate_model(const WarpedProductModel& m) {
  const double L = m.circle_length;
  if (!(L > 0) || !std::isfinite(L)) throw InputError("circle length must be positive");
  if (!m.profile.f || !m.profile.df || !m.profile.ddf) throw InputError("profile is incomplete");
  if (!(m.fiber_area > 0)) throw InputError("fiber area must be positive");
  for (int i = 0; i <= 1024; ++i) {
    double t = L * i / 1024.0;
    double v = m.profile.f(t);
    if (!(v > 0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "warping profile " << m.profile.name << " is not positive at t = " << t;
      throw InputError(os.str());
    }
  }
  const double scale = std::max(1.0, std::abs(m.profile.f(0)));
  const double slope_tol = m.profile.finite_difference ? 1e-5 : 1e-9;
  if (std::abs(m.profile.f(L) - m.profile.f(0)) > 1e-9 * scale ||
      std::abs(m.profile.df(L) - m.profile.df(0)) > slope_tol * std::max(scale, std::abs(m.profile.df(0))))
    throw InputError("warping profile " + m.profile.name + " is not periodic with period L");
  const double kappa = m.kappa();
  if (kappa != 0 && std::abs(kappa * m.fiber_area - 2 * kPi * m.fiber_euler) > 1e-9 * m.fiber_area)
    throw InputError("fiber area is inconsistent with Gauss-Bonnet");
  if (kappa == 0 && m.fiber_euler != 0) throw InputError("flat fiber must have chi = 0");
}

double integrate(const std::function<double(double)>& g, double a, double b,
                 const QuadratureOptions& q) {
  double error = 0.0, l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g, a, b, static_cast<unsigned>(q.max_depth), q.abs_tol, &error, &l1);
  if (!std::isfinite(value) || error > q.abs_tol * std::max(1.0, l1)) {
    std::ostringstream os;
    os << "quadrature on [" << a << ", " << b << "] missed tolerance " << q.abs_tol
       << " (error estimate " << error << ")";
    throw NumericalError(os.str());
  }
  return value;
}

ModelHarmonicForm model_harmonic_form(const WarpedProductModel& m, const QuadratureOptions& q) {
  validate_model(m);
  const auto& f = m.profile.f;
  const double L = m.circle_length;
  const double inv = integrate([&](double t) { return 1.0 / (f(t) * f(t)); }, 0, L, q);
  ModelHarmonicForm out;
  out.c = 1.0 / inv;
  out.period = integrate([&](double t) { return out.c / (f(t) * f(t)); }, 0, L, q);
  for (int i = 0; i < 256; ++i) {
    double t = L * i / 256.0;
    double flux = f(t) * f(t) * (out.c / (f(t) * f(t)));
    out.flux_spread = std::max(out.flux_spread, std::abs(flux - out.c));
  }
  out.energy = m.fiber_area * out.c;
  out.harmonic_norm = std::sqrt(out.energy);
  return out;
}

double model_speed(const WarpedProductModel& m, double c, double t) {
  double f = m.profile.f(t);
  return c / (f * f);
}

double model_hessian_norm_sq(const WarpedProductModel& m, double c, double t) {
  const double f = m.profile.f(t), df = m.profile.df(t);
  return 6 * c * c * df * df / std::pow(f, 6);
}

double model_scalar_curvature(const WarpedProductModel& m, double t) {
  const double f = m.profile.f(t), df = m.profile.df(t), ddf = m.profile.ddf(t);
  return 2 * m.kappa() / (f * f) - 4 * ddf / f - 2 * (df / f) * (df / f);
}

IdentitySides main_identity_sides(const WarpedProductModel& m, const QuadratureOptions& q) {
  const ModelHarmonicForm form = model_harmonic_form(m, q);
  const double L = m.circle_length;
  const double scale = 0.5 * m.fiber_area * form.c;
  IdentitySides out;
  out.c = form.c;
  out.lhs = 2 * kPi * m.fiber_euler;
  out.hessian_term = scale * integrate(
                                 [&](double t) {
                                   double r = m.profile.df(t) / m.profile.f(t);
                                   return 6 * r * r;
                                 },
                                 0, L, q);
  out.curvature_term =
      scale * integrate([&](double t) { return model_scalar_curvature(m, t); }, 0, L, q);
  out.rhs = out.hessian_term + out.curvature_term;
  return out;
}

WeightedSides weighted_inequality(const WarpedProductModel& m, const TestFunction& psi,
                                  const QuadratureOptions& q) {
  const ModelHarmonicForm form = model_harmonic_form(m, q);
  const double L = m.circle_length;
  const double ac = m.fiber_area * form.c;
  WeightedSides out;
  out.lhs = 0.5 * ac * integrate(
                           [&](double t) {
                             double f = m.profile.f(t), df = m.profile.df(t);
                             double p = psi.psi(t);
                             return (4 * df * df / (f * f) - 4 * m.profile.ddf(t) / f) * p * p;
                           },
                           0, L, q);
  out.rhs = 4 * ac * integrate(
                         [&](double t) {
                           return psi.psi(t) * psi.dpsi(t) * m.profile.df(t) / m.profile.f(t);
                         },
                         0, L, q);
  out.slack = out.rhs - out.lhs;
  return out;
}

ModelFiber model_fiber(const WarpedProductModel& m, double theta, const QuadratureOptions& q) {
  const ModelHarmonicForm form = model_harmonic_form(m, q);
  const auto& f = m.profile.f;
  theta -= std::floor(theta);
  auto u = [&](double t) {
    return t <= 0 ? 0.0 : form.c * integrate([&](double s) { return 1.0 / (f(s) * f(s)); }, 0, t, q);
  };
  ModelFiber out;
  out.theta = theta;
  if (theta > 0) {
    boost::uintmax_t iterations = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(
        [&](double t) { return u(t) - theta; }, 0.0, m.circle_length, -theta, 1.0 - theta,
        boost::math::tools::eps_tolerance<double>(50), iterations);
    out.t = 0.5 * (lo + hi);
  }
  out.area = m.fiber_area * f(out.t) * f(out.t);
  out.euler = m.fiber_euler;
  return out;
}

double minimize_on_circle(const std::function<double(double)>& g, double length) {
  constexpr int n = 4096;
  int best = 0;
  double best_value = g(0.0);
  for (int i = 1; i < n; ++i) {
    double v = g(length * i / n);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double h = length / n;
  auto [x, v] = boost::math::tools::brent_find_minima(
      [&](double t) { return g(t); }, (best - 1) * h, (best + 1) * h, 52);
  (void)x;
  return std::min(v, best_value);
}

SystoleModel systole_model_check(const WarpedProductModel& m) {
  validate_model(m);
  if (m.kind != FiberKind::kSphere) throw InputError("systole model check needs a sphere fiber");
  SystoleModel out;
  const auto& f = m.profile.f;
  out.min_r = minimize_on_circle([&](double t) { return model_scalar_curvature(m, t); },
                                 m.circle_length);
  const double min_f2 =
      minimize_on_circle([&](double t) { return f(t) * f(t); }, m.circle_length);
  out.sys2 = m.fiber_area * min_f2;
  out.product = out.min_r * out.sys2;
  return out;
}

void validate_km(const KMFamilySpec& s) {
  if (s.thurston_norm < 0) throw InputError("Thurston norm must be nonnegative");
  if (s.tori < 0) throw InputError("torus count p must be nonnegative");
  if (!(s.delta > 0)) throw InputError("torus area delta must be positive");
  if (!(s.r >= 1)) throw InputError("neck length r must be at least 1");
  if (!(s.complement_curvature >= 0)) throw InputError("C(delta) must be nonnegative");
}

KMFamilyValues km_family_eval(const KMFamilySpec& s) {
  validate_km(s);
  const double n = s.thurston_norm;
  const double pd = s.tori * s.delta;
  KMFamilyValues out;
  out.curvature_l2_sq = s.complement_curvature + 8 * kPi * s.r * n;
  out.energy_upper = (pd + 2 * kPi * n) / s.r;
  out.product_bound_sq = 16 * kPi * kPi * n * n + pd * 8 * kPi * n +
                         s.complement_curvature * (pd + 2 * kPi * n) / s.r;
  out.product_bound = std::sqrt(out.product_bound_sq);
  return out;
}

}  // namespace circlemap
