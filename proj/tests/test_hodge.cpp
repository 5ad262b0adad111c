#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "circlemap/error.hpp"
#include "circlemap/hodge.hpp"

using namespace circlemap;

namespace {

double weighted_energy(const ReggeMetric& g, const std::vector<double>& x) {
  long double s = 0;
  for (std::size_t e = 0; e < x.size(); ++e) s += g.star_weight[e] * x[e] * x[e];
  return static_cast<double>(s);
}

// Dense weighted least squares: min_phi |W^(1/2)(omega - D phi)|.
std::vector<double> dense_harmonic(const SimplicialComplex3& c, const ReggeMetric& g,
                                   const IntCochain& omega) {
  const int ne = c.edge_count(), nv = c.vertex_count();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(ne, nv);
  for (int e = 0; e < ne; ++e) {
    D(e, c.edge(e).a) -= 1;
    D(e, c.edge(e).b) += 1;
  }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(g.star_weight.data(), ne);
  Eigen::VectorXd om(ne);
  for (int e = 0; e < ne; ++e) om(e) = static_cast<double>(omega[e]);
  Eigen::MatrixXd L = D.transpose() * w.asDiagonal() * D;
  Eigen::VectorXd rhs = D.transpose() * w.asDiagonal() * om;
  Eigen::VectorXd phi = L.completeOrthogonalDecomposition().solve(rhs);
  Eigen::VectorXd h = om - D * phi;
  return std::vector<double>(h.data(), h.data() + ne);
}

struct Model {
  SimplicialComplex3 c;
  ReggeMetric g;
  HomologyBasis basis;
};

Model torus(int n) {
  Model m{build_three_torus(n), {}, {}};
  m.g = regge_from_coordinates(m.c, flat_metric());
  m.basis = compute_homology(m.c);
  return m;
}

Model product(int genus, int level, double circle = 1.0) {
  SurfaceMesh fiber = build_fiber(genus, level);
  int layers = 3 << level;
  Model m{build_surface_times_circle(fiber, layers, circle), {}, {}};
  m.g = product_metric(m.c, fiber, layers, circle);
  m.basis = compute_homology(m.c);
  return m;
}

IntCochain add(const IntCochain& a, const IntCochain& b, long long k = 1) {
  IntCochain out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + k * b[i];
  return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Harmonic, FlatTorusNormIsCoefficientLength) {
  Model m = torus(3);
  for (long long k : {1, 2, -3}) {
    auto omega = cocycle_for_class(m.basis, {2, {0, 0, k}});
    auto h = solve_harmonic(m.c, m.g, omega);
    EXPECT_NEAR(harmonic_norm(h), std::abs(static_cast<double>(k)), 1e-9);
  }
  auto h = solve_harmonic(m.c, m.g, cocycle_for_class(m.basis, {2, {1, 2, 2}}));
  EXPECT_NEAR(harmonic_norm(h), 3.0, 1e-9);
}

TEST(Harmonic, MatchesDenseLeastSquares) {
  for (Model m : {torus(2), product(0, 0), product(2, 0)}) {
    auto omega = m.basis.cocycles.back();
    auto h = solve_harmonic(m.c, m.g, omega, {.tol = 1e-12});
    EXPECT_LT(max_diff(h.h, dense_harmonic(m.c, m.g, omega)), 1e-8);
  }
}

TEST(Harmonic, ExactClassGivesZero) {
  Model m = torus(3);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long long> dist(-5, 5);
  std::vector<long long> psi(m.c.vertex_count());
  for (auto& x : psi) x = dist(rng);
  auto h = solve_harmonic(m.c, m.g, vertex_coboundary(m.c, psi));
  EXPECT_LT(h.energy, 1e-18);
  EXPECT_LT(*std::max_element(h.h.begin(), h.h.end(), [](double a, double b) {
              return std::abs(a) < std::abs(b);
            }),
            1e-9);
}

TEST(Harmonic, ProductEnergyIsFiberArea) {
  // For a product metric the circle coordinate is harmonic: E = area(F) / L.
  for (int genus : {0, 1, 2}) {
    for (int level : {0, 1}) {
      SurfaceMesh fiber = build_fiber(genus, level);
      Model m = product(genus, level, 2.0);
      auto h = solve_harmonic(m.c, m.g, m.basis.cocycles[0]);
      EXPECT_NEAR(h.energy, fiber.area() / 2.0, 1e-9 * fiber.area()) << genus << " " << level;
    }
  }
}

TEST(Harmonic, RoundChartEnergyIncreasesToward4Pi) {
  double previous = 0;
  for (int level : {0, 1, 2}) {
    auto c = build_surface_times_circle(0, level, 3 << level);
    auto g = regge_from_coordinates(c, round_sphere_times_circle());
    auto h = solve_harmonic(c, g, compute_homology(c).cocycles[0]);
    EXPECT_GT(h.energy, previous);
    EXPECT_LT(h.energy, 4 * M_PI);
    previous = h.energy;
  }
  EXPECT_GT(previous, 0.98 * 4 * M_PI);
}

TEST(Harmonic, EnergyMinimalInClass) {
  Model m = product(1, 0);
  auto omega = m.basis.cocycles[1];
  auto h = solve_harmonic(m.c, m.g, omega);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(omega.begin(), omega.end());
    double scale = std::pow(10.0, trial % 5 - 3);
    std::vector<double> psi(m.c.vertex_count());
    for (auto& p : psi) p = scale * n01(rng);
    for (int e = 0; e < m.c.edge_count(); ++e) x[e] += psi[m.c.edge(e).b] - psi[m.c.edge(e).a];
    EXPECT_GE(weighted_energy(m.g, x), h.energy - 1e-12 * h.energy);
  }
}

TEST(Harmonic, GaugeInvariance) {
  Model m = product(0, 1);
  auto omega = m.basis.cocycles[0];
  auto h0 = solve_harmonic(m.c, m.g, omega, {.tol = 1e-13});
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long long> dist(-4, 4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<long long> psi(m.c.vertex_count());
    for (auto& x : psi) x = dist(rng);
    auto h1 = solve_harmonic(m.c, m.g, add(omega, vertex_coboundary(m.c, psi)), {.tol = 1e-13});
    EXPECT_LT(max_diff(h0.h, h1.h), 1e-10);
    // Zero-mean normalization moves u by a global rotation; differences are fixed mod 1.
    for (int v = 0; v < m.c.vertex_count(); v += 7) {
      double du = (h0.phase(v) - h0.phase(0)) - (h1.phase(v) - h1.phase(0));
      du -= std::round(du);
      EXPECT_LT(std::abs(du), 1e-9);
    }
  }
}

TEST(Harmonic, UniqueUnderInitialGuess) {
  Model m = product(2, 0);
  auto omega = m.basis.cocycles[2];
  auto h0 = solve_harmonic(m.c, m.g, omega, {.tol = 1e-13});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<double> guess(m.c.vertex_count());
  for (auto& x : guess) x = u(rng);
  HarmonicOptions opt{.tol = 1e-13, .initial_potential = guess};
  auto h1 = solve_harmonic(m.c, m.g, omega, opt);
  EXPECT_LT(max_diff(h0.h, h1.h), 1e-9);
  EXPECT_LT(max_diff(h0.potential, h1.potential), 1e-9);
}

TEST(Harmonic, LinearAndSubadditive) {
  Model m = product(1, 0);
  auto a = m.basis.cocycles[1], b = m.basis.cocycles[2];
  HarmonicOptions opt{.tol = 1e-13};
  auto ha = solve_harmonic(m.c, m.g, a, opt), hb = solve_harmonic(m.c, m.g, b, opt);
  auto hab = solve_harmonic(m.c, m.g, add(a, b, 3), opt);
  std::vector<double> sum(a.size());
  for (std::size_t e = 0; e < a.size(); ++e) sum[e] = ha.h[e] + 3 * hb.h[e];
  EXPECT_LT(max_diff(hab.h, sum), 1e-9);
  EXPECT_LE(harmonic_norm(hab), harmonic_norm(ha) + 3 * harmonic_norm(hb) + 1e-12);
}

TEST(Harmonic, Residuals) {
  Model m = product(0, 1);
  auto h = solve_harmonic(m.c, m.g, m.basis.cocycles[0]);
  EXPECT_LT(h.closedness_residual, 1e-12);
  EXPECT_LT(h.coclosedness_residual, 1e-9);
  EXPECT_LT(h.max_divergence, 1e-9);
}

TEST(Harmonic, PointwiseSpeedOnFlatTorus) {
  Model m = torus(3);
  auto h = solve_harmonic(m.c, m.g, cocycle_for_class(m.basis, {2, {0, 0, 1}}));
  for (double s : pointwise_speed(m.c, m.g, h.h)) EXPECT_NEAR(s, 1.0, 1e-9);
  for (double s : vertex_speed(m.c, m.g, h.h)) EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_NEAR(speed_integral(m.c, m.g, h.h), 1.0, 1e-9);
  EXPECT_LT(hessian_surrogate(m.c, m.g, h.h), 1e-20);
}

TEST(Harmonic, TetGradientOfLinearFunction) {
  // h = d(a . x) in the embedding of each tet recovers a.
  Model m = torus(2);
  Eigen::Vector3d a(0.3, -1.2, 2.5);
  for (int t = 0; t < m.c.tet_count(); ++t) {
    std::vector<double> h(m.c.edge_count(), 0.0);
    const auto& x = m.g.tets[t].corners;
    for (int i = 0; i < 6; ++i) {
      auto [p, q] = kTetEdges[i];
      h[m.c.tet_edges(t)[i]] = m.c.tet_edge_signs(t)[i] * a.dot(x[q] - x[p]);
    }
    Eigen::Vector3d grad = tet_gradient(m.c, m.g, h, t);
    EXPECT_LT((grad - a).norm(), 1e-12);
  }
}

TEST(Harmonic, HessianSurrogateVanishesOnProductsAndDecaysOnChart) {
  Model m = product(2, 0);
  auto h = solve_harmonic(m.c, m.g, m.basis.cocycles[0]);
  EXPECT_LT(hessian_surrogate(m.c, m.g, h.h), 1e-20);
  double previous = 1e300;
  for (int level : {0, 1, 2}) {
    auto c = build_surface_times_circle(0, level, 3 << level);
    auto g = regge_from_coordinates(c, round_sphere_times_circle());
    auto hc = solve_harmonic(c, g, compute_homology(c).cocycles[0]);
    double s = hessian_surrogate(c, g, hc.h);
    EXPECT_GT(s, 0);
    EXPECT_LT(s, previous / 4);
    previous = s;
  }
}

TEST(Harmonic, RejectsBadInput) {
  Model m = torus(2);
  auto omega = m.basis.cocycles[0];
  EXPECT_THROW(solve_harmonic(m.c, m.g, omega, {.tol = 1e-3}), InputError);
  EXPECT_THROW(solve_harmonic(m.c, m.g, omega, {.tol = 0}), InputError);
  IntCochain bad = omega;
  bad[0] += 1;
  EXPECT_THROW(solve_harmonic(m.c, m.g, bad), InputError);
  EXPECT_THROW(solve_harmonic(m.c, m.g, IntCochain(3, 0)), InputError);
  HarmonicOptions opt;
  opt.initial_potential = std::vector<double>(2, 0.0);
  EXPECT_THROW(solve_harmonic(m.c, m.g, omega, opt), InputError);
}

TEST(Harmonic, IndefiniteLaplacianIsReported) {
  Model m = torus(3);
  ReggeMetric bad = m.g;
  for (int e : m.c.vertex_edges(0)) bad.star_weight[e] = -1.0;
  EXPECT_THROW(solve_harmonic(m.c, bad, m.basis.cocycles[0]), NumericalError);
  // Unit weights except edge (a,b): the diagonal stays positive, but the form
  // is negative on delta_a - delta_b: 4 w_ab + S_a + S_b < 0.
  ReggeMetric subtle = m.g;
  std::fill(subtle.star_weight.begin(), subtle.star_weight.end(), 1.0);
  const int e0 = 0, va = m.c.edge(e0).a, vb = m.c.edge(e0).b;
  const double sa = static_cast<double>(m.c.vertex_edges(va).size()) - 1;
  const double sb = static_cast<double>(m.c.vertex_edges(vb).size()) - 1;
  subtle.star_weight[e0] = -(sa + sb) / 4 - 1;
  ASSERT_GT(sa + subtle.star_weight[e0], 0);
  ASSERT_GT(sb + subtle.star_weight[e0], 0);
  try {
    solve_harmonic(m.c, subtle, m.basis.cocycles[0]);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("indefinite"), std::string::npos) << e.what();
  }
}

TEST(Harmonic, NonConvergenceCarriesResidual) {
  Model m = product(0, 1);
  try {
    solve_harmonic(m.c, m.g, m.basis.cocycles[0], {.tol = 1e-12, .max_iterations = 1});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}
