#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <random>

#include "circlemap/error.hpp"
#include "circlemap/metric.hpp"

using namespace circlemap;

namespace {

std::array<double, 6> tet_lengths(const std::array<Eigen::Vector3d, 4>& x) {
  std::array<double, 6> l;
  for (int e = 0; e < 6; ++e) l[e] = (x[kTetEdges[e][1]] - x[kTetEdges[e][0]]).norm();
  return l;
}

Eigen::Vector3d triangle_circumcenter(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                      const Eigen::Vector3d& c) {
  Eigen::Vector3d u = b - a, v = c - a, n = u.cross(v);
  return a + (u.squaredNorm() * v - v.squaredNorm() * u).cross(n) / (2 * n.squaredNorm());
}

Eigen::Vector3d tet_circumcenter(const std::array<Eigen::Vector3d, 4>& x) {
  Eigen::Matrix3d m;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    m.row(i) = 2 * (x[i + 1] - x[0]).transpose();
    rhs(i) = x[i + 1].squaredNorm() - x[0].squaredNorm();
  }
  return m.fullPivLu().solve(rhs);
}

// Circumcentric dual area of local edge (i,j) inside the tet divided by its
// length. Each face (i,j,k) contributes the right triangle midpoint -> face
// centre -> tet centre with signed legs.
double brute_force_star(const std::array<Eigen::Vector3d, 4>& x, int e) {
  auto [i, j] = kTetEdges[e];
  auto [k, l] = kTetEdges[kOppositeEdge[e]];
  const Eigen::Vector3d ct = tet_circumcenter(x);
  const Eigen::Vector3d dir = (x[j] - x[i]).normalized();
  auto kite = [&](int third, int apex) {
    Eigen::Vector3d cf = triangle_circumcenter(x[i], x[j], x[third]);
    Eigen::Vector3d in_face = x[third] - x[i];
    in_face -= in_face.dot(dir) * dir;
    double h_face = (cf - x[i]).dot(in_face.normalized());
    Eigen::Vector3d normal = (x[j] - x[i]).cross(x[third] - x[i]).normalized();
    if (normal.dot(x[apex] - x[i]) < 0) normal = -normal;
    double h_tet = (ct - cf).dot(normal);
    return 0.5 * h_face * h_tet;
  };
  return (kite(k, l) + kite(l, k)) / (x[j] - x[i]).norm();
}

}  // namespace

TEST(EmbedTet, RegularTetrahedron) {
  std::array<double, 6> l;
  l.fill(2.0);
  auto g = embed_tet(l);
  EXPECT_NEAR(g.volume, 8.0 / (6 * std::sqrt(2.0)), 1e-14);
  for (double a : g.dihedral) EXPECT_NEAR(a, std::acos(1.0 / 3.0), 1e-14);
  for (double w : g.star) EXPECT_NEAR(w, g.star[0], 1e-15);
  EXPECT_NEAR(cayley_menger_288v2(l), 288 * g.volume * g.volume, 1e-11);
}

TEST(EmbedTet, ReproducesLengthsAndOrientation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<Eigen::Vector3d, 4> x;
    for (auto& p : x) p = Eigen::Vector3d(coord(rng), coord(rng), coord(rng));
    Eigen::Matrix3d m;
    for (int s = 0; s < 3; ++s) m.col(s) = x[s + 1] - x[0];
    double vol = m.determinant() / 6;
    if (std::abs(vol) < 1e-3) continue;
    auto g = embed_tet(tet_lengths(x));
    EXPECT_NEAR(g.volume, std::abs(vol), 1e-12);
    auto l = tet_lengths(g.corners);
    auto want = tet_lengths(x);
    for (int e = 0; e < 6; ++e) EXPECT_NEAR(l[e], want[e], 1e-12);
    Eigen::Matrix3d mg;
    for (int s = 0; s < 3; ++s) mg.col(s) = g.corners[s + 1] - g.corners[0];
    EXPECT_GT(mg.determinant(), 0);
    EXPECT_NEAR(cayley_menger_288v2(want), 288 * vol * vol, 1e-10);
    for (double a : g.dihedral) {
      EXPECT_GT(a, 0);
      EXPECT_LT(a, M_PI);
    }
  }
}

TEST(EmbedTet, RejectsNonRealizable) {
  EXPECT_THROW(embed_tet({1, 1, 1, 1, 1, 2.5}), NumericalError);
  EXPECT_THROW(embed_tet({1, 1, 3, 1, 1, 1}), NumericalError);
  EXPECT_LT(cayley_menger_288v2({1, 1, 1, 1, 1, 1.99}), 0);
}

TEST(StarWeights, MatchBruteForceCircumcentricDual) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  const std::array<Eigen::Vector3d, 4> regular{
      Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, -1, -1), Eigen::Vector3d(-1, 1, -1),
      Eigen::Vector3d(-1, -1, 1)};
  for (int trial = 0; trial < 50; ++trial) {
    auto x = regular;
    for (auto& p : x) p += Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
    Eigen::Matrix3d m;
    for (int s = 0; s < 3; ++s) m.col(s) = x[s + 1] - x[0];
    if (m.determinant() < 0) std::swap(x[2], x[3]);
    auto g = embed_tet(tet_lengths(x));
    double sum = 0, sum_fe = 0;
    for (int e = 0; e < 6; ++e) {
      EXPECT_NEAR(g.star[e], brute_force_star(x, e), 1e-12) << "edge " << e;
      sum += g.star[e] * tet_lengths(x)[e] * tet_lengths(x)[e];
      sum_fe += g.stiffness[e] * tet_lengths(x)[e] * tet_lengths(x)[e];
    }
    EXPECT_NEAR(sum, 3 * g.volume, 1e-12);
    EXPECT_NEAR(sum_fe, 3 * g.volume, 1e-12);
  }
}

TEST(StarWeights, StiffnessMatchesBarycentricGradients) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coord(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<Eigen::Vector3d, 4> x;
    for (auto& p : x) p = Eigen::Vector3d(coord(rng), coord(rng), coord(rng));
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i) a.row(i) << 1.0, x[i].transpose();
    double vol = std::abs(a.determinant()) / 6;
    if (vol < 1e-2) continue;
    Eigen::Matrix4d grads = a.inverse();  // rows 1..3 of column i: gradient of phi_i
    auto g = embed_tet(tet_lengths(x));
    for (int e = 0; e < 6; ++e) {
      auto [i, j] = kTetEdges[e];
      double want = -vol * grads.col(i).tail<3>().dot(grads.col(j).tail<3>());
      EXPECT_NEAR(g.stiffness[e], want, 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(StarWeights, StarEnergyIsThreeVolumes) {
  std::vector<std::pair<SimplicialComplex3, ReggeMetric>> meshes;
  for (int n : {2, 3}) {
    auto c = build_three_torus(n);
    meshes.emplace_back(c, regge_from_coordinates(c, flat_metric()));
  }
  {
    auto c = build_surface_times_circle(0, 1, 6);
    meshes.emplace_back(c, regge_from_coordinates(c, round_sphere_times_circle()));
  }
  {
    auto fiber = build_hyperbolic_surface(2, 3);
    auto c = build_surface_times_circle(fiber, 4);
    meshes.emplace_back(c, product_metric(c, fiber, 4));
  }
  {
    auto c = build_surface_times_circle(0, 1, 6);
    meshes.emplace_back(
        c, regge_from_coordinates(c, round_sphere_times_circle(), StarKind::kFiniteElement));
  }
  for (const auto& [c, g] : meshes) {
    double sum = 0;
    for (int e = 0; e < c.edge_count(); ++e)
      sum += star_weights(g)[e] * g.lengths[e] * g.lengths[e];
    EXPECT_NEAR(sum, 3 * g.total_volume, 1e-10 * g.total_volume);
  }
}

TEST(DualVolumes, PartitionTotalVolume) {
  auto c = build_surface_times_circle(0, 1, 5);
  auto g = regge_from_coordinates(c, round_sphere_times_circle());
  double ev = 0, vv = 0;
  for (double v : g.edge_dual_volume) {
    EXPECT_GT(v, 0);
    ev += v;
  }
  for (double v : g.vertex_dual_volume) {
    EXPECT_GT(v, 0);
    vv += v;
  }
  EXPECT_NEAR(ev, g.total_volume, 1e-10);
  EXPECT_NEAR(vv, g.total_volume, 1e-10);
}

TEST(FlatTorus, LengthsAndZeroDeficits) {
  for (int n : {2, 3, 4}) {
    auto c = build_three_torus(n);
    auto g = regge_from_coordinates(c, flat_metric());
    for (int e = 0; e < c.edge_count(); ++e) {
      const auto& k = c.edge(e);
      const auto& emb = *c.embedding();
      Eigen::Vector4d d = emb.position(k.b, k.d) - emb.position(k.a, {0, 0, 0});
      int axes = (std::abs(d(0)) > 1e-12) + (std::abs(d(1)) > 1e-12) + (std::abs(d(2)) > 1e-12);
      EXPECT_NEAR(g.lengths[e], std::sqrt(static_cast<double>(axes)) / n, 1e-15);
    }
    EXPECT_NEAR(g.total_volume, 1.0, 1e-12);
    auto f = deficit_angles(c, g);
    for (double eps : f.deficit) EXPECT_LE(std::abs(eps), 1e-12);
    auto s = scalar_stats(f, g);
    EXPECT_NEAR(s.min_r, 0, 1e-10);
    EXPECT_NEAR(s.negative_l2, 0, 1e-10);
    EXPECT_NEAR(s.integral, 0, 1e-10);
  }
}

TEST(SphereTimesCircle, CircleEdgesHaveLengthOneOverM) {
  const int m = 5;
  auto c = build_surface_times_circle(0, 1, m);
  auto g = regge_from_coordinates(c, round_sphere_times_circle());
  const int nf = 42;
  int vertical = 0;
  for (int e = 0; e < c.edge_count(); ++e) {
    if (c.edge(e).a % nf != c.edge(e).b % nf) continue;
    ++vertical;
    EXPECT_NEAR(g.lengths[e], 1.0 / m, 1e-15);
  }
  EXPECT_EQ(vertical, nf * m);
}

TEST(SphereTimesCircle, TotalCurvatureAndMinR) {
  // Smooth value: R = 2 on S^2(1) x S^1 of length 1, so the integral is 8 pi.
  double previous_error = INFINITY;
  for (int level : {0, 1, 2}) {
    const int m = 3 << level;
    auto c = build_surface_times_circle(0, level, m);
    auto g = regge_from_coordinates(c, round_sphere_times_circle());
    auto f = deficit_angles(c, g);
    auto s = scalar_stats(f, g);
    // Chart lengths are only approximately a product, so the total is close to
    // but not exactly the fiber Gauss-Bonnet value.
    EXPECT_NEAR(f.total, 8 * M_PI, 1e-4);
    EXPECT_NEAR(s.integral, f.total, 1e-9);
    auto fiber = build_icosphere(level);
    EXPECT_NEAR(deficit_angles(c, product_metric(c, fiber, m)).total, 8 * M_PI, 1e-9);
    double error = std::abs(s.min_r - 2.0);
    EXPECT_LT(error, previous_error);
    previous_error = error;
  }
  EXPECT_LT(previous_error, 0.05 * 2);
}

TEST(ConformalMetric, QuadratureMatchesDenseSampling) {
  auto phi = [](const Eigen::Vector4d& x) {
    return 0.1 * std::sin(2 * M_PI * x(0)) * std::cos(2 * M_PI * x(1)) +
           0.05 * std::cos(2 * M_PI * x(2));
  };
  // Worst relative deviation from e^{phi(midpoint)} * chart length.
  auto midpoint_deviation = [&](int n, bool check_dense) {
    auto c = build_three_torus(n);
    auto g = regge_from_coordinates(c, conformal_flat_metric(phi));
    const auto& emb = *c.embedding();
    double worst = 0;
    for (int e = 0; e < c.edge_count(); ++e) {
      const auto& k = c.edge(e);
      Eigen::Vector4d p = emb.position(k.a, {0, 0, 0}), q = emb.position(k.b, k.d);
      if (check_dense) {
        const int samples = 20000;
        double dense = 0;
        for (int i = 0; i < samples; ++i)
          dense += std::exp(phi(p + (i + 0.5) / samples * (q - p)));
        dense *= (q - p).norm() / samples;
        // Three-point Gauss-Legendre error is O(h^6) in the variation of e^phi.
        EXPECT_NEAR(g.lengths[e], dense, 1e-4 * dense);
      }
      double mid = std::exp(phi(0.5 * (p + q))) * (q - p).norm();
      worst = std::max(worst, std::abs(g.lengths[e] / mid - 1));
    }
    return worst;
  };
  double coarse = midpoint_deviation(4, true);
  double fine = midpoint_deviation(8, false);
  EXPECT_LT(coarse, 0.05);
  EXPECT_GT(coarse / fine, 3.0);  // second order
}

TEST(Curvature, ScalingLaw) {
  auto c = build_surface_times_circle(2, 0, 3);
  auto fiber = build_hyperbolic_surface(2, 3);
  auto g = product_metric(c, fiber, 3);
  const double lambda = 1.7;
  auto gs = scaled(c, g, lambda);
  auto f = deficit_angles(c, g), fs = deficit_angles(c, gs);
  for (int e = 0; e < c.edge_count(); ++e) EXPECT_NEAR(fs.deficit[e], f.deficit[e], 1e-12);
  auto s = scalar_stats(f, g), ss = scalar_stats(fs, gs);
  EXPECT_NEAR(ss.integral, lambda * s.integral, 1e-12 * std::abs(s.integral));
  EXPECT_NEAR(ss.negative_l2, std::pow(lambda, -0.5) * s.negative_l2, 1e-12 * s.negative_l2);
  EXPECT_NEAR(ss.min_r, s.min_r / (lambda * lambda), 1e-12 * std::abs(s.min_r));
}

TEST(Curvature, LocalPerturbation) {
  auto c = build_three_torus(3);
  auto g = regge_from_coordinates(c, flat_metric());
  auto lengths = g.lengths;
  const int edge = 10;
  lengths[edge] *= 1.01;
  auto f = deficit_angles(c, regge_from_lengths(c, lengths));
  std::vector<char> touched(c.edge_count(), 0);
  for (int t : c.edge_tets(edge))
    for (int e : c.tet_edges(t)) touched[e] = 1;
  int nonzero = 0;
  for (int e = 0; e < c.edge_count(); ++e) {
    if (!touched[e]) {
      EXPECT_LE(std::abs(f.deficit[e]), 1e-12);
    } else if (std::abs(f.deficit[e]) > 1e-8) {
      ++nonzero;
    }
  }
  EXPECT_GT(nonzero, 0);
}

TEST(Curvature, ConstantNegativeField) {
  auto c = build_three_torus(2);
  auto g = regge_from_coordinates(c, flat_metric());
  CurvatureField f;
  f.vertex_density.assign(c.vertex_count(), -2.0);
  auto s = scalar_stats(f, g);
  EXPECT_NEAR(s.negative_l2, 2 * std::sqrt(g.total_volume), 1e-12);
  EXPECT_DOUBLE_EQ(s.min_r, -2.0);
}

TEST(Curvature, HyperbolicProductGaussBonnet) {
  for (int k : {3, 6}) {
    auto fiber = build_hyperbolic_surface(2, k);
    auto c = build_surface_times_circle(fiber, 3);
    auto g = product_metric(c, fiber, 3);
    auto f = deficit_angles(c, g);
    // Discrete Gauss-Bonnet on the fiber times the circle length.
    EXPECT_NEAR(f.total, 2 * 2 * M_PI * (-2), 1e-9);
  }
}

TEST(Regge, RejectsBadInput) {
  auto c = build_three_torus(2);
  EXPECT_THROW(regge_from_lengths(c, std::vector<double>(3, 1.0)), InputError);
  std::vector<double> l(c.edge_count(), 1.0);
  l[0] = -1;
  EXPECT_THROW(regge_from_lengths(c, l), InputError);
  l.assign(c.edge_count(), 1.0);
  l[c.tet_edges(0)[0]] = 10.0;
  EXPECT_THROW(regge_from_lengths(c, l), NumericalError);
  EXPECT_THROW(regge_from_coordinates(build_surface_times_circle(2, 0, 3), flat_metric()),
               InputError);
}
