#include "circlemap/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

// Angle between faces (i,j,k) and (i,j,l) along edge ij.
double dihedral_at(const std::array<Eigen::Vector3d, 4>& x, int i, int j, int k, int l) {
  Eigen::Vector3d e = (x[j] - x[i]).normalized();
  Eigen::Vector3d u = x[k] - x[i];
  Eigen::Vector3d v = x[l] - x[i];
  u -= u.dot(e) * e;
  v -= v.dot(e) * e;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

std::string lengths_str(const std::array<double, 6>& l) {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < 6; ++i) os << (i ? " " : "") << l[i];
  return os.str();
}

}  // namespace

TetGeometry embed_tet(const std::array<double, 6>& l) {
  const double l01 = l[0], l02 = l[1], l03 = l[2], l12 = l[3], l13 = l[4], l23 = l[5];
  const double scale2 = *std::max_element(l.begin(), l.end()) * *std::max_element(l.begin(), l.end());
  TetGeometry g;
  const double x2 = (l01 * l01 + l02 * l02 - l12 * l12) / (2 * l01);
  const double y2sq = l02 * l02 - x2 * x2;
  if (!(y2sq > 1e-14 * scale2))
    throw NumericalError("degenerate face in tetrahedron with lengths " + lengths_str(l));
  const double y2 = std::sqrt(y2sq);
  const double x3 = (l01 * l01 + l03 * l03 - l13 * l13) / (2 * l01);
  const double y3 = (l03 * l03 + l02 * l02 - l23 * l23 - 2 * x2 * x3) / (2 * y2);
  const double z3sq = l03 * l03 - x3 * x3 - y3 * y3;
  if (!(z3sq > 1e-14 * scale2))
    throw NumericalError("tetrahedron not realizable with lengths " + lengths_str(l));
  const double z3 = std::sqrt(z3sq);
  g.corners = {Eigen::Vector3d::Zero(), Eigen::Vector3d(l01, 0, 0), Eigen::Vector3d(x2, y2, 0),
               Eigen::Vector3d(x3, y3, z3)};
  g.volume = l01 * y2 * z3 / 6.0;
  for (int e = 0; e < 6; ++e) {
    auto [i, j] = kTetEdges[e];
    auto [k, m] = kTetEdges[kOppositeEdge[e]];
    g.dihedral[e] = dihedral_at(g.corners, i, j, k, m);
  }
  for (int e = 0; e < 6; ++e) {
    int opp = kOppositeEdge[e];
    g.stiffness[e] = l[opp] / (6.0 * std::tan(g.dihedral[opp]));
  }

  // Circumcentric duals: each face (i,j,k) through edge ij contributes a right
  // triangle with legs h_face = (l_ij/2) cot(angle at k) and h_tet = signed
  // distance from the tet circumcentre to the face (positive towards the tet).
  const auto& x = g.corners;
  Eigen::Matrix3d m;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    m.row(i) = 2.0 * x[i + 1].transpose();
    rhs(i) = x[i + 1].squaredNorm();
  }
  const Eigen::Vector3d center = m.partialPivLu().solve(rhs);
  std::array<double, 4> h_tet;  // face opposite corner i
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d& a = x[(i + 1) % 4];
    const Eigen::Vector3d& b = x[(i + 2) % 4];
    const Eigen::Vector3d& c = x[(i + 3) % 4];
    Eigen::Vector3d n = (b - a).cross(c - a).normalized();
    if (n.dot(x[i] - a) < 0) n = -n;
    h_tet[i] = (center - a).dot(n);
  }
  auto angle_at = [&](int k, int i, int j) {
    Eigen::Vector3d u = x[i] - x[k], v = x[j] - x[k];
    return std::atan2(u.cross(v).norm(), u.dot(v));
  };
  for (int e = 0; e < 6; ++e) {
    auto [i, j] = kTetEdges[e];
    auto [k, m2] = kTetEdges[kOppositeEdge[e]];
    // Face (i,j,k) is opposite corner m2 and vice versa.
    double area = 0.5 * (0.5 * l[e] / std::tan(angle_at(k, i, j))) * h_tet[m2] +
                  0.5 * (0.5 * l[e] / std::tan(angle_at(m2, i, j))) * h_tet[k];
    g.star[e] = area / l[e];
  }
  return g;
}

double cayley_menger_288v2(const std::array<double, 6>& l) {
  Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Ones();
  m(0, 0) = 0;
  for (int e = 0; e < 6; ++e) {
    auto [i, j] = kTetEdges[e];
    m(i + 1, j + 1) = m(j + 1, i + 1) = l[e] * l[e];
  }
  for (int i = 1; i < 5; ++i) m(i, i) = 0;
  return m.determinant();
}

int ReggeMetric::negative_weight_count() const {
  return static_cast<int>(
      std::count_if(star_weight.begin(), star_weight.end(), [](double w) { return w <= 0; }));
}

ReggeMetric regge_from_lengths(const SimplicialComplex3& c, std::vector<double> lengths,
                               StarKind star_kind) {
  if (static_cast<int>(lengths.size()) != c.edge_count())
    throw InputError("expected " + std::to_string(c.edge_count()) + " edge lengths, got " +
                     std::to_string(lengths.size()));
  for (std::size_t e = 0; e < lengths.size(); ++e)
    if (!(lengths[e] > 0) || !std::isfinite(lengths[e]))
      throw InputError("edge " + std::to_string(e) + " has nonpositive length");

  ReggeMetric g;
  g.lengths = std::move(lengths);
  g.star_kind = star_kind;
  const int nt = c.tet_count();
  g.tets.resize(nt);
  std::vector<CompensatedSum> edge_vol(c.edge_count()), vert_vol(c.vertex_count()),
      star(c.edge_count());
  CompensatedSum total;
  for (int t = 0; t < nt; ++t) {
    std::array<double, 6> l;
    for (int i = 0; i < 6; ++i) l[i] = g.lengths[c.tet_edges(t)[i]];
    try {
      g.tets[t] = embed_tet(l);
    } catch (const NumericalError& err) {
      throw NumericalError("tet " + std::to_string(t) + ": " + err.what());
    }
    const TetGeometry& tg = g.tets[t];
    total.add(tg.volume);
    for (int i = 0; i < 6; ++i) {
      edge_vol[c.tet_edges(t)[i]].add(tg.volume / 6.0);
      star[c.tet_edges(t)[i]].add(star_kind == StarKind::kCircumcentric ? tg.star[i]
                                                                        : tg.stiffness[i]);
    }
    for (int v : c.tets()[t]) vert_vol[v].add(tg.volume / 4.0);
  }
  g.total_volume = total.value();
  auto values = [](const std::vector<CompensatedSum>& s) {
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), [](const auto& x) { return x.value(); });
    return out;
  };
  g.edge_dual_volume = values(edge_vol);
  g.vertex_dual_volume = values(vert_vol);
  g.star_weight = values(star);
  if (int neg = g.negative_weight_count(); neg > 0)
    g.warnings.push_back(std::to_string(neg) +
                         " edges have nonpositive star weight (non-Delaunay configuration)");
  return g;
}

MetricSpec flat_metric() {
  return {"flat", [](const Eigen::Vector4d&) { return Eigen::Matrix4d::Identity().eval(); }};
}

MetricSpec conformal_flat_metric(std::function<double(const Eigen::Vector4d&)> phi) {
  return {"conformal", [phi = std::move(phi)](const Eigen::Vector4d& x) {
            return (std::exp(2 * phi(x)) * Eigen::Matrix4d::Identity()).eval();
          }};
}

MetricSpec round_sphere_times_circle(double radius) {
  if (!(radius > 0)) throw InputError("sphere radius must be positive");
  return {"round-sphere-times-circle", [radius](const Eigen::Vector4d& x) {
            Eigen::Vector3d p = x.head<3>();
            double r2 = p.squaredNorm();
            if (!(r2 > 0)) throw NumericalError("chart point at the sphere center");
            Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
            g.topLeftCorner<3, 3>() =
                radius * radius * (Eigen::Matrix3d::Identity() - p * p.transpose() / r2) / r2;
            g(3, 3) = 1.0;
            return g;
          }};
}

ReggeMetric regge_from_coordinates(const SimplicialComplex3& c, const MetricSpec& spec,
                                   StarKind star) {
  if (!c.embedding()) throw InputError("complex has no chart coordinates");
  const Embedding& emb = *c.embedding();
  static const std::array<double, 3> node{0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const std::array<double, 3> weight{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  std::vector<double> lengths(c.edge_count(), -1.0);
  for (int t = 0; t < c.tet_count(); ++t) {
    for (int i = 0; i < 6; ++i) {
      int e = c.tet_edges(t)[i];
      if (lengths[e] >= 0) continue;
      auto [a, b] = kTetEdges[i];
      Eigen::Vector4d p = emb.position(c.tets()[t][a], c.tet_shifts(t)[a]);
      Eigen::Vector4d q = emb.position(c.tets()[t][b], c.tet_shifts(t)[b]);
      Eigen::Vector4d dx = q - p;
      double len = 0;
      for (int k = 0; k < 3; ++k) {
        Eigen::Matrix4d G = spec.tensor(p + node[k] * dx);
        double speed2 = dx.dot(G * dx);
        if (!(speed2 > 0)) throw InputError("metric '" + spec.name + "' is not positive definite");
        len += weight[k] * std::sqrt(speed2);
      }
      lengths[e] = len;
    }
  }
  return regge_from_lengths(c, std::move(lengths), star);
}

ReggeMetric product_metric(const SimplicialComplex3& c, const SurfaceMesh& fiber, int layers,
                           double circle_length, StarKind star) {
  const int nf = fiber.vertex_count;
  if (c.vertex_count() != nf * layers)
    throw InputError("complex does not match fiber x circle layout");
  const double dt = circle_length / layers;
  std::vector<double> lengths(c.edge_count());
  for (int e = 0; e < c.edge_count(); ++e) {
    const EdgeKey& k = c.edge(e);
    int pa = k.a % nf, pb = k.b % nf;
    int steps = (k.b / nf - k.a / nf) + k.d[0] * layers;
    double lf = pa == pb ? 0.0 : fiber.edge_length(pa, pb);
    double lt = steps * dt;
    lengths[e] = std::sqrt(lf * lf + lt * lt);
  }
  return regge_from_lengths(c, std::move(lengths), star);
}

ReggeMetric scaled(const SimplicialComplex3& c, const ReggeMetric& g, double factor) {
  std::vector<double> lengths = g.lengths;
  for (double& l : lengths) l *= factor;
  return regge_from_lengths(c, std::move(lengths), g.star_kind);
}

CurvatureField deficit_angles(const SimplicialComplex3& c, const ReggeMetric& g) {
  std::vector<CompensatedSum> angle(c.edge_count());
  for (int t = 0; t < c.tet_count(); ++t)
    for (int i = 0; i < 6; ++i) angle[c.tet_edges(t)[i]].add(g.tets[t].dihedral[i]);

  CurvatureField f;
  f.deficit.resize(c.edge_count());
  f.edge_density.resize(c.edge_count());
  std::vector<CompensatedSum> vertex(c.vertex_count());
  CompensatedSum total;
  for (int e = 0; e < c.edge_count(); ++e) {
    CompensatedSum d;
    d.add(2 * M_PI);
    d.add(-angle[e].value());
    f.deficit[e] = d.value();
    double el = f.deficit[e] * g.lengths[e];
    f.edge_density[e] = 2 * el / g.edge_dual_volume[e];
    total.add(2 * el);
    vertex[c.edge(e).a].add(el);
    vertex[c.edge(e).b].add(el);
  }
  f.total = total.value();
  f.vertex_density.resize(c.vertex_count());
  for (int v = 0; v < c.vertex_count(); ++v)
    f.vertex_density[v] = vertex[v].value() / g.vertex_dual_volume[v];
  return f;
}

ScalarStats scalar_stats(const CurvatureField& field, const ReggeMetric& g) {
  ScalarStats s;
  s.min_r = *std::min_element(field.vertex_density.begin(), field.vertex_density.end());
  CompensatedSum neg, integral;
  for (std::size_t v = 0; v < field.vertex_density.size(); ++v) {
    double r = field.vertex_density[v];
    double rm = std::min(0.0, r);
    neg.add(rm * rm * g.vertex_dual_volume[v]);
    integral.add(r * g.vertex_dual_volume[v]);
  }
  s.negative_l2 = std::sqrt(neg.value());
  s.integral = integral.value();
  return s;
}

const std::vector<double>& star_weights(const ReggeMetric& g) { return g.star_weight; }

}  // namespace circlemap
