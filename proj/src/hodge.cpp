#include "circlemap/hodge.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

SparseMatrix weighted_laplacian(const SimplicialComplex3& c, const std::vector<double>& w) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * c.edge_count());
  for (int e = 0; e < c.edge_count(); ++e) {
    int a = c.edge(e).a, b = c.edge(e).b;
    trip.emplace_back(a, a, w[e]);
    trip.emplace_back(b, b, w[e]);
    trip.emplace_back(a, b, -w[e]);
    trip.emplace_back(b, a, -w[e]);
  }
  SparseMatrix L(c.vertex_count(), c.vertex_count());
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

// d^T W x on vertices.
Eigen::VectorXd weighted_divergence(const SimplicialComplex3& c, const std::vector<double>& w,
                                    const std::vector<double>& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.vertex_count());
  for (int e = 0; e < c.edge_count(); ++e) {
    double flux = w[e] * x[e];
    out(c.edge(e).a) -= flux;
    out(c.edge(e).b) += flux;
  }
  return out;
}

// Sylvester: the Laplacian with one vertex pinned must be positive definite.
void check_definite(const SparseMatrix& L) {
  const int n = static_cast<int>(L.rows());
  if (n <= 1) return;
  SparseMatrix pinned = L.bottomRightCorner(n - 1, n - 1);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(pinned);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("weighted Laplacian factorization failed");
  const Eigen::VectorXd d = ldlt.vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) <= 1e-13 * scale) {
      std::ostringstream os;
      os << "weighted Laplacian is indefinite (negative star weights; pivot " << d(i)
         << "); use finite-element weights or refine the mesh";
      throw NumericalError(os.str());
    }
  }
}

}  // namespace

double HarmonicOneForm::phase(int v) const {
  double u = -potential[v];
  return u - std::floor(u);
}

HarmonicOneForm solve_harmonic(const SimplicialComplex3& c, const ReggeMetric& g,
                               const IntCochain& omega, const HarmonicOptions& options) {
  if (!(options.tol > 0 && options.tol <= 1e-4))
    throw InputError("solver tolerance must lie in (0, 1e-4]");
  if (static_cast<int>(omega.size()) != c.edge_count())
    throw InputError("cochain has wrong length");
  for (long long x : coboundary(c, omega))
    if (x != 0) throw InputError("omega is not closed");
  const std::vector<double>& w = g.star_weight;
  const int nv = c.vertex_count();

  SparseMatrix L = weighted_laplacian(c, w);
  for (int v = 0; v < nv; ++v)
    if (!(L.coeff(v, v) > 0))
      throw NumericalError("weighted Laplacian is indefinite: nonpositive diagonal at vertex " +
                           std::to_string(v));
  if (options.certify_definite && g.negative_weight_count() > 0) check_definite(L);

  std::vector<double> omega_real(omega.begin(), omega.end());
  const Eigen::VectorXd rhs = weighted_divergence(c, w, omega_real);

  HarmonicOneForm out;
  out.omega = omega;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(nv);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(options.tol);
    cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations : 10 * nv + 1000);
    cg.compute(L);
    Eigen::VectorXd guess = Eigen::VectorXd::Zero(nv);
    if (options.initial_potential) {
      if (static_cast<int>(options.initial_potential->size()) != nv)
        throw InputError("initial potential has wrong length");
      guess = Eigen::Map<const Eigen::VectorXd>(options.initial_potential->data(), nv);
    }
    phi = cg.solveWithGuess(rhs, guess);
    out.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success) {
      std::ostringstream os;
      os << "harmonic solve did not converge after " << cg.iterations()
         << " iterations (relative residual " << cg.error() << ")";
      throw NumericalError(os.str());
    }
  }
  phi.array() -= phi.mean();
  out.potential.assign(phi.data(), phi.data() + nv);

  out.h.resize(c.edge_count());
  CompensatedSum energy;
  for (int e = 0; e < c.edge_count(); ++e) {
    out.h[e] = static_cast<double>(omega[e]) - (phi(c.edge(e).b) - phi(c.edge(e).a));
    energy.add(w[e] * out.h[e] * out.h[e]);
  }
  out.energy = energy.value();

  for (double x : coboundary(c, out.h))
    out.closedness_residual = std::max(out.closedness_residual, std::abs(x));
  Eigen::VectorXd div = weighted_divergence(c, w, out.h);
  out.max_divergence = div.cwiseAbs().maxCoeff();
  out.coclosedness_residual = rhs_norm > 0 ? div.norm() / rhs_norm : div.norm();
  return out;
}

double harmonic_norm(const HarmonicOneForm& form) { return std::sqrt(std::max(0.0, form.energy)); }

double cochain_energy(const ReggeMetric& g, const Cochain1& x) {
  CompensatedSum s;
  for (std::size_t e = 0; e < x.size(); ++e) s.add(g.star_weight[e] * x[e] * x[e]);
  return s.value();
}

std::array<double, 4> tet_lift(const SimplicialComplex3& c, const Cochain1& h, int t) {
  std::array<double, 4> f{0.0, 0.0, 0.0, 0.0};
  for (int i = 1; i < 4; ++i) f[i] = c.tet_edge_signs(t)[i - 1] * h[c.tet_edges(t)[i - 1]];
  return f;
}

Eigen::Vector3d tet_gradient(const SimplicialComplex3& c, const ReggeMetric& g, const Cochain1& h,
                             int t) {
  const auto f = tet_lift(c, h, t);
  const auto& x = g.tets[t].corners;
  Eigen::Matrix3d m;
  Eigen::Vector3d df;
  for (int i = 0; i < 3; ++i) {
    m.row(i) = (x[i + 1] - x[0]).transpose();
    df(i) = f[i + 1] - f[0];
  }
  return m.partialPivLu().solve(df);
}

std::vector<double> pointwise_speed(const SimplicialComplex3& c, const ReggeMetric& g,
                                    const Cochain1& h) {
  std::vector<double> s(c.tet_count());
  for (int t = 0; t < c.tet_count(); ++t) s[t] = tet_gradient(c, g, h, t).norm();
  return s;
}

double speed_integral(const SimplicialComplex3& c, const ReggeMetric& g, const Cochain1& h) {
  CompensatedSum s;
  for (int t = 0; t < c.tet_count(); ++t)
    s.add(tet_gradient(c, g, h, t).norm() * g.tets[t].volume);
  return s.value();
}

std::vector<double> vertex_speed(const SimplicialComplex3& c, const ReggeMetric& g,
                                 const Cochain1& h) {
  std::vector<CompensatedSum> num(c.vertex_count()), den(c.vertex_count());
  for (int t = 0; t < c.tet_count(); ++t) {
    double s = tet_gradient(c, g, h, t).norm();
    double vol = g.tets[t].volume;
    for (int v : c.tets()[t]) {
      num[v].add(s * vol);
      den[v].add(vol);
    }
  }
  std::vector<double> out(c.vertex_count());
  for (int v = 0; v < c.vertex_count(); ++v) out[v] = num[v].value() / den[v].value();
  return out;
}

double hessian_surrogate(const SimplicialComplex3& c, const ReggeMetric& g, const Cochain1& h) {
  std::vector<double> normal_sum(c.face_count(), 0.0), volume(c.face_count(), 0.0),
      area(c.face_count(), 0.0);
  for (int t = 0; t < c.tet_count(); ++t) {
    const Eigen::Vector3d grad = tet_gradient(c, g, h, t);
    const auto& x = g.tets[t].corners;
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d& a = x[(i + 1) % 4];
      const Eigen::Vector3d& b = x[(i + 2) % 4];
      const Eigen::Vector3d& d = x[(i + 3) % 4];
      Eigen::Vector3d n = (b - a).cross(d - a);
      const double twice_area = n.norm();
      n /= twice_area;
      if (n.dot(a - x[i]) < 0) n = -n;  // outward
      int f = c.tet_faces(t)[i];
      normal_sum[f] += grad.dot(n);
      volume[f] += g.tets[t].volume;
      area[f] = 0.5 * twice_area;
    }
  }
  CompensatedSum s;
  for (int f = 0; f < c.face_count(); ++f) {
    double jump = normal_sum[f];
    s.add(jump * jump * area[f] * area[f] / volume[f]);
  }
  return s.value();
}

}  // namespace circlemap
