#include "circlemap/fibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

double wrap01(double x) { return x - std::floor(x); }

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void join(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

// Corner values of the lift on tet t, each congruent to its vertex phase mod 1.
// Returns the integer offsets m_i with f_i = u_{v_i} + m_i.
std::array<long long, 4> tet_offsets(const SimplicialComplex3& c, const HarmonicOneForm& form,
                                     const std::vector<double>& phase, int t) {
  const auto lift = tet_lift(c, form.h, t);
  const auto& v = c.tets()[t];
  std::array<long long, 4> m{0, 0, 0, 0};
  for (int i = 1; i < 4; ++i) m[i] = std::llround(phase[v[0]] + lift[i] - phase[v[i]]);
  return m;
}

double lift_span(const HarmonicOneForm& form, const SimplicialComplex3& c, int t) {
  const auto f = tet_lift(c, form.h, t);
  auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  return *hi - *lo;
}

}  // namespace

int LevelSurface::euler_characteristic() const {
  int chi = 0;
  for (const auto& comp : components) chi += comp.euler_characteristic;
  return chi;
}

double LevelSurface::area() const {
  double a = 0.0;
  for (const auto& comp : components) a += comp.area;
  return a;
}

double regularity_guard(const SimplicialComplex3& c, const HarmonicOneForm& form) {
  double span = 0.0;
  for (int t = 0; t < c.tet_count(); ++t) span = std::max(span, lift_span(form, c, t));
  return 1e-9 * std::max(span, 1e-300);
}

LevelSurface extract_level(const SimplicialComplex3& c, const ReggeMetric& g,
                           const HarmonicOneForm& form, double theta,
                           const std::vector<IntChain>* cycles) {
  if (static_cast<int>(form.h.size()) != c.edge_count() ||
      static_cast<int>(form.potential.size()) != c.vertex_count())
    throw InputError("harmonic form does not match the complex");
  if (!std::isfinite(theta)) throw InputError("level must be finite");
  theta = wrap01(theta);

  std::vector<double> phase(c.vertex_count());
  for (int v = 0; v < c.vertex_count(); ++v) phase[v] = form.phase(v);

  const double guard = regularity_guard(c, form);
  for (int v = 0; v < c.vertex_count(); ++v) {
    double d = phase[v] - theta;
    d -= std::round(d);
    if (std::abs(d) < guard) {
      std::ostringstream os;
      os.precision(12);
      os << "level " << theta << " is within " << guard << " of the value at vertex " << v
         << "; try " << wrap01(theta + 3 * guard);
      throw CriticalLevelError(os.str(), wrap01(theta + 3 * guard));
    }
  }

  LevelSurface out;
  out.theta = theta;
  std::map<std::pair<int, long long>, int> vertex_id;

  for (int t = 0; t < c.tet_count(); ++t) {
    const auto& v = c.tets()[t];
    const auto m = tet_offsets(c, form, phase, t);
    std::array<double, 4> f;
    for (int i = 0; i < 4; ++i) f[i] = phase[v[i]] + static_cast<double>(m[i]);
    const double lo = *std::min_element(f.begin(), f.end());
    const double hi = *std::max_element(f.begin(), f.end());
    const auto& x = g.tets[t].corners;

    for (long long k = static_cast<long long>(std::ceil(lo - theta));
         static_cast<double>(k) + theta < hi; ++k) {
      const double level = theta + static_cast<double>(k);
      if (level <= lo) continue;
      std::vector<int> below, above;
      for (int i = 0; i < 4; ++i) (f[i] < level ? below : above).push_back(i);
      if (below.empty() || above.empty()) continue;

      // Crossing on local edge (p, q) with f_p < level < f_q.
      auto crossing = [&](int p, int q, Eigen::Vector3d& point) {
        int local = 0;
        while (!((kTetEdges[local][0] == std::min(p, q)) && (kTetEdges[local][1] == std::max(p, q))))
          ++local;
        const int e = c.tet_edges(t)[local];
        const int sign = c.tet_edge_signs(t)[local];
        const int start = sign > 0 ? kTetEdges[local][0] : kTetEdges[local][1];
        const int end = sign > 0 ? kTetEdges[local][1] : kTetEdges[local][0];
        const long long index = k - m[start];
        const double s = (level - f[start]) / (f[end] - f[start]);
        point = x[start] + s * (x[end] - x[start]);
        auto [it, inserted] =
            vertex_id.emplace(std::make_pair(e, index), static_cast<int>(out.vertices.size()));
        if (inserted) out.vertices.push_back({e, static_cast<int>(index), s});
        return it->second;
      };

      std::vector<std::pair<int, Eigen::Vector3d>> ring;
      Eigen::Vector3d point;
      if (below.size() == 1 || above.size() == 1) {
        const bool lone_below = below.size() == 1;
        const int lone = lone_below ? below[0] : above[0];
        for (int other : lone_below ? above : below) {
          int id = lone_below ? crossing(lone, other, point) : crossing(other, lone, point);
          ring.emplace_back(id, point);
        }
      } else {
        // Quad b0-a0, b0-a1, b1-a1, b1-a0 in cyclic order.
        const int b0 = below[0], b1 = below[1], a0 = above[0], a1 = above[1];
        for (auto [p, q] : {std::pair{b0, a0}, {b0, a1}, {b1, a1}, {b1, a0}}) {
          int id = crossing(p, q, point);
          ring.emplace_back(id, point);
        }
      }
      const Eigen::Vector3d up = x[above[0]];
      auto emit = [&](int i0, int i1, int i2) {
        std::array<int, 3> tri{ring[i0].first, ring[i1].first, ring[i2].first};
        Eigen::Vector3d n =
            (ring[i1].second - ring[i0].second).cross(ring[i2].second - ring[i0].second);
        if (n.dot(up - ring[i0].second) < 0) std::swap(tri[1], tri[2]);
        out.triangles.push_back(tri);
        out.triangle_tet.push_back(t);
        out.triangle_area.push_back(0.5 * n.norm());
      };
      emit(0, 1, 2);
      if (ring.size() == 4) emit(0, 2, 3);
    }
  }

  // Closedness and orientation: every undirected edge twice, once each way.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge_use;
  for (int tr = 0; tr < static_cast<int>(out.triangles.size()); ++tr) {
    const auto& tri = out.triangles[tr];
    for (int i = 0; i < 3; ++i) {
      int a = tri[i], b = tri[(i + 1) % 3];
      edge_use[{std::min(a, b), std::max(a, b)}].emplace_back(tr, a < b ? 1 : -1);
    }
  }
  UnionFind uf(static_cast<int>(out.triangles.size()));
  for (const auto& [key, uses] : edge_use) {
    if (uses.size() != 2 || uses[0].second == uses[1].second) {
      std::ostringstream os;
      os << "level surface at " << theta << " is not a closed oriented surface near crossing "
         << "vertices " << key.first << ", " << key.second << " (" << uses.size() << " triangles)";
      throw InvariantError(os.str());
    }
    uf.join(uses[0].first, uses[1].first);
  }

  std::map<int, int> label;
  out.triangle_component.resize(out.triangles.size());
  for (int tr = 0; tr < static_cast<int>(out.triangles.size()); ++tr) {
    auto [it, inserted] = label.emplace(uf.find(tr), static_cast<int>(label.size()));
    out.triangle_component[tr] = it->second;
  }
  out.components.resize(label.size());
  std::vector<int> vertex_component(out.vertices.size(), -1);
  for (int tr = 0; tr < static_cast<int>(out.triangles.size()); ++tr) {
    auto& comp = out.components[out.triangle_component[tr]];
    ++comp.triangles;
    comp.area += out.triangle_area[tr];
    for (int v : out.triangles[tr]) vertex_component[v] = out.triangle_component[tr];
  }
  for (const auto& [key, uses] : edge_use) ++out.components[out.triangle_component[uses[0].first]].edges;
  for (int v = 0; v < static_cast<int>(out.vertices.size()); ++v)
    ++out.components[vertex_component[v]].vertices;
  for (auto& comp : out.components) {
    comp.euler_characteristic = comp.vertices - comp.edges + comp.triangles;
    if (cycles) comp.cycle_pairings.assign(cycles->size(), 0);
  }
  if (cycles) {
    for (int v = 0; v < static_cast<int>(out.vertices.size()); ++v) {
      const int e = out.vertices[v].edge;
      const long long sign = form.h[e] > 0 ? 1 : -1;
      auto& pairs = out.components[vertex_component[v]].cycle_pairings;
      for (std::size_t j = 0; j < cycles->size(); ++j) pairs[j] += sign * (*cycles)[j][e];
    }
  }
  return out;
}

int chi_minus(const std::vector<SurfaceComponent>& components) {
  int s = 0;
  for (const auto& comp : components) s += std::max(0, -comp.euler_characteristic);
  return s;
}

int chi_minus(const LevelSurface& s) { return chi_minus(s.components); }

SweepTable sweep(const SimplicialComplex3& c, const ReggeMetric& g, const HarmonicOneForm& form,
                 const SweepOptions& options) {
  if (options.levels < 8) throw InputError("sweep needs at least 8 levels");
  const int K = options.levels;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double guard = regularity_guard(c, form);

  SweepTable table;
  for (int i = 0; i < K; ++i) {
    double theta = (i + unit(rng)) / K;
    bool done = false, perturbed = false;
    for (int attempt = 0; attempt < 4 && !done; ++attempt) {
      try {
        LevelSurface s = extract_level(c, g, form, theta, options.cycles);
        SweepSample sample;
        sample.theta = s.theta;
        sample.euler_characteristic = s.euler_characteristic();
        sample.area = s.area();
        sample.chi_minus = chi_minus(s);
        sample.perturbed = perturbed;
        sample.components = std::move(s.components);
        table.samples.push_back(std::move(sample));
        done = true;
      } catch (const CriticalLevelError&) {
        theta = wrap01(theta + 3 * guard);
        perturbed = true;
      }
    }
    if (!done) ++table.rejected;
  }
  if (10 * table.rejected > K) {
    std::ostringstream os;
    os << table.rejected << " of " << K
       << " sampled levels were near-critical; increase the level count";
    throw NumericalError(os.str());
  }
  std::sort(table.samples.begin(), table.samples.end(),
            [](const SweepSample& a, const SweepSample& b) { return a.theta < b.theta; });

  auto estimate = [&](auto value) {
    const double n = static_cast<double>(table.samples.size());
    CompensatedSum s;
    for (const auto& x : table.samples) s.add(value(x));
    Estimate e;
    e.mean = s.value() / n;
    CompensatedSum v;
    for (const auto& x : table.samples) v.add((value(x) - e.mean) * (value(x) - e.mean));
    e.standard_error = n > 1 ? std::sqrt(v.value() / (n - 1) / n) : 0.0;
    return e;
  };
  table.chi = estimate([](const SweepSample& x) { return double(x.euler_characteristic); });
  table.area = estimate([](const SweepSample& x) { return x.area; });
  table.components = estimate([](const SweepSample& x) { return double(x.components.size()); });
  return table;
}

void write_off(std::ostream& out, const SimplicialComplex3& c, const LevelSurface& s) {
  if (!c.embedding()) throw InputError("surface export needs a complex with chart coordinates");
  const Embedding& emb = *c.embedding();
  out << "OFF\n" << 3 * s.triangles.size() << ' ' << s.triangles.size() << " 0\n";
  for (std::size_t tr = 0; tr < s.triangles.size(); ++tr) {
    const int t = s.triangle_tet[tr];
    for (int v : s.triangles[tr]) {
      const CrossingVertex& cv = s.vertices[v];
      int local = 0;
      while (c.tet_edges(t)[local] != cv.edge) ++local;
      int p = kTetEdges[local][0], q = kTetEdges[local][1];
      if (c.tet_edge_signs(t)[local] < 0) std::swap(p, q);
      const Eigen::Vector4d xp = emb.position(c.tets()[t][p], c.tet_shifts(t)[p]);
      const Eigen::Vector4d xq = emb.position(c.tets()[t][q], c.tet_shifts(t)[q]);
      const Eigen::Vector4d x = xp + cv.s * (xq - xp);
      out << x(0) << ' ' << x(1) << ' ' << x(2) << '\n';
    }
  }
  for (std::size_t tr = 0; tr < s.triangles.size(); ++tr)
    out << "3 " << 3 * tr << ' ' << 3 * tr + 1 << ' ' << 3 * tr + 2 << '\n';
}

}  // namespace circlemap
