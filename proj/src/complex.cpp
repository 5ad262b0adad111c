#include "circlemap/complex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/LU>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

bool is_zero(const Shift& s) { return s[0] == 0 && s[1] == 0 && s[2] == 0; }

struct Corner {
  int vertex;
  Shift shift;
  int local;
};

// Parity of the permutation that sorts `corners` by vertex id (in place).
int sort_with_parity(std::vector<Corner>& corners) {
  int parity = 1;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    for (std::size_t j = 0; j + 1 < corners.size() - i; ++j) {
      if (corners[j].vertex > corners[j + 1].vertex) {
        std::swap(corners[j], corners[j + 1]);
        parity = -parity;
      }
    }
  }
  return parity;
}

template <class Key>
int lookup(const std::vector<Key>& table, const Key& key) {
  auto it = std::lower_bound(table.begin(), table.end(), key);
  if (it == table.end() || !(*it == key)) throw InvariantError("simplex key missing from table");
  return static_cast<int>(it - table.begin());
}

std::string tuple_str(std::initializer_list<int> ids) {
  std::ostringstream os;
  os << '(';
  bool first = true;
  for (int i : ids) {
    if (!first) os << ',';
    os << i;
    first = false;
  }
  os << ')';
  return os.str();
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

Eigen::Vector4d Embedding::position(int vertex, const Shift& shift) const {
  Eigen::Vector4d p = coords[vertex];
  for (int j = 0; j < 3; ++j) p += shift[j] * periods[j];
  return p;
}

SimplicialComplex3::SimplicialComplex3(int vertex_count, std::vector<std::array<int, 4>> tets,
                                       std::vector<std::array<Shift, 4>> shifts,
                                       std::optional<Embedding> embedding)
    : vertex_count_(vertex_count),
      tets_(std::move(tets)),
      shifts_(std::move(shifts)),
      embedding_(std::move(embedding)) {
  if (vertex_count_ < 0) throw InputError("negative vertex count");
  if (shifts_.empty()) shifts_.assign(tets_.size(), std::array<Shift, 4>{});
  if (shifts_.size() != tets_.size()) throw InputError("shift table size does not match tets");
  if (embedding_ && static_cast<int>(embedding_->coords.size()) != vertex_count_)
    throw InputError("embedding has wrong number of coordinates");

  const int nt = tet_count();
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 4; ++i) {
      int v = tets_[t][i];
      if (v < 0 || v >= vertex_count_) {
        throw InputError("tetrahedron " + std::to_string(t) + " references vertex " +
                         std::to_string(v) + " out of range");
      }
      if (!is_zero(shifts_[t][i])) has_shifts_ = true;
      for (int j = 0; j < i; ++j) {
        if (tets_[t][j] == v) {
          throw InputError("tetrahedron " + std::to_string(t) + " repeats vertex " +
                           std::to_string(v));
        }
      }
    }
  }

  // Edge table.
  std::vector<EdgeKey> edge_keys;
  edge_keys.reserve(6 * tets_.size());
  auto edge_key = [&](int t, int i, int j, int* sign) {
    int vi = tets_[t][i], vj = tets_[t][j];
    const Shift& si = shifts_[t][i];
    const Shift& sj = shifts_[t][j];
    if (vi < vj) {
      if (sign) *sign = 1;
      return EdgeKey{vi, vj, sj - si};
    }
    if (sign) *sign = -1;
    return EdgeKey{vj, vi, si - sj};
  };
  for (int t = 0; t < nt; ++t)
    for (const auto& [i, j] : kTetEdges) edge_keys.push_back(edge_key(t, i, j, nullptr));
  std::sort(edge_keys.begin(), edge_keys.end());
  edge_keys.erase(std::unique(edge_keys.begin(), edge_keys.end()), edge_keys.end());
  edges_ = std::move(edge_keys);

  tet_edges_.resize(nt);
  tet_edge_signs_.resize(nt);
  edge_tets_.assign(edges_.size(), {});
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 6; ++k) {
      int sign = 0;
      EdgeKey key = edge_key(t, kTetEdges[k][0], kTetEdges[k][1], &sign);
      int e = lookup(edges_, key);
      tet_edges_[t][k] = e;
      tet_edge_signs_[t][k] = sign;
      edge_tets_[e].push_back(t);
    }
  }

  // Face table.
  auto face_key = [&](int t, int opposite, int* sign) {
    std::vector<Corner> corners;
    for (int i = 0; i < 4; ++i)
      if (i != opposite) corners.push_back({tets_[t][i], shifts_[t][i], i});
    int parity = sort_with_parity(corners);
    if (sign) *sign = ((opposite % 2 == 0) ? 1 : -1) * parity;
    return FaceKey{corners[0].vertex, corners[1].vertex, corners[2].vertex,
                   corners[1].shift - corners[0].shift, corners[2].shift - corners[0].shift};
  };
  std::vector<FaceKey> face_keys;
  face_keys.reserve(4 * tets_.size());
  for (int t = 0; t < nt; ++t)
    for (int i = 0; i < 4; ++i) face_keys.push_back(face_key(t, i, nullptr));
  std::sort(face_keys.begin(), face_keys.end());
  face_keys.erase(std::unique(face_keys.begin(), face_keys.end()), face_keys.end());
  faces_ = std::move(face_keys);

  tet_faces_.resize(nt);
  tet_face_signs_.resize(nt);
  face_tets_.assign(faces_.size(), {});
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 4; ++i) {
      int sign = 0;
      int f = lookup(faces_, face_key(t, i, &sign));
      tet_faces_[t][i] = f;
      tet_face_signs_[t][i] = sign;
      face_tets_[f].push_back({t, sign});
    }
  }

  face_edges_.resize(faces_.size());
  face_edge_signs_.resize(faces_.size());
  for (int f = 0; f < face_count(); ++f) {
    const FaceKey& k = faces_[f];
    face_edges_[f] = {lookup(edges_, EdgeKey{k.b, k.c, k.dc - k.db}),
                      lookup(edges_, EdgeKey{k.a, k.c, k.dc}),
                      lookup(edges_, EdgeKey{k.a, k.b, k.db})};
    face_edge_signs_[f] = {1, -1, 1};
  }

  vertex_edges_.assign(vertex_count_, {});
  for (int e = 0; e < edge_count(); ++e) {
    vertex_edges_[edges_[e].a].push_back(e);
    vertex_edges_[edges_[e].b].push_back(e);
  }
}

std::vector<std::array<int, 3>> SimplicialComplex3::boundary(int k) const {
  std::vector<std::array<int, 3>> out;
  switch (k) {
    case 1:
      for (int e = 0; e < edge_count(); ++e) {
        out.push_back({edges_[e].a, e, -1});
        out.push_back({edges_[e].b, e, 1});
      }
      break;
    case 2:
      for (int f = 0; f < face_count(); ++f)
        for (int i = 0; i < 3; ++i) out.push_back({face_edges_[f][i], f, face_edge_signs_[f][i]});
      break;
    case 3:
      for (int t = 0; t < tet_count(); ++t)
        for (int i = 0; i < 4; ++i) out.push_back({tet_faces_[t][i], t, tet_face_signs_[t][i]});
      break;
    default:
      throw InputError("boundary degree must be 1, 2 or 3");
  }
  return out;
}

std::vector<long long> SimplicialComplex3::shift_cocycle(int direction) const {
  if (direction < 0 || direction > 2) throw InputError("shift direction must be 0, 1 or 2");
  std::vector<long long> w(edges_.size());
  for (int e = 0; e < edge_count(); ++e) w[e] = edges_[e].d[direction];
  return w;
}

SimplicialComplex3 SimplicialComplex3::without_tet(int t) const {
  auto tets = tets_;
  auto shifts = shifts_;
  tets.erase(tets.begin() + t);
  shifts.erase(shifts.begin() + t);
  return SimplicialComplex3(vertex_count_, std::move(tets), std::move(shifts), embedding_);
}

SimplicialComplex3 SimplicialComplex3::with_flipped_tet(int t) const {
  auto tets = tets_;
  auto shifts = shifts_;
  std::swap(tets[t][0], tets[t][1]);
  std::swap(shifts[t][0], shifts[t][1]);
  return SimplicialComplex3(vertex_count_, std::move(tets), std::move(shifts), embedding_);
}

std::vector<Diagnostic> validate(const SimplicialComplex3& c) {
  std::vector<Diagnostic> report;
  auto face_name = [&](int f) {
    const FaceKey& k = c.face(f);
    return "face " + std::to_string(f) + " " + tuple_str({k.a, k.b, k.c});
  };

  for (int f = 0; f < c.face_count(); ++f) {
    const auto& inc = c.face_tets(f);
    if (inc.size() != 2) {
      report.push_back({"closedness", face_name(f),
                        "face lies in " + std::to_string(inc.size()) + " tetrahedra, expected 2"});
    } else if (inc[0].sign == inc[1].sign) {
      report.push_back({"orientation", face_name(f),
                        "tetrahedra " + std::to_string(inc[0].index) + " and " +
                            std::to_string(inc[1].index) + " induce the same orientation"});
    }
  }

  // Vertex links: link vertices = edges at v, link edges = faces at v,
  // link triangles = tets at v.
  const int nv = c.vertex_count();
  std::vector<int> faces_at(nv, 0);
  std::vector<std::vector<int>> tets_at(nv);
  for (int f = 0; f < c.face_count(); ++f) {
    const FaceKey& k = c.face(f);
    for (int v : {k.a, k.b, k.c}) ++faces_at[v];
  }
  for (int t = 0; t < c.tet_count(); ++t)
    for (int v : c.tets()[t]) tets_at[v].push_back(t);

  std::vector<int> local_index(c.tet_count(), -1);
  for (int v = 0; v < nv; ++v) {
    long chi = static_cast<long>(c.vertex_edges(v).size()) - faces_at[v] +
               static_cast<long>(tets_at[v].size());
    const auto& star = tets_at[v];
    bool connected = true;
    if (star.empty()) {
      connected = false;
    } else {
      for (std::size_t i = 0; i < star.size(); ++i) local_index[star[i]] = static_cast<int>(i);
      UnionFind uf(static_cast<int>(star.size()));
      for (int t : star) {
        for (int i = 0; i < 4; ++i) {
          if (c.tets()[t][i] == v) continue;  // the face opposite v is not in the link star
          int f = c.tet_faces(t)[i];
          for (const auto& inc : c.face_tets(f))
            if (local_index[inc.index] >= 0) uf.unite(local_index[t], local_index[inc.index]);
        }
      }
      int root = uf.find(0);
      for (std::size_t i = 1; i < star.size(); ++i)
        if (uf.find(static_cast<int>(i)) != root) connected = false;
      for (int t : star) local_index[t] = -1;
    }
    if (!connected || chi != 2) {
      report.push_back({"vertex-link", "vertex " + std::to_string(v),
                        std::string(connected ? "" : "link disconnected; ") +
                            "chi(link) = " + std::to_string(chi) + ", expected 2"});
    }
  }

  // Boundary of boundary, exact integer arithmetic.
  for (int f = 0; f < c.face_count(); ++f) {
    std::map<int, int> acc;
    for (int i = 0; i < 3; ++i) {
      const EdgeKey& ek = c.edge(c.face_edges(f)[i]);
      int s = c.face_edge_signs(f)[i];
      acc[ek.a] -= s;
      acc[ek.b] += s;
    }
    for (const auto& [v, val] : acc)
      if (val != 0) report.push_back({"boundary", face_name(f), "d1 d2 != 0"});
  }
  for (int t = 0; t < c.tet_count(); ++t) {
    std::map<int, int> acc;
    for (int i = 0; i < 4; ++i) {
      int f = c.tet_faces(t)[i];
      for (int j = 0; j < 3; ++j)
        acc[c.face_edges(f)[j]] += c.tet_face_signs(t)[i] * c.face_edge_signs(f)[j];
    }
    for (const auto& [e, val] : acc)
      if (val != 0) {
        report.push_back({"boundary", "tet " + std::to_string(t), "d2 d3 != 0"});
        break;
      }
  }

  if (c.euler_characteristic() != 0) {
    report.push_back({"euler", "complex",
                      "V - E + F - T = " + std::to_string(c.euler_characteristic())});
  }

  UnionFind uf(std::max(nv, 1));
  int components = nv;
  for (int e = 0; e < c.edge_count(); ++e)
    if (uf.unite(c.edge(e).a, c.edge(e).b)) --components;
  if (components != 1) {
    report.push_back({"connectivity", "complex",
                      "1-skeleton has " + std::to_string(components) + " components"});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Surfaces

int SurfaceMesh::euler_characteristic() const {
  return vertex_count - static_cast<int>(edge_lengths.size()) +
         static_cast<int>(triangles.size());
}

double SurfaceMesh::edge_length(int u, int v) const {
  auto it = edge_lengths.find({std::min(u, v), std::max(u, v)});
  if (it == edge_lengths.end()) throw InputError("surface has no edge between these vertices");
  return it->second;
}

double SurfaceMesh::area() const {
  double total = 0.0;
  for (const auto& tri : triangles) {
    double a = edge_length(tri[1], tri[2]);
    double b = edge_length(tri[2], tri[0]);
    double c = edge_length(tri[0], tri[1]);
    // Kahan's numerically stable Heron formula.
    std::array<double, 3> s{a, b, c};
    std::sort(s.begin(), s.end(), std::greater<>());
    double x = s[0], y = s[1], z = s[2];
    total += 0.25 * std::sqrt((x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z)));
  }
  return total;
}

namespace {

void set_length(SurfaceMesh& s, int u, int v, double len) {
  auto key = std::make_pair(std::min(u, v), std::max(u, v));
  auto [it, inserted] = s.edge_lengths.emplace(key, len);
  if (!inserted && std::abs(it->second - len) > 1e-9 * std::max(1.0, len)) {
    throw InvariantError("inconsistent lengths for a surface edge");
  }
}

// Every edge in exactly two triangles with opposite directions.
void check_closed_oriented(const SurfaceMesh& s) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : s.triangles) {
    for (int i = 0; i < 3; ++i) {
      int u = tri[i], v = tri[(i + 1) % 3];
      if (u == v) throw InvariantError("degenerate surface triangle");
      if (++directed[{u, v}] > 1) throw InvariantError("surface is not a simplicial 2-manifold");
    }
  }
  for (const auto& [uv, count] : directed)
    if (!directed.count({uv.second, uv.first}))
      throw InvariantError("surface edge without an opposite partner");
}

}  // namespace

SurfaceMesh build_icosphere(int level, double radius) {
  if (level < 0) throw InputError("icosphere level must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> pts{{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                                   {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                                   {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : pts) p.normalize();
  std::vector<std::array<int, 3>> tris{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      pts.push_back((pts[a] + pts[b]).normalized());
      int id = static_cast<int>(pts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      int a = mid(t[0], t[1]), b = mid(t[1], t[2]), c = mid(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    tris = std::move(next);
  }

  SurfaceMesh s;
  s.genus = 0;
  s.vertex_count = static_cast<int>(pts.size());
  s.triangles = std::move(tris);
  for (auto& p : pts) s.positions.push_back(radius * p);
  for (const auto& t : s.triangles) {
    for (int i = 0; i < 3; ++i) {
      int u = t[i], v = t[(i + 1) % 3];
      double chord = (pts[u] - pts[v]).norm();
      set_length(s, u, v, 2.0 * radius * std::asin(0.5 * chord));
    }
  }
  check_closed_oriented(s);
  return s;
}

SurfaceMesh build_flat_torus(int n) {
  if (n < 3) throw InputError("flat torus grid needs n >= 3");
  SurfaceMesh s;
  s.genus = 1;
  s.vertex_count = n * n;
  auto id = [n](int i, int j) { return ((i + n) % n) + n * ((j + n) % n); };
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      s.triangles.push_back({v00, v10, v11});
      s.triangles.push_back({v00, v11, v01});
      set_length(s, v00, v10, h);
      set_length(s, v10, v11, h);
      set_length(s, v00, v01, h);
      set_length(s, v11, v01, h);
      set_length(s, v00, v11, std::sqrt(2.0) * h);
    }
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      s.positions.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0);
  check_closed_oriented(s);
  return s;
}

SurfaceMesh build_hyperbolic_surface(int genus, int k) {
  if (genus < 2) throw InputError("hyperbolic surface needs genus >= 2");
  if (k < 3) throw InputError("hyperbolic surface needs k >= 3");
  const int sides = 4 * genus;
  // Regular hyperbolic polygon with interior angle 2pi/sides:
  // cosh(circumradius) = cot(pi/sides) * cot(angle/2).
  const double cot = 1.0 / std::tan(M_PI / sides);
  const double circumradius = std::acosh(cot * cot);
  const double rho = std::tanh(circumradius);  // Klein-model radius
  std::vector<Eigen::Vector2d> corner(sides);
  for (int i = 0; i < sides; ++i) {
    double a = 2.0 * M_PI * i / sides;
    corner[i] = rho * Eigen::Vector2d(std::cos(a), std::sin(a));
  }

  // Raw vertex (fan i, a, b) with a + b <= k; a, b count steps towards P_i, P_{i+1}.
  const int per_fan = (k + 1) * (k + 2) / 2;
  auto raw = [&](int fan, int a, int b) {
    int row_start = a * (k + 1) - a * (a - 1) / 2;
    return fan * per_fan + row_start + b;
  };
  // Barycentric combination on the hyperboloid, read back in the Klein model:
  // spacing is uniform in hyperbolic distance along every subdivision line.
  const double lift = std::cosh(circumradius);
  auto point = [&](int fan, int a, int b) {
    double x0 = (k - a - b) + (a + b) * lift;
    Eigen::Vector2d xs = lift * (a * corner[fan] + b * corner[(fan + 1) % sides]);
    return Eigen::Vector2d(xs / x0);
  };
  UnionFind uf(sides * per_fan);
  for (int fan = 0; fan < sides; ++fan) {
    uf.unite(raw(0, 0, 0), raw(fan, 0, 0));
    int next = (fan + 1) % sides;
    for (int b = 0; b <= k; ++b) uf.unite(raw(fan, 0, b), raw(next, b, 0));
  }
  // Side i (P_i -> P_{i+1}) is glued to side i+2 reversed for i = 0,1 mod 4.
  for (int i = 0; i < sides; ++i) {
    if (i % 4 > 1) continue;
    int j = i + 2;
    for (int s = 0; s <= k; ++s) uf.unite(raw(i, k - s, s), raw(j, s, k - s));
  }

  std::map<int, int> relabel;
  SurfaceMesh surf;
  surf.genus = genus;
  std::vector<Eigen::Vector2d> representative;
  auto global = [&](int fan, int a, int b) {
    int root = uf.find(raw(fan, a, b));
    auto [it, inserted] = relabel.emplace(root, static_cast<int>(relabel.size()));
    if (inserted) representative.push_back(point(fan, a, b));
    return it->second;
  };
  auto klein_distance = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    double num = 1.0 - p.dot(q);
    double den = std::sqrt((1.0 - p.squaredNorm()) * (1.0 - q.squaredNorm()));
    return std::acosh(std::max(1.0, num / den));
  };
  auto add = [&](int fan, std::array<std::array<int, 2>, 3> ab) {
    std::array<int, 3> tri;
    std::array<Eigen::Vector2d, 3> p;
    for (int i = 0; i < 3; ++i) {
      tri[i] = global(fan, ab[i][0], ab[i][1]);
      p[i] = point(fan, ab[i][0], ab[i][1]);
    }
    surf.triangles.push_back(tri);
    for (int i = 0; i < 3; ++i)
      set_length(surf, tri[i], tri[(i + 1) % 3], klein_distance(p[i], p[(i + 1) % 3]));
  };
  for (int fan = 0; fan < sides; ++fan) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; a + b < k; ++b) {
        add(fan, {{{a, b}, {a + 1, b}, {a, b + 1}}});
        if (a + b + 1 < k) add(fan, {{{a + 1, b}, {a + 1, b + 1}, {a, b + 1}}});
      }
    }
  }
  surf.vertex_count = static_cast<int>(relabel.size());
  for (const auto& p : representative) surf.positions.emplace_back(p.x(), p.y(), 0.0);
  check_closed_oriented(surf);
  if (surf.euler_characteristic() != 2 - 2 * genus)
    throw InvariantError("hyperbolic surface has wrong Euler characteristic");
  return surf;
}

SurfaceMesh build_fiber(int genus, int level) {
  if (genus < 0) throw InputError("genus must be >= 0");
  if (level < 0) throw InputError("fiber level must be >= 0");
  if (genus == 0) return build_icosphere(level);
  if (genus == 1) return build_flat_torus(3 << level);
  return build_hyperbolic_surface(genus, 3 << level);
}

SimplicialComplex3 build_three_torus(int n) {
  if (n < 2) throw InputError("three-torus subdivision needs n >= 2");
  auto wrap = [n](int x, int* shift) {
    int q = x >= 0 ? x / n : -((-x + n - 1) / n);
    *shift = q;
    return x - q * n;
  };
  std::vector<std::array<int, 4>> tets;
  std::vector<std::array<Shift, 4>> shifts;
  const std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& p : perms) {
          std::array<std::array<int, 3>, 4> c;
          c[0] = {i, j, k};
          for (int s = 0; s < 3; ++s) {
            c[s + 1] = c[s];
            c[s + 1][p[s]] += 1;
          }
          // Orientation from the determinant of the corner differences.
          Eigen::Matrix3d m;
          for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 3; ++a) m(a, s) = c[s + 1][a] - c[0][a];
          if (m.determinant() < 0) std::swap(c[2], c[3]);
          std::array<int, 4> tet;
          std::array<Shift, 4> sh;
          for (int s = 0; s < 4; ++s) {
            int x = wrap(c[s][0], &sh[s][0]);
            int y = wrap(c[s][1], &sh[s][1]);
            int z = wrap(c[s][2], &sh[s][2]);
            tet[s] = x + n * (y + n * z);
          }
          tets.push_back(tet);
          shifts.push_back(sh);
        }
      }
    }
  }
  Embedding emb;
  emb.dim = 3;
  emb.coords.resize(n * n * n);
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        emb.coords[x + n * (y + n * z)] =
            Eigen::Vector4d(static_cast<double>(x) / n, static_cast<double>(y) / n,
                            static_cast<double>(z) / n, 0.0);
  for (int a = 0; a < 3; ++a) emb.periods[a] = Eigen::Vector4d::Unit(a);
  return SimplicialComplex3(n * n * n, std::move(tets), std::move(shifts), std::move(emb));
}

SimplicialComplex3 build_surface_times_circle(const SurfaceMesh& fiber, int layers,
                                              double circle_length) {
  if (layers < 3) throw InputError("circle subdivision needs at least 3 segments");
  if (!(circle_length > 0.0)) throw InputError("circle length must be positive");
  const int nf = fiber.vertex_count;
  std::vector<std::array<int, 4>> tets;
  std::vector<std::array<Shift, 4>> shifts;
  tets.reserve(3 * fiber.triangles.size() * layers);
  shifts.reserve(tets.capacity());

  for (int layer = 0; layer < layers; ++layer) {
    const int up = (layer + 1) % layers;
    const int wraps = (layer + 1 == layers) ? 1 : 0;
    for (const auto& tri : fiber.triangles) {
      // Model positions of the oriented triangle: (0,0), (1,0), (0,1).
      std::map<int, Eigen::Vector2d> model{{tri[0], {0.0, 0.0}},
                                           {tri[1], {1.0, 0.0}},
                                           {tri[2], {0.0, 1.0}}};
      std::array<int, 3> s = tri;
      std::sort(s.begin(), s.end());
      // (fiber vertex, top?) per corner; diagonals always run low-bottom to high-top.
      const std::array<std::array<std::pair<int, int>, 4>, 3> pattern{{
          {{{s[0], 0}, {s[1], 0}, {s[2], 0}, {s[2], 1}}},
          {{{s[0], 0}, {s[1], 0}, {s[1], 1}, {s[2], 1}}},
          {{{s[0], 0}, {s[0], 1}, {s[1], 1}, {s[2], 1}}},
      }};
      for (const auto& corners : pattern) {
        std::array<Eigen::Vector3d, 4> x;
        std::array<int, 4> tet;
        std::array<Shift, 4> sh{};
        for (int c = 0; c < 4; ++c) {
          auto [p, top] = corners[c];
          const Eigen::Vector2d& q = model.at(p);
          x[c] = Eigen::Vector3d(q.x(), q.y(), top);
          tet[c] = (top ? up : layer) * nf + p;
          if (top && wraps) sh[c] = {1, 0, 0};
        }
        Eigen::Matrix3d m;
        m.col(0) = x[1] - x[0];
        m.col(1) = x[2] - x[0];
        m.col(2) = x[3] - x[0];
        if (m.determinant() < 0) {
          std::swap(tet[2], tet[3]);
          std::swap(sh[2], sh[3]);
        }
        tets.push_back(tet);
        shifts.push_back(sh);
      }
    }
  }

  std::optional<Embedding> emb;
  if (fiber.genus == 0 && static_cast<int>(fiber.positions.size()) == nf) {
    Embedding e;
    e.dim = 4;
    e.coords.resize(static_cast<std::size_t>(nf) * layers);
    for (int layer = 0; layer < layers; ++layer)
      for (int p = 0; p < nf; ++p) {
        const auto& q = fiber.positions[p];
        e.coords[layer * nf + p] =
            Eigen::Vector4d(q.x(), q.y(), q.z(), circle_length * layer / layers);
      }
    e.periods[0] = Eigen::Vector4d(0, 0, 0, circle_length);
    emb = std::move(e);
  }
  return SimplicialComplex3(nf * layers, std::move(tets), std::move(shifts), std::move(emb));
}

SimplicialComplex3 build_surface_times_circle(int genus, int fiber_level, int layers,
                                              double circle_length) {
  return build_surface_times_circle(build_fiber(genus, fiber_level), layers, circle_length);
}

}  // namespace circlemap
