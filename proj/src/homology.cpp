#include "circlemap/homology.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <numeric>

#include "circlemap/error.hpp"
#include "circlemap/smith.hpp"

namespace circlemap {

namespace {

long long narrow(const BigInt& x) {
  if (x > BigInt(INT64_MAX) || x < BigInt(INT64_MIN))
    throw NumericalError("cocycle value exceeds 64-bit range");
  return static_cast<long long>(x);
}

// Pairs a cochain with an edge chain in arbitrary precision.
BigInt big_pairing(const std::vector<BigInt>& omega, const IntChain& z) {
  BigInt s = 0;
  for (std::size_t e = 0; e < z.size(); ++e)
    if (z[e] != 0) s += omega[e] * z[e];
  return s;
}

struct Spine {
  std::vector<int> generators;           // alive non-tree edges
  std::vector<int> faces;                // alive faces of the collapsed 2-complex
  std::vector<std::pair<int, int>> eliminated;  // (edge, face) in collapse order
  std::vector<int> parent_edge;          // spanning tree, -1 at the root
  std::vector<int> parent_vertex;
  bool orientable = true;
};

// Collapses M minus a tetrahedron onto a small 2-complex: dual spanning tree
// (removes T-1 faces), free-edge collapses, then a primal spanning tree.
Spine build_spine(const SimplicialComplex3& c) {
  const int nt = c.tet_count(), nf = c.face_count(), ne = c.edge_count(), nv = c.vertex_count();
  if (nt == 0) throw InputError("complex has no tetrahedra");
  for (int f = 0; f < nf; ++f)
    if (c.face_tets(f).size() != 2) throw InputError("complex is not closed");

  Spine s;
  std::vector<char> tree_face(nf, 0);
  std::vector<int> tet_sign(nt, 0);
  tet_sign[0] = 1;
  std::deque<int> queue{0};
  int visited = 1;
  while (!queue.empty()) {
    int t = queue.front();
    queue.pop_front();
    for (int i = 0; i < 4; ++i) {
      int f = c.tet_faces(t)[i];
      const auto& inc = c.face_tets(f);
      const Incidence& other = inc[0].index == t && inc[1].index != t ? inc[1] : inc[0];
      const Incidence& self = &other == &inc[0] ? inc[1] : inc[0];
      int wanted = -tet_sign[t] * self.sign * other.sign;
      if (tet_sign[other.index] == 0) {
        tet_sign[other.index] = wanted;
        tree_face[f] = 1;
        queue.push_back(other.index);
        ++visited;
      } else if (tet_sign[other.index] != wanted) {
        s.orientable = false;
      }
    }
  }
  if (visited != nt) throw InputError("complex is not connected through faces");

  std::vector<std::vector<int>> edge_faces(ne);
  std::vector<char> face_alive(nf, 0);
  std::vector<int> count(ne, 0);
  for (int f = 0; f < nf; ++f) {
    if (tree_face[f]) continue;
    face_alive[f] = 1;
    for (int e : c.face_edges(f)) {
      edge_faces[e].push_back(f);
      ++count[e];
    }
  }
  std::vector<char> edge_alive(ne, 1);
  std::deque<int> free_edges;
  for (int e = 0; e < ne; ++e)
    if (count[e] == 1) free_edges.push_back(e);
  while (!free_edges.empty()) {
    int e = free_edges.front();
    free_edges.pop_front();
    if (!edge_alive[e] || count[e] != 1) continue;
    int face = -1;
    for (int f : edge_faces[e])
      if (face_alive[f]) face = f;
    if (face < 0) throw InvariantError("free edge without a live face");
    face_alive[face] = 0;
    edge_alive[e] = 0;
    s.eliminated.emplace_back(e, face);
    for (int other : c.face_edges(face)) {
      if (other == e) continue;
      if (--count[other] == 1) free_edges.push_back(other);
    }
  }

  s.parent_edge.assign(nv, -1);
  s.parent_vertex.assign(nv, -1);
  std::vector<char> seen(nv, 0);
  std::vector<char> tree_edge(ne, 0);
  seen[0] = 1;
  std::deque<int> vq{0};
  while (!vq.empty()) {
    int v = vq.front();
    vq.pop_front();
    for (int e : c.vertex_edges(v)) {
      if (!edge_alive[e]) continue;
      int w = c.edge(e).a == v ? c.edge(e).b : c.edge(e).a;
      if (seen[w]) continue;
      seen[w] = 1;
      s.parent_edge[w] = e;
      s.parent_vertex[w] = v;
      tree_edge[e] = 1;
      vq.push_back(w);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InputError("complex 1-skeleton is not connected");

  for (int e = 0; e < ne; ++e)
    if (edge_alive[e] && !tree_edge[e]) s.generators.push_back(e);
  for (int f = 0; f < nf; ++f)
    if (face_alive[f]) s.faces.push_back(f);
  return s;
}

// Tree path from v to the root as a signed edge chain added into z.
void add_root_path(const SimplicialComplex3& c, const Spine& s, int v, long long coeff,
                   IntChain& z) {
  while (s.parent_edge[v] >= 0) {
    int e = s.parent_edge[v];
    int sign = c.edge(e).a == v ? 1 : -1;  // traversed v -> parent
    z[e] += coeff * sign;
    v = s.parent_vertex[v];
  }
}

IntChain fundamental_cycle(const SimplicialComplex3& c, const Spine& s, int g) {
  IntChain z(c.edge_count(), 0);
  z[g] += 1;
  add_root_path(c, s, c.edge(g).b, 1, z);
  add_root_path(c, s, c.edge(g).a, -1, z);
  return z;
}


// Relations over the spine generators, reduced by unit pivots: a relation
// with a coefficient +-1 on generator g solves for g and is substituted into
// every other relation. The residue goes to the Smith normal form.
struct ReducedRelations {
  std::vector<std::pair<int, std::map<int, long long>>> pivots;  // (column, row), in order
  std::vector<int> columns;                                      // surviving generator columns
  IntMatrix<long long> matrix;                                   // surviving nonzero rows
};

ReducedRelations reduce_relations(std::vector<std::map<int, long long>> rows, int ncols) {
  std::vector<std::set<int>> col_rows(ncols);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (auto [col, v] : rows[r]) col_rows[col].insert(r);
  std::vector<char> row_alive(rows.size(), 1), col_alive(ncols, 1);
  ReducedRelations out;

  auto fits = [](long long x) { return std::abs(x) < (1LL << 40); };
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<int> order;
    for (int r = 0; r < static_cast<int>(rows.size()); ++r)
      if (row_alive[r] && !rows[r].empty()) order.push_back(r);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return rows[x].size() < rows[y].size(); });
    for (int r : order) {
      if (!row_alive[r] || rows[r].empty()) continue;
      int pivot = -1;
      for (auto [col, v] : rows[r])
        if ((v == 1 || v == -1) &&
            (pivot < 0 || col_rows[col].size() < col_rows[pivot].size()))
          pivot = col;
      if (pivot < 0) continue;
      const long long a = rows[r][pivot];
      const std::map<int, long long> prow = rows[r];
      bool safe = true;
      for (int other : col_rows[pivot]) {
        if (other == r) continue;
        long long factor = rows[other][pivot] * a;
        for (auto [col, v] : prow) {
          auto it = rows[other].find(col);
          long long cur = it == rows[other].end() ? 0 : it->second;
          if (!fits(cur) || !fits(factor * v) || !fits(cur - factor * v)) safe = false;
        }
      }
      if (!safe) continue;
      std::vector<int> touched(col_rows[pivot].begin(), col_rows[pivot].end());
      for (int other : touched) {
        if (other == r) continue;
        long long factor = rows[other][pivot] * a;
        for (auto [col, v] : prow) {
          long long& cur = rows[other][col];
          cur -= factor * v;
          if (cur == 0) {
            rows[other].erase(col);
            col_rows[col].erase(other);
          } else {
            col_rows[col].insert(other);
          }
        }
      }
      for (auto [col, v] : prow) col_rows[col].erase(r);
      row_alive[r] = 0;
      col_alive[pivot] = 0;
      out.pivots.emplace_back(pivot, prow);
      progress = true;
    }
  }

  std::vector<int> position(ncols, -1);
  for (int j = 0; j < ncols; ++j)
    if (col_alive[j]) {
      position[j] = static_cast<int>(out.columns.size());
      out.columns.push_back(j);
    }
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    if (!row_alive[r] || rows[r].empty()) continue;
    std::vector<long long> dense(out.columns.size(), 0);
    for (auto [col, v] : rows[r]) dense[position[col]] = v;
    out.matrix.push_back(std::move(dense));
  }
  return out;
}

}  // namespace

bool HomologyClass::is_zero() const {
  return std::all_of(coordinates.begin(), coordinates.end(), [](long long x) { return x == 0; });
}

HomologyBasis compute_homology(const SimplicialComplex3& c) {
  const Spine spine = build_spine(c);
  const int ng = static_cast<int>(spine.generators.size());
  const int nfaces = static_cast<int>(spine.faces.size());

  std::vector<int> column(c.edge_count(), -1);
  for (int j = 0; j < ng; ++j) column[spine.generators[j]] = j;
  std::vector<std::map<int, long long>> relations(nfaces);
  for (int r = 0; r < nfaces; ++r) {
    int f = spine.faces[r];
    for (int i = 0; i < 3; ++i) {
      int col = column[c.face_edges(f)[i]];
      if (col >= 0) relations[r][col] += c.face_edge_signs(f)[i];
    }
    for (auto it = relations[r].begin(); it != relations[r].end();)
      it = it->second == 0 ? relations[r].erase(it) : std::next(it);
  }
  const ReducedRelations reduced = reduce_relations(std::move(relations), ng);
  const int nred = static_cast<int>(reduced.columns.size());
  SmithForm snf = smith_normal_form(reduced.matrix, nred);
  const int r = static_cast<int>(reduced.pivots.size()) + snf.rank;

  HomologyBasis out;
  out.used_bigint = snf.used_bigint;
  const int b1 = ng - r;
  out.betti = {1, b1, nfaces - r - (spine.orientable ? 0 : 1), spine.orientable ? 1 : 0};
  for (int i = 0; i < snf.rank; ++i)
    if (snf.diagonal[i] > 1) out.torsion.push_back(narrow(snf.diagonal[i]));

  // Cocycles: kernel columns of Q on the surviving generators, solved through
  // the pivots, zero on the tree, then back-substitution through the
  // collapses in reverse order.
  std::vector<std::vector<BigInt>> big_cocycles;
  for (int k = snf.rank; k < nred; ++k) {
    std::vector<BigInt> gen(ng, 0);
    for (int j = 0; j < nred; ++j) gen[reduced.columns[j]] = snf.Q[j][k];
    for (auto it = reduced.pivots.rbegin(); it != reduced.pivots.rend(); ++it) {
      const auto& [pivot, row] = *it;
      BigInt acc = 0;
      for (auto [col, v] : row)
        if (col != pivot) acc += gen[col] * v;
      gen[pivot] = -acc * row.at(pivot);
    }
    std::vector<BigInt> w(c.edge_count(), 0);
    for (int j = 0; j < ng; ++j) w[spine.generators[j]] = gen[j];
    for (auto it = spine.eliminated.rbegin(); it != spine.eliminated.rend(); ++it) {
      auto [e, f] = *it;
      BigInt acc = 0;
      int own = 0;
      for (int i = 0; i < 3; ++i) {
        int edge = c.face_edges(f)[i];
        if (edge == e) {
          own = c.face_edge_signs(f)[i];
        } else {
          acc += w[edge] * c.face_edge_signs(f)[i];
        }
      }
      w[e] = -acc * own;
    }
    big_cocycles.push_back(std::move(w));
  }

  // Cycles: rows of Q^{-1} over the surviving generators; the eliminated
  // generators are expressed through them in homology.
  std::vector<IntChain> cycles;
  for (int k = snf.rank; k < nred; ++k) {
    IntChain z(c.edge_count(), 0);
    for (int j = 0; j < nred; ++j) {
      if (snf.Q_inv[k][j] == 0) continue;
      long long coeff = narrow(snf.Q_inv[k][j]);
      IntChain loop = fundamental_cycle(c, spine, spine.generators[reduced.columns[j]]);
      for (int e = 0; e < c.edge_count(); ++e) z[e] += coeff * loop[e];
    }
    cycles.push_back(std::move(z));
  }

  // Prefer the lattice-shift cocycles when they extend to a basis.
  std::vector<std::vector<BigInt>> preferred;
  if (c.has_shifts()) {
    for (int dir = 0; dir < 3; ++dir) {
      IntCochain w = c.shift_cocycle(dir);
      if (std::all_of(w.begin(), w.end(), [](long long x) { return x == 0; })) continue;
      std::vector<BigInt> bw(w.begin(), w.end());
      preferred.push_back(std::move(bw));
    }
  }
  const int p = static_cast<int>(preferred.size());
  bool use_preferred = p > 0 && p <= b1;
  if (use_preferred) {
    IntMatrix<long long> C(p, std::vector<long long>(b1, 0));
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < b1; ++k) C[i][k] = narrow(big_pairing(preferred[i], cycles[k]));
    SmithForm cs = smith_normal_form(C, b1);
    use_preferred = cs.rank == p;
    for (int i = 0; i < cs.rank && use_preferred; ++i)
      if (cs.diagonal[i] != 1) use_preferred = false;
    if (use_preferred) {
      // U = diag(P^{-1}, I) * Q^{-1}, U^{-1} = Q * diag(P, I).
      IntMatrix<BigInt> U(b1, std::vector<BigInt>(b1, 0)), U_inv(b1, std::vector<BigInt>(b1, 0));
      for (int i = 0; i < b1; ++i)
        for (int j = 0; j < b1; ++j) {
          BigInt u = 0, ui = 0;
          if (i < p) {
            for (int l = 0; l < p; ++l) u += cs.P_inv[i][l] * cs.Q_inv[l][j];
          } else {
            u = cs.Q_inv[i][j];
          }
          if (j < p) {
            for (int l = 0; l < p; ++l) ui += cs.Q[i][l] * cs.P[l][j];
          } else {
            ui = cs.Q[i][j];
          }
          U[i][j] = u;
          U_inv[i][j] = ui;
        }
      std::vector<std::vector<BigInt>> new_cocycles;
      for (int i = 0; i < b1; ++i) {
        if (i < p) {
          new_cocycles.push_back(preferred[i]);
          continue;
        }
        std::vector<BigInt> w(c.edge_count(), 0);
        for (int k = 0; k < b1; ++k)
          if (U[i][k] != 0)
            for (int e = 0; e < c.edge_count(); ++e) w[e] += U[i][k] * big_cocycles[k][e];
        new_cocycles.push_back(std::move(w));
      }
      std::vector<IntChain> new_cycles;
      for (int k = 0; k < b1; ++k) {
        IntChain z(c.edge_count(), 0);
        for (int l = 0; l < b1; ++l) {
          if (U_inv[l][k] == 0) continue;
          long long coeff = narrow(U_inv[l][k]);
          for (int e = 0; e < c.edge_count(); ++e) z[e] += coeff * cycles[l][e];
        }
        new_cycles.push_back(std::move(z));
      }
      big_cocycles = std::move(new_cocycles);
      cycles = std::move(new_cycles);
    }
  }

  for (auto& w : big_cocycles) {
    IntCochain small(w.size());
    for (std::size_t e = 0; e < w.size(); ++e) small[e] = narrow(w[e]);
    out.cocycles.push_back(std::move(small));
  }
  out.cycles = std::move(cycles);

  for (const auto& w : out.cocycles) {
    for (long long x : coboundary(c, w))
      if (x != 0) throw InvariantError("basis cochain is not closed");
  }
  for (int i = 0; i < b1; ++i)
    for (int j = 0; j < b1; ++j)
      if (pairing(out.cocycles[i], out.cycles[j]) != (i == j ? 1 : 0))
        throw InvariantError("cocycle/cycle bases are not dual");
  return out;
}

std::array<int, 4> betti_numbers(const SimplicialComplex3& c) { return compute_homology(c).betti; }

std::vector<IntCochain> integral_cocycle_basis(const SimplicialComplex3& c) {
  return compute_homology(c).cocycles;
}

IntCochain cocycle_for_class(const HomologyBasis& basis, const HomologyClass& alpha) {
  if (alpha.degree != 2 && alpha.degree != 1) throw InputError("class degree must be 1 or 2");
  if (static_cast<int>(alpha.coordinates.size()) != basis.rank())
    throw InputError("class has " + std::to_string(alpha.coordinates.size()) +
                     " coordinates, basis rank is " + std::to_string(basis.rank()));
  if (alpha.is_zero()) throw InputError("zero class: a nontrivial class is required");
  const std::size_t ne = basis.cocycles.front().size();
  IntCochain w(ne, 0);
  for (int i = 0; i < basis.rank(); ++i) {
    long long a = alpha.coordinates[i];
    if (a == 0) continue;
    for (std::size_t e = 0; e < ne; ++e) w[e] += a * basis.cocycles[i][e];
  }
  return w;
}

HomologyClass class_of_cocycle(const HomologyBasis& basis, const IntCochain& omega) {
  HomologyClass h;
  for (const auto& z : basis.cycles) h.coordinates.push_back(pairing(omega, z));
  return h;
}

std::vector<long long> coboundary(const SimplicialComplex3& c, const IntCochain& omega) {
  std::vector<long long> out(c.face_count(), 0);
  for (int f = 0; f < c.face_count(); ++f)
    for (int i = 0; i < 3; ++i) out[f] += c.face_edge_signs(f)[i] * omega[c.face_edges(f)[i]];
  return out;
}

std::vector<double> coboundary(const SimplicialComplex3& c, const std::vector<double>& omega) {
  std::vector<double> out(c.face_count(), 0.0);
  for (int f = 0; f < c.face_count(); ++f)
    for (int i = 0; i < 3; ++i) out[f] += c.face_edge_signs(f)[i] * omega[c.face_edges(f)[i]];
  return out;
}

IntCochain vertex_coboundary(const SimplicialComplex3& c, const std::vector<long long>& psi) {
  IntCochain out(c.edge_count());
  for (int e = 0; e < c.edge_count(); ++e) out[e] = psi[c.edge(e).b] - psi[c.edge(e).a];
  return out;
}

long long pairing(const IntCochain& omega, const IntChain& z) {
  long long s = 0;
  for (std::size_t e = 0; e < z.size(); ++e) s += omega[e] * z[e];
  return s;
}

}  // namespace circlemap
