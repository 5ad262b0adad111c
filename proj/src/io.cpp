#include "circlemap/io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next nonblank line with comments stripped; false at end of input.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  std::istringstream require(const std::string& what) {
    std::istringstream s;
    if (!next(s)) fail("unexpected end of file, expected " + what);
    return s;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("m3t line " + std::to_string(number_) + ": " + what);
  }

  template <class T>
  T read(std::istringstream& s, const std::string& what) const {
    T value;
    if (!(s >> value)) fail("expected " + what);
    return value;
  }

  void finish(std::istringstream& s) const {
    std::string rest;
    if (s >> rest) fail("unexpected trailing token '" + rest + "'");
  }

 private:
  std::istream& in_;
  int number_ = 0;
};

}  // namespace

MeshFile read_m3t(std::istream& in) {
  LineReader r(in);
  auto header = r.require("header");
  if (r.read<std::string>(header, "'m3t'") != "m3t") r.fail("missing 'm3t' header");
  if (r.read<int>(header, "version") != 1) r.fail("unsupported version");
  r.finish(header);

  auto vline = r.require("vertices");
  if (r.read<std::string>(vline, "'vertices'") != "vertices") r.fail("expected 'vertices N'");
  const int nv = r.read<int>(vline, "vertex count");
  if (nv <= 0) r.fail("vertex count must be positive");
  r.finish(vline);

  std::optional<Embedding> embedding;
  std::vector<std::array<int, 4>> tets;
  std::vector<std::array<Shift, 4>> shifts;
  std::optional<std::vector<double>> lengths;
  int lengths_count = -1;
  std::vector<std::pair<int, double>> raw_lengths;

  std::istringstream line;
  while (r.next(line)) {
    const std::string key = r.read<std::string>(line, "block keyword");
    if (key == "coords") {
      int dim = 3;
      if (line >> dim) {
        if (dim != 3 && dim != 4) r.fail("coords dimension must be 3 or 4");
      }
      Embedding e;
      e.dim = dim;
      for (int v = 0; v < nv; ++v) {
        auto s = r.require("coordinate line");
        Eigen::Vector4d x = Eigen::Vector4d::Zero();
        for (int k = 0; k < dim; ++k) x(k) = r.read<double>(s, "coordinate");
        r.finish(s);
        e.coords.push_back(x);
      }
      embedding = std::move(e);
    } else if (key == "periods") {
      if (!embedding) r.fail("periods must follow coords");
      for (int j = 0; j < 3; ++j) {
        auto s = r.require("period line");
        for (int k = 0; k < embedding->dim; ++k) embedding->periods[j](k) = r.read<double>(s, "period");
        r.finish(s);
      }
    } else if (key == "tets") {
      const int nt = r.read<int>(line, "tet count");
      if (nt <= 0) r.fail("tet count must be positive");
      for (int t = 0; t < nt; ++t) {
        auto s = r.require("tet line");
        std::array<int, 4> tet;
        for (int& v : tet) v = r.read<int>(s, "vertex id");
        r.finish(s);
        tets.push_back(tet);
      }
    } else if (key == "shifts") {
      const int nt = r.read<int>(line, "shift count");
      for (int t = 0; t < nt; ++t) {
        auto s = r.require("shift line");
        std::array<Shift, 4> sh;
        for (auto& corner : sh)
          for (int& x : corner) x = r.read<int>(s, "shift component");
        r.finish(s);
        shifts.push_back(sh);
      }
    } else if (key == "lengths") {
      lengths_count = r.read<int>(line, "length count");
      for (int i = 0; i < lengths_count; ++i) {
        auto s = r.require("length line");
        int e = r.read<int>(s, "edge id");
        double l = r.read<double>(s, "length");
        r.finish(s);
        raw_lengths.emplace_back(e, l);
      }
    } else {
      r.fail("unknown block '" + key + "'");
    }
    r.finish(line);
  }
  if (tets.empty()) throw InputError("m3t: missing tets block");
  if (!shifts.empty() && shifts.size() != tets.size())
    throw InputError("m3t: shifts block has " + std::to_string(shifts.size()) + " rows, expected " +
                     std::to_string(tets.size()));

  MeshFile out{SimplicialComplex3(nv, std::move(tets), std::move(shifts), std::move(embedding)),
               std::nullopt};
  if (lengths_count >= 0) {
    const int ne = out.complex.edge_count();
    if (lengths_count != ne)
      throw InputError("m3t: lengths block has " + std::to_string(lengths_count) +
                       " entries, complex has " + std::to_string(ne) + " edges");
    std::vector<double> l(ne, -1.0);
    for (auto [e, value] : raw_lengths) {
      if (e < 0 || e >= ne) throw InputError("m3t: edge id " + std::to_string(e) + " out of range");
      if (l[e] >= 0) throw InputError("m3t: duplicate length for edge " + std::to_string(e));
      l[e] = value;
    }
    out.lengths = std::move(l);
  }
  return out;
}

MeshFile read_m3t_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file '" + path + "'");
  return read_m3t(in);
}

void write_m3t(std::ostream& out, const SimplicialComplex3& c, const std::vector<double>* lengths) {
  out << std::setprecision(17);
  out << "m3t 1\nvertices " << c.vertex_count() << '\n';
  if (const auto& e = c.embedding()) {
    out << "coords " << e->dim << '\n';
    for (const auto& x : e->coords) {
      for (int k = 0; k < e->dim; ++k) out << (k ? " " : "") << x(k);
      out << '\n';
    }
    if (c.has_shifts()) {
      out << "periods\n";
      for (const auto& p : e->periods) {
        for (int k = 0; k < e->dim; ++k) out << (k ? " " : "") << p(k);
        out << '\n';
      }
    }
  }
  out << "tets " << c.tet_count() << '\n';
  for (const auto& t : c.tets()) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  if (c.has_shifts()) {
    out << "shifts " << c.tet_count() << '\n';
    for (int t = 0; t < c.tet_count(); ++t) {
      bool first = true;
      for (const auto& s : c.tet_shifts(t))
        for (int x : s) {
          out << (first ? "" : " ") << x;
          first = false;
        }
      out << '\n';
    }
  }
  if (lengths) {
    if (static_cast<int>(lengths->size()) != c.edge_count())
      throw InputError("length vector does not match the complex");
    out << "lengths " << lengths->size() << '\n';
    for (std::size_t e = 0; e < lengths->size(); ++e) out << e << ' ' << (*lengths)[e] << '\n';
  }
}

}  // namespace circlemap
