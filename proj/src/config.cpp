#include "circlemap/config.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "circlemap/error.hpp"

namespace circlemap {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& grammar() {
  static const std::map<std::string, std::set<std::string>> g{
      {"manifold", {"kind", "n", "genus", "level", "layers", "circle_length", "path"}},
      {"metric", {"kind", "star", "profile", "mean", "amplitude", "fiber_area"}},
      {"class", {"coordinates"}},
      {"check",
       {"id", "tol", "reference_norm", "sphere_free", "norm", "tori", "C", "r_values",
        "delta_values"}},
      {"sweep", {"levels", "seed"}},
  };
  return g;
}

std::string strip_comment(const std::string& line) {
  auto cut = line.find_first_of("#;");
  std::string s = cut == std::string::npos ? line : line.substr(0, cut);
  auto last = s.find_last_not_of(" \t\r");
  return last == std::string::npos ? std::string() : s.substr(0, last + 1);
}

template <class T>
T parse_value(const std::string& section, const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value;
  std::string rest;
  if (!(in >> value) || (in >> rest))
    throw InputError("config [" + section + "] " + key + ": cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InputError("config [" + section + "] " + key + ": expected true or false, got '" + text + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& section, const std::string& key, std::string text) {
  for (char& ch : text)
    if (ch == ',') ch = ' ';
  std::istringstream in(text);
  std::vector<T> out;
  std::string token;
  while (in >> token) out.push_back(parse_value<T>(section, key, token));
  return out;
}

void require_one_of(const std::string& section, const std::string& key, const std::string& value,
                    std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw InputError("config [" + section + "] " + key + ": '" + value + "' is not one of " + list);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

}  // namespace

Config parse_config(std::istream& in) {
  // Strip comments first: property_tree only knows ';' at line start.
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) cleaned << strip_comment(line) << '\n';
  std::istringstream clean_in(cleaned.str());
  ptree tree;
  try {
    boost::property_tree::read_ini(clean_in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  Config c;
  for (const auto& [section, body] : tree) {
    auto known = grammar().find(section);
    if (known == grammar().end()) {
      if (!body.data().empty()) throw InputError("config: key '" + section + "' outside any section");
      throw InputError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!known->second.count(key))
        throw InputError("config [" + section + "]: unknown key '" + key + "'");
      const std::string v = node.data();
      if (v.empty()) continue;  // empty value keeps the default
      if (section == "manifold") {
        auto& m = c.manifold;
        if (key == "kind") {
          require_one_of(section, key, v,
                         {"three-torus", "sphere-circle", "surface-circle", "file", "model"});
          m.kind = v;
        } else if (key == "n") {
          m.n = parse_value<int>(section, key, v);
        } else if (key == "genus") {
          m.genus = parse_value<int>(section, key, v);
        } else if (key == "level") {
          m.level = parse_value<int>(section, key, v);
        } else if (key == "layers") {
          m.layers = parse_value<int>(section, key, v);
        } else if (key == "circle_length") {
          m.circle_length = parse_value<double>(section, key, v);
        } else {
          m.path = v;
        }
      } else if (section == "metric") {
        auto& m = c.metric;
        if (key == "kind") {
          require_one_of(section, key, v, {"flat", "round", "product", "lengths", "warped"});
          m.kind = v;
        } else if (key == "star") {
          require_one_of(section, key, v, {"circumcentric", "fem"});
          m.star = v;
        } else if (key == "profile") {
          require_one_of(section, key, v, {"constant", "sine"});
          m.profile = v;
        } else if (key == "mean") {
          m.mean = parse_value<double>(section, key, v);
        } else if (key == "amplitude") {
          m.amplitude = parse_value<double>(section, key, v);
        } else {
          m.fiber_area = parse_value<double>(section, key, v);
        }
      } else if (section == "class") {
        c.class_coordinates = parse_list<long long>(section, key, v);
      } else if (section == "check") {
        auto& k = c.check;
        if (key == "id") {
          k.id = v;
        } else if (key == "tol") {
          k.tol = parse_value<double>(section, key, v);
        } else if (key == "reference_norm") {
          k.reference_norm = parse_value<double>(section, key, v);
        } else if (key == "sphere_free") {
          k.sphere_free = parse_bool(section, key, v);
        } else if (key == "norm") {
          k.norm = parse_value<int>(section, key, v);
        } else if (key == "tori") {
          k.tori = parse_value<int>(section, key, v);
        } else if (key == "C") {
          k.complement_curvature = parse_value<double>(section, key, v);
        } else if (key == "r_values") {
          k.r_values = parse_list<double>(section, key, v);
        } else {
          k.delta_values = parse_list<double>(section, key, v);
        }
      } else {
        if (key == "levels") {
          c.sweep.levels = parse_value<int>(section, key, v);
        } else {
          c.sweep.seed = parse_value<std::uint64_t>(section, key, v);
        }
      }
    }
  }
  if (c.manifold.kind == "file" && c.manifold.path.empty())
    throw InputError("config [manifold]: kind = file needs a path");
  return c;
}

Config parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string canonical_text(const Config& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& m = c.manifold;
  os << "[manifold]\nkind=" << m.kind << "\nn=" << m.n << "\ngenus=" << m.genus
     << "\nlevel=" << m.level << "\nlayers=" << m.layers << "\ncircle_length=" << m.circle_length
     << "\npath=" << m.path << '\n';
  const auto& g = c.metric;
  os << "[metric]\nkind=" << g.kind << "\nstar=" << g.star << "\nprofile=" << g.profile
     << "\nmean=" << g.mean << "\namplitude=" << g.amplitude << "\nfiber_area=" << g.fiber_area
     << '\n';
  os << "[class]\ncoordinates=" << join(c.class_coordinates) << '\n';
  const auto& k = c.check;
  os << "[check]\nid=" << k.id << "\ntol=";
  if (k.tol) os << *k.tol;
  os << "\nreference_norm=";
  if (k.reference_norm) os << *k.reference_norm;
  os << "\nsphere_free=" << k.sphere_free << "\nnorm=" << k.norm << "\ntori=" << k.tori
     << "\nC=" << k.complement_curvature << "\nr_values=" << join(k.r_values)
     << "\ndelta_values=" << join(k.delta_values) << '\n';
  os << "[sweep]\nlevels=" << c.sweep.levels << "\nseed=" << c.sweep.seed << '\n';
  return os.str();
}

}  // namespace circlemap
