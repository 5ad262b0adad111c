#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace circlemap {

/// INI-style run configuration.
///
///   [manifold]  kind = three-torus | sphere-circle | surface-circle | file | model
///               n (three-torus grid), genus, level, layers (0: 3 * 2^level),
///               circle_length, path (file meshes)
///   [metric]    kind = flat | round | product | lengths | warped (empty: default
///               for the manifold), star = circumcentric | fem,
///               profile = constant | sine, mean, amplitude, fiber_area (torus models)
///   [class]     coordinates = integers in the cocycle basis (empty: first generator)
///   [check]     id, tol, reference_norm, sphere_free, norm, tori, C,
///               r_values, delta_values (lists separated by spaces or commas)
///   [sweep]     levels, seed
///
/// '#' and ';' start comments. An empty value keeps the default. Unknown
/// sections and keys are errors.
struct ManifoldConfig {
  std::string kind = "three-torus";
  int n = 3;
  int genus = 0;
  int level = 1;
  int layers = 0;
  double circle_length = 1.0;
  std::string path;

  int layer_count() const { return layers > 0 ? layers : 3 << level; }
};

struct MetricConfig {
  std::string kind;
  std::string star = "circumcentric";
  std::string profile = "constant";
  double mean = 1.0;
  double amplitude = 0.0;
  double fiber_area = 1.0;
};

struct CheckConfig {
  std::string id;
  std::optional<double> tol;
  std::optional<double> reference_norm;
  bool sphere_free = false;
  int norm = 2;
  int tori = 0;
  double complement_curvature = 100.0;
  std::vector<double> r_values{1e2, 1e3, 1e4};
  std::vector<double> delta_values{1e-3};
};

struct SweepConfig {
  int levels = 64;
  std::uint64_t seed = 1;
};

struct Config {
  ManifoldConfig manifold;
  MetricConfig metric;
  std::vector<long long> class_coordinates;
  CheckConfig check;
  SweepConfig sweep;
};

/// Throws InputError naming the section and key on any malformed entry.
Config parse_config(std::istream& in);
Config parse_config_string(const std::string& text);
Config load_config(const std::string& path);

/// Normalized text listing every field; equal configs give equal text.
std::string canonical_text(const Config& c);

}  // namespace circlemap
