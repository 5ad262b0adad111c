#include "circlemap/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "circlemap/error.hpp"
#include "circlemap/io.hpp"

namespace circlemap {

namespace {

constexpr double kPi = 3.14159265358979323846;

void add(VerificationReport& r, std::string name, double value, std::string units = "1") {
  r.quantities.push_back({std::move(name), value, std::move(units)});
}

void add_tol(VerificationReport& r, std::string name, double value, std::string units = "1") {
  r.tolerances.push_back({std::move(name), value, std::move(units)});
}

std::string options_text(const CheckOptions& o) {
  std::ostringstream os;
  os << std::setprecision(17) << "tol=";
  if (o.tol) os << *o.tol;
  os << " levels=" << o.levels << " seed=" << o.seed << " reference=";
  if (o.reference_norm) os << *o.reference_norm;
  os << " sphere_free=" << o.sphere_free;
  return os.str();
}

std::string model_text(const WarpedProductModel& m) {
  std::ostringstream os;
  os << std::setprecision(17) << "model fiber_euler=" << m.fiber_euler
     << " fiber_area=" << m.fiber_area << " L=" << m.circle_length
     << " profile=" << m.profile.name;
  return os.str();
}

void set_digest(VerificationReport& r, const std::string& inputs, const CheckOptions& o) {
  r.inputs_digest = fnv1a_hex(r.check_id + "\n" + inputs + "\n" + options_text(o));
}

SweepTable run_sweep(const MeshProblem& p, const HarmonicOneForm& form, const CheckOptions& o) {
  SweepOptions so;
  so.levels = o.levels;
  so.seed = o.seed;
  so.cycles = &p.basis.cycles;
  return sweep(p.complex, p.metric, form, so);
}

void attach_sweep(VerificationReport& r, const SweepTable& t) {
  r.table_columns = {"theta", "chi", "area", "components", "chi_minus", "perturbed"};
  for (const auto& s : t.samples)
    r.table.push_back({s.theta, double(s.euler_characteristic), s.area,
                       double(s.components.size()), double(s.chi_minus),
                       s.perturbed ? 1.0 : 0.0});
  int n_min = 1 << 30, n_max = 0;
  for (const auto& s : t.samples) {
    n_min = std::min(n_min, int(s.components.size()));
    n_max = std::max(n_max, int(s.components.size()));
  }
  add(r, "chi_mean", t.chi.mean);
  add(r, "chi_standard_error", t.chi.standard_error);
  add(r, "area_mean", t.area.mean, "length^2");
  add(r, "area_standard_error", t.area.standard_error, "length^2");
  add(r, "N_theta_min", n_min);
  add(r, "N_theta_max", n_max);
  add(r, "levels_sampled", double(t.samples.size()));
  add(r, "levels_rejected", t.rejected);
}

// Volume-weighted mean of |du| over the tets around each edge.
std::vector<double> edge_speed(const SimplicialComplex3& c, const ReggeMetric& g,
                               const std::vector<double>& tet_speed) {
  std::vector<double> out(c.edge_count(), 0.0);
  for (int e = 0; e < c.edge_count(); ++e) {
    CompensatedSum num, den;
    for (int t : c.edge_tets(e)) {
      num.add(tet_speed[t] * g.tets[t].volume);
      den.add(g.tets[t].volume);
    }
    out[e] = den.value() > 0 ? num.value() / den.value() : 0.0;
  }
  return out;
}

double curvature_spread(const CurvatureField& f) {
  if (f.vertex_density.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(f.vertex_density.begin(), f.vertex_density.end());
  return *hi - *lo;
}

double relative_margin(double tol, double a, double b) {
  return tol * std::max(std::abs(a), std::abs(b)) + 1e-10;
}

// Stratified levels for model sweeps, same draw scheme as the mesh sweep.
std::vector<double> model_levels(const CheckOptions& o) {
  if (o.levels < 8) throw InputError("sweep needs at least 8 levels");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out;
  for (int i = 0; i < o.levels; ++i) out.push_back((i + unit(rng)) / o.levels);
  return out;
}

double model_min_r(const WarpedProductModel& m) {
  return minimize_on_circle([&](double t) { return model_scalar_curvature(m, t); },
                            m.circle_length);
}

// Integral over M of |Hess u|^2: A * integral of 6 c^2 f'^2 / f^4 dt.
double model_hessian_integral(const WarpedProductModel& m, double c) {
  return m.fiber_area * integrate(
                            [&](double t) {
                              double f = m.profile.f(t);
                              return model_hessian_norm_sq(m, c, t) * f * f;
                            },
                            0, m.circle_length);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

double VerificationReport::value(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return q.value;
  throw InputError("report " + check_id + " has no quantity '" + name + "'");
}

bool VerificationReport::has(const std::string& name) const {
  return std::any_of(quantities.begin(), quantities.end(),
                     [&](const Quantity& q) { return q.name == name; });
}

nlohmann::json to_json(const VerificationReport& r, bool include_runtime) {
  auto list = [](const std::vector<Quantity>& qs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& q : qs) a.push_back({{"name", q.name}, {"value", q.value}, {"units", q.units}});
    return a;
  };
  nlohmann::json j;
  j["check_id"] = r.check_id;
  j["inputs_digest"] = r.inputs_digest;
  j["pass"] = r.pass;
  j["quantities"] = list(r.quantities);
  j["tolerances"] = list(r.tolerances);
  j["notes"] = r.notes;
  j["table"] = {{"columns", r.table_columns}, {"rows", r.table}};
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

VerificationReport report_from_json(const nlohmann::json& j) {
  try {
    VerificationReport r;
    r.check_id = j.at("check_id").get<std::string>();
    r.inputs_digest = j.at("inputs_digest").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    auto list = [](const nlohmann::json& a) {
      std::vector<Quantity> out;
      for (const auto& q : a) {
        Quantity x;
        x.name = q.at("name").get<std::string>();
        x.value = q.at("value").is_null() ? std::nan("") : q.at("value").get<double>();
        x.units = q.at("units").get<std::string>();
        out.push_back(std::move(x));
      }
      return out;
    };
    r.quantities = list(j.at("quantities"));
    r.tolerances = list(j.at("tolerances"));
    r.notes = j.value("notes", std::vector<std::string>{});
    if (j.contains("table")) {
      r.table_columns = j["table"].value("columns", std::vector<std::string>{});
      r.table = j["table"].value("rows", std::vector<std::vector<double>>{});
    }
    r.runtime_seconds = j.value("runtime_seconds", 0.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  std::ostringstream suffix;
  suffix << ".tmp-" << std::hash<std::thread::id>{}(std::this_thread::get_id());
  const std::string tmp = path + suffix.str();
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp + "'");
    out << text;
    out.flush();
    if (!out) throw InputError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

void write_report_atomic(const std::string& path, const VerificationReport& r) {
  write_text_atomic(path, to_json(r).dump(2) + "\n");
}

void write_table_csv(std::ostream& out, const VerificationReport& r) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < r.table_columns.size(); ++i)
    out << (i ? "," : "") << r.table_columns[i];
  out << '\n';
  for (const auto& row : r.table) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::optional<double> known_thurston_norm(const ManifoldConfig& m,
                                          const std::vector<long long>& coordinates) {
  if (m.kind == "three-torus") return 0.0;
  if (m.kind == "sphere-circle" || m.kind == "surface-circle" || m.kind == "model") {
    const int genus = m.kind == "sphere-circle" ? 0 : m.genus;
    long long k = 1;
    if (!coordinates.empty()) {
      k = coordinates[0];
      for (std::size_t i = 1; i < coordinates.size(); ++i)
        if (coordinates[i] != 0) return std::nullopt;
    }
    return double(std::llabs(k)) * std::max(0, 2 * genus - 2);
  }
  return std::nullopt;
}

MeshProblem mesh_problem_from_config(const Config& config) {
  const auto& m = config.manifold;
  const auto& mc = config.metric;
  const StarKind star = mc.star == "fem" ? StarKind::kFiniteElement : StarKind::kCircumcentric;
  MeshProblem p;
  p.description = canonical_text(config);
  std::string kind = mc.kind;
  std::optional<std::vector<double>> file_lengths;

  if (m.kind == "model") throw InputError("model manifolds have no mesh");
  if (m.kind == "three-torus") {
    p.complex = build_three_torus(m.n);
    if (kind.empty()) kind = "flat";
  } else if (m.kind == "sphere-circle" || m.kind == "surface-circle") {
    const int genus = m.kind == "sphere-circle" ? 0 : m.genus;
    if (genus < 0) throw InputError("genus must be nonnegative");
    p.fiber = build_fiber(genus, m.level);
    p.complex = build_surface_times_circle(*p.fiber, m.layer_count(), m.circle_length);
    if (kind.empty()) kind = genus == 0 ? "round" : "product";
  } else {
    MeshFile f = read_m3t_file(m.path);
    p.complex = std::move(f.complex);
    file_lengths = std::move(f.lengths);
    if (kind.empty()) kind = file_lengths ? "lengths" : "flat";
  }

  if (kind == "flat") {
    if (!p.complex.embedding()) throw InputError("flat metric needs vertex coordinates");
    p.metric = regge_from_coordinates(p.complex, flat_metric(), star);
  } else if (kind == "round") {
    if (!p.complex.embedding() || p.complex.embedding()->dim != 4)
      throw InputError("round metric needs a sphere-circle chart");
    p.metric = regge_from_coordinates(p.complex, round_sphere_times_circle(), star);
  } else if (kind == "product") {
    if (!p.fiber) throw InputError("product metric needs a built product manifold");
    p.metric = product_metric(p.complex, *p.fiber, m.layer_count(), m.circle_length, star);
  } else if (kind == "lengths") {
    if (!file_lengths) throw InputError("lengths metric needs a mesh file with a lengths block");
    p.metric = regge_from_lengths(p.complex, *file_lengths, star);
  } else {
    throw InputError("metric kind '" + kind + "' does not apply to meshes");
  }

  auto diagnostics = validate(p.complex);
  if (!diagnostics.empty()) {
    std::ostringstream os;
    os << "invalid mesh (" << diagnostics.size() << " violations), first: "
       << diagnostics[0].kind << " at " << diagnostics[0].simplex << ": " << diagnostics[0].detail;
    throw InputError(os.str());
  }

  p.basis = compute_homology(p.complex);
  if (p.basis.rank() == 0) throw InputError("b1 = 0: the manifold has no nontrivial class");
  p.alpha.degree = 2;
  p.alpha.coordinates = config.class_coordinates;
  if (p.alpha.coordinates.empty()) {
    p.alpha.coordinates.assign(p.basis.rank(), 0);
    p.alpha.coordinates[0] = 1;
  }
  p.omega = cocycle_for_class(p.basis, p.alpha);
  p.reference_norm = config.check.reference_norm
                         ? config.check.reference_norm
                         : known_thurston_norm(m, config.class_coordinates);
  return p;
}

WarpedProductModel model_from_config(const Config& config) {
  const auto& m = config.manifold;
  const auto& mc = config.metric;
  if (m.kind != "model") throw InputError("manifold kind '" + m.kind + "' is not a model");
  if (!mc.kind.empty() && mc.kind != "warped")
    throw InputError("model manifolds take the warped metric");
  WarpingProfile f = mc.profile == "sine" ? sine_profile(mc.mean, mc.amplitude, m.circle_length)
                                          : constant_profile(mc.mean);
  WarpedProductModel model;
  if (m.genus < 0) throw InputError("genus must be nonnegative");
  if (m.genus == 0) {
    model = sphere_model(std::move(f), m.circle_length);
  } else if (m.genus == 1) {
    model = torus_model(mc.fiber_area, std::move(f), m.circle_length);
  } else {
    model = hyperbolic_model(m.genus, std::move(f), m.circle_length);
  }
  validate_model(model);
  return model;
}

CheckOptions options_from_config(const Config& config) {
  CheckOptions o;
  o.tol = config.check.tol;
  o.levels = config.sweep.levels;
  o.seed = config.sweep.seed;
  o.reference_norm = config.check.reference_norm;
  o.sphere_free = config.check.sphere_free;
  return o;
}

VerificationReport check_main_inequality_discrete(const MeshProblem& p, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "main-inequality";
  set_digest(r, p.description, o);
  const double tol = o.tol.value_or(0.05);
  if (p.alpha.is_zero()) throw InputError("the class must be nontrivial");

  const HarmonicOneForm form = solve_harmonic(p.complex, p.metric, p.omega);
  const SweepTable table = run_sweep(p, form, o);
  const CurvatureField field = deficit_angles(p.complex, p.metric);
  const std::vector<double> speed =
      edge_speed(p.complex, p.metric, pointwise_speed(p.complex, p.metric, form.h));

  CompensatedSum rhs;
  double max_deficit = 0.0;
  for (int e = 0; e < p.complex.edge_count(); ++e) {
    rhs.add(field.deficit[e] * p.metric.lengths[e] * speed[e]);
    max_deficit = std::max(max_deficit, std::abs(field.deficit[e]));
  }
  const double lhs = 2 * kPi * table.chi.mean;
  const double margin = relative_margin(tol, lhs, rhs.value());
  r.pass = lhs >= rhs.value() - margin;

  add(r, "lhs", lhs);
  add(r, "rhs", rhs.value());
  add(r, "slack", lhs - rhs.value());
  add(r, "harmonic_norm", harmonic_norm(form), "length^(1/2)");
  add(r, "energy", form.energy, "length");
  add(r, "max_abs_deficit", max_deficit, "rad");
  attach_sweep(r, table);
  add_tol(r, "tol_discrete", tol);
  add_tol(r, "absolute_floor", 1e-10);
  r.notes.push_back("Hessian term dropped: lhs >= rhs is the weakened inequality");
  return r;
}

VerificationReport check_thurston_bound(const MeshProblem& p, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "thurston-bound";
  set_digest(r, p.description, o);
  const double tol = o.tol.value_or(0.05);
  if (p.alpha.is_zero()) throw InputError("the class must be nontrivial");

  const HarmonicOneForm form = solve_harmonic(p.complex, p.metric, p.omega);
  const CurvatureField field = deficit_angles(p.complex, p.metric);
  const ScalarStats stats = scalar_stats(field, p.metric);
  const double norm_h = harmonic_norm(form);
  const double bound = norm_h * stats.negative_l2 / (4 * kPi);
  const SweepTable table = run_sweep(p, form, o);

  int chi_minus_min = 1 << 30, spheres = 0;
  for (const auto& s : table.samples) {
    chi_minus_min = std::min(chi_minus_min, s.chi_minus);
    for (const auto& comp : s.components)
      if (comp.euler_characteristic > 0) ++spheres;
  }
  r.pass = true;
  add(r, "bound", bound);
  add(r, "harmonic_norm", norm_h, "length^(1/2)");
  add(r, "curvature_l2_negative", stats.negative_l2, "length^(-1/2)");
  add(r, "chi_minus_min", chi_minus_min);
  add(r, "sphere_components", spheres);
  add(r, "hessian_surrogate", hessian_surrogate(p.complex, p.metric, form.h), "length^-1");
  add(r, "curvature_spread", curvature_spread(field), "length^-2");

  const auto reference = o.reference_norm ? o.reference_norm : p.reference_norm;
  if (reference) {
    add(r, "reference_norm", *reference);
    add(r, "bound_gap", bound - *reference);
    r.pass = *reference <= bound + tol * std::max(1.0, *reference) + 1e-10 &&
             *reference <= chi_minus_min;
    r.notes.push_back("reference Thurston norm is known-model input");
    if (std::abs(bound - *reference) <= tol * std::max(1.0, *reference) + 1e-10)
      r.notes.push_back("equality case within tolerance; see hessian_surrogate");
  } else {
    r.notes.push_back("no reference norm: bound and chi_minus_min reported only");
  }
  if (spheres > 0) {
    r.notes.push_back("sphere fiber components detected: nonseparating spheres, the bound's "
                      "hypothesis fails on this manifold");
    if (o.sphere_free) {
      r.notes.push_back("hypothesis violation: manifold was declared sphere-free");
      r.pass = false;
    }
  }
  attach_sweep(r, table);
  add_tol(r, "tol_discrete", tol);
  return r;
}

VerificationReport check_thurston_bound(const WarpedProductModel& m, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "thurston-bound";
  set_digest(r, model_text(m), o);
  const double tol = o.tol.value_or(1e-8);
  const ModelHarmonicForm form = model_harmonic_form(m);
  const double neg_sq = m.fiber_area * integrate(
                                           [&](double t) {
                                             double f = m.profile.f(t);
                                             double rn = std::min(0.0, model_scalar_curvature(m, t));
                                             return f * f * rn * rn;
                                           },
                                           0, m.circle_length);
  const double bound = form.harmonic_norm * std::sqrt(neg_sq) / (4 * kPi);
  const int chi_minus = std::max(0, -m.fiber_euler);
  add(r, "bound", bound);
  add(r, "harmonic_norm", form.harmonic_norm, "length^(1/2)");
  add(r, "curvature_l2_negative", std::sqrt(neg_sq), "length^(-1/2)");
  add(r, "chi_minus_min", chi_minus);
  add(r, "hessian_integral", model_hessian_integral(m, form.c), "length^-1");
  const double reference = o.reference_norm.value_or(double(chi_minus));
  add(r, "reference_norm", reference);
  add(r, "bound_gap", bound - reference);
  r.pass = reference <= bound + tol * std::max(1.0, reference) && reference <= chi_minus;
  if (m.kind == FiberKind::kSphere) {
    r.notes.push_back("sphere fibers: nonseparating spheres, the bound's hypothesis fails");
    if (o.sphere_free) {
      r.notes.push_back("hypothesis violation: manifold was declared sphere-free");
      r.pass = false;
    }
  }
  r.notes.push_back("analytic evaluation on the warped product");
  add_tol(r, "tol_analytic", tol);
  return r;
}

VerificationReport check_corollary_psc(const MeshProblem& p, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "corollary-psc";
  set_digest(r, p.description, o);
  const double tol = o.tol.value_or(0.05);
  const CurvatureField field = deficit_angles(p.complex, p.metric);
  const ScalarStats stats = scalar_stats(field, p.metric);
  if (!(stats.min_r > 0)) throw InputError("PSC hypothesis fails: min R = " + fmt(stats.min_r));

  const HarmonicOneForm form = solve_harmonic(p.complex, p.metric, p.omega);
  const SweepTable table = run_sweep(p, form, o);
  const double lhs = 2 * kPi * table.chi.mean;
  const double rhs = 0.5 * stats.min_r * table.area.mean;
  r.pass = lhs >= rhs - relative_margin(tol, lhs, rhs);
  add(r, "lhs", lhs);
  add(r, "rhs", rhs);
  add(r, "slack", lhs - rhs);
  add(r, "minR", stats.min_r, "length^-2");
  attach_sweep(r, table);
  add_tol(r, "tol_discrete", tol);
  return r;
}

VerificationReport check_corollary_psc(const WarpedProductModel& m, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "corollary-psc";
  set_digest(r, model_text(m), o);
  const double tol = o.tol.value_or(1e-8);
  validate_model(m);
  const double min_r = model_min_r(m);
  if (!(min_r > 0)) throw InputError("PSC hypothesis fails: min R = " + fmt(min_r));
  const ModelHarmonicForm form = model_harmonic_form(m);
  // Integral of Area over theta: A f^2 against d(theta) = c f^-2 dt.
  const double area_integral = integrate(
      [&](double t) {
        double f = m.profile.f(t);
        return m.fiber_area * f * f * model_speed(m, form.c, t);
      },
      0, m.circle_length);
  const double lhs = 2 * kPi * m.fiber_euler;
  const double rhs = 0.5 * min_r * area_integral;
  r.pass = lhs >= rhs - relative_margin(tol, lhs, rhs);
  add(r, "lhs", lhs);
  add(r, "rhs", rhs);
  add(r, "slack", lhs - rhs);
  add(r, "minR", min_r, "length^-2");
  add(r, "area_integral", area_integral, "length^2");
  r.table_columns = {"theta", "t", "area", "chi", "components"};
  for (double theta : model_levels(o)) {
    ModelFiber fib = model_fiber(m, theta);
    r.table.push_back({fib.theta, fib.t, fib.area, double(fib.euler), double(fib.components)});
  }
  add_tol(r, "tol_analytic", tol);
  return r;
}

VerificationReport check_systole(const MeshProblem& p, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "systole";
  set_digest(r, p.description, o);
  const double tol = o.tol.value_or(0.05);
  if (p.basis.betti[2] == 0) throw InputError("b2 = 0: no nonseparating surfaces");
  const CurvatureField field = deficit_angles(p.complex, p.metric);
  const ScalarStats stats = scalar_stats(field, p.metric);
  if (!(stats.min_r > 0)) throw InputError("PSC hypothesis fails: min R = " + fmt(stats.min_r));

  const HarmonicOneForm form = solve_harmonic(p.complex, p.metric, p.omega);
  const SweepTable table = run_sweep(p, form, o);
  double sys2 = std::numeric_limits<double>::infinity();
  for (const auto& s : table.samples)
    for (const auto& comp : s.components) sys2 = std::min(sys2, comp.area);
  int area_violations = 0, chi_violations = 0;
  for (const auto& s : table.samples) {
    const int n = int(s.components.size());
    if (s.area < n * sys2 * (1 - 1e-12)) ++area_violations;
    if (s.euler_characteristic > 2 * n) ++chi_violations;
  }
  const double product = stats.min_r * sys2;
  r.pass = area_violations == 0 && chi_violations == 0 && product <= 8 * kPi * (1 + tol);
  add(r, "minR", stats.min_r, "length^-2");
  add(r, "sys2_estimate", sys2, "length^2");
  add(r, "product", product);
  add(r, "product_gap", 8 * kPi - product);
  add(r, "area_violations", area_violations);
  add(r, "chi_violations", chi_violations);
  add(r, "hessian_surrogate", hessian_surrogate(p.complex, p.metric, form.h), "length^-1");
  add(r, "curvature_spread", curvature_spread(field), "length^-2");
  r.notes.push_back("sys2 estimated by the least sampled fiber component area (an upper bound)");
  attach_sweep(r, table);
  add_tol(r, "tol_discrete", tol);
  return r;
}

VerificationReport check_systole(const WarpedProductModel& m, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "systole";
  set_digest(r, model_text(m), o);
  const double tol = o.tol.value_or(1e-8);
  validate_model(m);
  const double min_r = model_min_r(m);
  if (!(min_r > 0)) throw InputError("PSC hypothesis fails: min R = " + fmt(min_r));
  const SystoleModel sm = systole_model_check(m);
  const ModelHarmonicForm form = model_harmonic_form(m);

  r.table_columns = {"theta", "t", "area", "chi", "components"};
  int area_violations = 0, chi_violations = 0;
  for (double theta : model_levels(o)) {
    ModelFiber fib = model_fiber(m, theta);
    if (fib.area < fib.components * sm.sys2 * (1 - 1e-12)) ++area_violations;
    if (fib.euler > 2 * fib.components) ++chi_violations;
    r.table.push_back({fib.theta, fib.t, fib.area, double(fib.euler), double(fib.components)});
  }
  r.pass = area_violations == 0 && chi_violations == 0 && sm.product <= 8 * kPi * (1 + tol);
  add(r, "minR", sm.min_r, "length^-2");
  add(r, "sys2", sm.sys2, "length^2");
  add(r, "product", sm.product);
  add(r, "product_gap", 8 * kPi - sm.product);
  add(r, "area_violations", area_violations);
  add(r, "chi_violations", chi_violations);
  add(r, "hessian_integral", model_hessian_integral(m, form.c), "length^-1");
  r.notes.push_back("sys2 is taken as the least fiber area (model-family assumption, not proved)");
  if (std::abs(sm.product - 8 * kPi) <= 1e-10 * 8 * kPi)
    r.notes.push_back("equality case: product = 8 pi; see hessian_integral");
  add_tol(r, "tol_analytic", tol);
  return r;
}

VerificationReport check_km_convergence(const KMGrid& grid, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "km-convergence";
  std::ostringstream in;
  in << std::setprecision(17) << "km n=" << grid.thurston_norm << " p=" << grid.tori
     << " C=" << grid.complement_curvature << " r=";
  for (double x : grid.r_values) in << x << ',';
  in << " delta=";
  for (double x : grid.delta_values) in << x << ',';
  set_digest(r, in.str(), o);
  const double tol = o.tol.value_or(0.005);
  if (grid.r_values.empty() || grid.delta_values.empty())
    throw InputError("km grid needs at least one r and one delta");

  std::vector<double> rs = grid.r_values, deltas = grid.delta_values;
  std::sort(rs.begin(), rs.end());
  std::sort(deltas.begin(), deltas.end());
  r.table_columns = {"r", "delta", "curvature_l2_sq", "energy_upper", "product_bound"};
  bool monotone = true;
  double corner = 0.0;
  for (double delta : deltas) {
    double previous = std::numeric_limits<double>::infinity();
    for (double rv : rs) {
      KMFamilySpec s{grid.thurston_norm, grid.tori, delta, rv, grid.complement_curvature};
      KMFamilyValues v = km_family_eval(s);
      r.table.push_back({rv, delta, v.curvature_l2_sq, v.energy_upper, v.product_bound});
      if (v.product_bound > previous * (1 + 1e-12)) monotone = false;
      previous = v.product_bound;
      if (delta == deltas.front() && rv == rs.back()) corner = v.product_bound;
    }
  }
  const double target = 4 * kPi * grid.thurston_norm;
  const double error = target > 0 ? std::abs(corner - target) / target : std::abs(corner);
  r.pass = monotone && error <= tol;
  add(r, "product_bound_corner", corner);
  add(r, "target", target);
  add(r, target > 0 ? "relative_error" : "absolute_error", error);
  add(r, "monotone_in_r", monotone ? 1.0 : 0.0);
  add_tol(r, target > 0 ? "tol_relative" : "tol_absolute", tol);
  r.notes.push_back("C(delta) is a supplied constant");
  return r;
}

VerificationReport check_main_identity(const WarpedProductModel& m, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "main-identity";
  set_digest(r, model_text(m), o);
  const double tol = o.tol.value_or(1e-8);
  const IdentitySides s = main_identity_sides(m);
  add(r, "lhs", s.lhs);
  add(r, "rhs", s.rhs);
  add(r, "hessian_term", s.hessian_term);
  add(r, "curvature_term", s.curvature_term);
  add(r, "c", s.c, "length");
  add(r, "slack", s.lhs - s.rhs);
  if (m.fiber_euler != 0) {
    const double rel = std::abs(s.lhs - s.rhs) / std::abs(s.lhs);
    add(r, "relative_gap", rel);
    r.pass = rel <= tol;
    add_tol(r, "tol_relative", tol);
  } else {
    r.pass = std::abs(s.lhs) <= 1e-10 && std::abs(s.rhs) <= 1e-10;
    add_tol(r, "tol_absolute", 1e-10);
  }
  if (std::abs(s.lhs - s.rhs) > tol * std::max(1.0, std::abs(s.lhs)))
    r.notes.push_back("strict slack above tolerance on a submersion model");
  return r;
}

VerificationReport check_weighted_inequality(const WarpedProductModel& m, const CheckOptions& o) {
  VerificationReport r;
  r.check_id = "weighted-inequality";
  set_digest(r, model_text(m), o);
  const double tol = o.tol.value_or(1e-8);
  const double w = 2 * kPi / m.circle_length;
  TestFunction psi{[w](double t) { return 1 + 0.5 * std::cos(w * t); },
                   [w](double t) { return -0.5 * w * std::sin(w * t); }};
  const WeightedSides s = weighted_inequality(m, psi);
  r.pass = s.rhs >= s.lhs - tol * std::max({1.0, std::abs(s.lhs), std::abs(s.rhs)});
  add(r, "lhs", s.lhs);
  add(r, "rhs", s.rhs);
  add(r, "slack", s.slack);
  add_tol(r, "tol_analytic", tol);
  r.notes.push_back("test function psi(t) = 1 + cos(2 pi t / L) / 2");
  return r;
}

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids{
      "main-inequality", "thurston-bound",  "corollary-psc",      "systole",
      "km-convergence",  "main-identity",   "weighted-inequality"};
  return ids;
}

VerificationReport run_check(const Config& config, const std::string& id_in) {
  const std::string id = id_in.empty() ? config.check.id : id_in;
  if (std::find(check_ids().begin(), check_ids().end(), id) == check_ids().end())
    throw InputError("unknown check id '" + id + "'");
  const auto start = std::chrono::steady_clock::now();
  const CheckOptions o = options_from_config(config);
  const bool model = config.manifold.kind == "model";

  VerificationReport r;
  if (id == "km-convergence") {
    KMGrid g{config.check.norm, config.check.tori, config.check.complement_curvature,
             config.check.r_values, config.check.delta_values};
    r = check_km_convergence(g, o);
  } else if (id == "main-identity" || id == "weighted-inequality") {
    if (!model) throw InputError(id + " needs a model manifold");
    const WarpedProductModel m = model_from_config(config);
    r = id == "main-identity" ? check_main_identity(m, o) : check_weighted_inequality(m, o);
  } else if (model) {
    const WarpedProductModel m = model_from_config(config);
    if (id == "thurston-bound") {
      CheckOptions mo = o;
      if (!mo.reference_norm)
        mo.reference_norm = known_thurston_norm(config.manifold, config.class_coordinates);
      r = check_thurston_bound(m, mo);
    } else if (id == "corollary-psc") {
      r = check_corollary_psc(m, o);
    } else if (id == "systole") {
      r = check_systole(m, o);
    } else {
      throw InputError(id + " needs a mesh manifold");
    }
  } else {
    const MeshProblem p = mesh_problem_from_config(config);
    if (id == "main-inequality") {
      r = check_main_inequality_discrete(p, o);
    } else if (id == "thurston-bound") {
      r = check_thurston_bound(p, o);
    } else if (id == "corollary-psc") {
      r = check_corollary_psc(p, o);
    } else {
      r = check_systole(p, o);
    }
  }
  // Digest over the full normalized config, so every input participates.
  r.inputs_digest = fnv1a_hex(id + "\n" + canonical_text(config));
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<JobOutcome> run_jobs(const std::vector<Config>& jobs, int workers,
                                 const std::string& out_dir) {
  std::vector<JobOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      JobOutcome& o = out[i];
      o.report.check_id = jobs[i].check.id;
      try {
        o.report = run_check(jobs[i]);
        o.status = o.report.pass ? 0 : 1;
      } catch (const InputError& e) {
        o.status = 2;
        o.error = e.what();
      } catch (const std::exception& e) {
        o.status = 1;
        o.error = e.what();
      }
      if (!o.error.empty()) {
        o.report.pass = false;
        o.report.notes.push_back("error: " + o.error);
      }
      if (!out_dir.empty()) {
        std::ostringstream name;
        name << out_dir << '/' << std::setw(3) << std::setfill('0') << i << '-'
             << (o.report.check_id.empty() ? "job" : o.report.check_id) << ".json";
        write_report_atomic(name.str(), o.report);
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace circlemap
