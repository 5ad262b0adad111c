#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "circlemap/error.hpp"
#include "circlemap/io.hpp"
#include "circlemap/verify.hpp"

using namespace circlemap;

namespace {

struct Flags {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  int jobs = 1;
};

Config load(const Flags& f) {
  Config c;
  if (f.configs.size() > 1) throw InputError("this command takes one --config");
  if (!f.configs.empty()) c = load_config(f.configs[0]);
  if (f.seed) c.sweep.seed = *f.seed;
  if (f.tol) c.check.tol = *f.tol;
  return c;
}

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_text_atomic(f.out, text);
  }
}

std::string render(const Flags& f, const VerificationReport& r) {
  std::ostringstream os;
  if (f.format == "csv") {
    write_table_csv(os, r);
  } else {
    os << to_json(r).dump(2) << '\n';
  }
  return os.str();
}

int status_of(const VerificationReport& r) { return r.pass ? 0 : 1; }

int cmd_build(const Flags& f) {
  const MeshProblem p = mesh_problem_from_config(load(f));
  std::ostringstream os;
  write_m3t(os, p.complex, &p.metric.lengths);
  emit(f, os.str());
  return 0;
}

int cmd_solve(const Flags& f) {
  const MeshProblem p = mesh_problem_from_config(load(f));
  const HarmonicOneForm form = solve_harmonic(p.complex, p.metric, p.omega);
  nlohmann::json j;
  j["class"] = p.alpha.coordinates;
  j["vertices"] = p.complex.vertex_count();
  j["tets"] = p.complex.tet_count();
  j["betti"] = p.basis.betti;
  j["energy"] = form.energy;
  j["harmonic_norm"] = harmonic_norm(form);
  j["iterations"] = form.iterations;
  j["closedness_residual"] = form.closedness_residual;
  j["coclosedness_residual"] = form.coclosedness_residual;
  j["negative_star_weights"] = p.metric.negative_weight_count();
  if (f.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(17) << "vertex,phase\n";
    for (int v = 0; v < p.complex.vertex_count(); ++v) os << v << ',' << form.phase(v) << '\n';
    emit(f, os.str());
  } else {
    emit(f, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_levels(const Flags& f, double theta, const std::string& off) {
  const MeshProblem p = mesh_problem_from_config(load(f));
  const HarmonicOneForm form = solve_harmonic(p.complex, p.metric, p.omega);
  LevelSurface s;
  try {
    s = extract_level(p.complex, p.metric, form, theta, &p.basis.cycles);
  } catch (const CriticalLevelError& e) {
    std::cerr << e.what() << "; try --theta " << std::setprecision(12) << e.suggested_level()
              << '\n';
    return 1;
  }
  if (!off.empty()) {
    std::ostringstream os;
    write_off(os, p.complex, s);
    write_text_atomic(off, os.str());
  }
  std::ostringstream os;
  os << std::setprecision(17);
  if (f.format == "csv") {
    os << "component,vertices,edges,triangles,chi,area\n";
    for (std::size_t i = 0; i < s.components.size(); ++i) {
      const auto& c = s.components[i];
      os << i << ',' << c.vertices << ',' << c.edges << ',' << c.triangles << ','
         << c.euler_characteristic << ',' << c.area << '\n';
    }
  } else {
    nlohmann::json j;
    j["theta"] = s.theta;
    j["euler_characteristic"] = s.euler_characteristic();
    j["area"] = s.area();
    j["components"] = s.component_count();
    j["chi_minus"] = chi_minus(s);
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : s.components)
      comps.push_back({{"chi", c.euler_characteristic},
                       {"area", c.area},
                       {"triangles", c.triangles},
                       {"cycle_pairings", c.cycle_pairings}});
    j["component_list"] = comps;
    os << j.dump(2) << '\n';
  }
  emit(f, os.str());
  return 0;
}

int cmd_verify(const Flags& f, const std::string& id) {
  if (f.configs.size() <= 1) {
    const VerificationReport r = run_check(load(f), id);
    emit(f, render(f, r));
    return status_of(r);
  }
  std::vector<Config> jobs;
  for (const auto& path : f.configs) {
    Config c = load_config(path);
    if (!id.empty()) c.check.id = id;
    if (f.seed) c.sweep.seed = *f.seed;
    if (f.tol) c.check.tol = *f.tol;
    jobs.push_back(std::move(c));
  }
  if (!f.out.empty()) std::filesystem::create_directories(f.out);
  const auto outcomes = run_jobs(jobs, f.jobs, f.out);
  int status = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    std::cout << f.configs[i] << ' ' << o.report.check_id << ' '
              << (o.status == 0 ? "pass" : o.status == 1 ? "FAIL" : "INPUT-ERROR");
    if (!o.error.empty()) std::cout << " (" << o.error << ')';
    std::cout << '\n';
    status = std::max(status, o.status);
  }
  return status;
}

int cmd_sweep_km(const Flags& f, const KMGrid& overrides, bool use_config) {
  KMGrid g = overrides;
  if (use_config) {
    const Config c = load(f);
    g = {c.check.norm, c.check.tori, c.check.complement_curvature, c.check.r_values,
         c.check.delta_values};
  }
  CheckOptions o;
  o.tol = f.tol;
  const auto start = std::chrono::steady_clock::now();
  VerificationReport r = check_km_convergence(g, o);
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(f, render(f, r));
  return status_of(r);
}

int cmd_report(const Flags& f, const std::vector<std::string>& files) {
  nlohmann::json merged = nlohmann::json::array();
  bool all = true;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open report '" + path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("report '" + path + "' is not JSON: " + e.what());
    }
    const VerificationReport r = report_from_json(j);
    all = all && r.pass;
    merged.push_back(to_json(r));
  }
  nlohmann::json out;
  out["count"] = merged.size();
  out["pass"] = all;
  out["reports"] = merged;
  emit(f, out.dump(2) + "\n");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circle-valued harmonic maps on 3-manifolds: meshes, level sets, checks"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.configs, "INI run configuration (repeat for job lists)");
  app.add_option("--seed", f.seed, "sweep seed (overrides [sweep] seed)");
  app.add_option("--tol", f.tol, "check tolerance (overrides [check] tol)");
  app.add_option("--out", f.out, "output file (verify with several configs: directory)");
  app.add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--jobs", f.jobs, "worker threads for job lists")->check(CLI::PositiveNumber);

  auto* build = app.add_subcommand("build", "write the configured mesh as M3T with lengths");
  auto* solve = app.add_subcommand("solve", "harmonic representative: energy and norm");
  auto* levels = app.add_subcommand("levels", "extract one level surface");
  double theta = 0.5;
  std::string off;
  levels->add_option("--theta", theta, "level in [0, 1)");
  levels->add_option("--off", off, "also write the surface as OFF");
  auto* verify = app.add_subcommand("verify", "run a named check");
  std::string id;
  verify->add_option("check", id, "check id (default: [check] id)")
      ->check(CLI::IsMember(check_ids()));
  auto* km = app.add_subcommand("sweep-km", "tabulate the KM family product bound");
  KMGrid grid;
  km->add_option("--norm", grid.thurston_norm, "Thurston norm n");
  km->add_option("--tori", grid.tori, "torus components p");
  km->add_option("--C", grid.complement_curvature, "complement curvature constant");
  km->add_option("--r", grid.r_values, "neck lengths");
  km->add_option("--delta", grid.delta_values, "torus areas");
  auto* report = app.add_subcommand("report", "merge JSON reports");
  std::vector<std::string> files;
  report->add_option("files", files, "report files")->required();
  for (auto* sub : {build, solve, levels, verify, km, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) return cmd_build(f);
    if (*solve) return cmd_solve(f);
    if (*levels) return cmd_levels(f, theta, off);
    if (*verify) return cmd_verify(f, id);
    if (*km) return cmd_sweep_km(f, grid, !f.configs.empty());
    return cmd_report(f, files);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
