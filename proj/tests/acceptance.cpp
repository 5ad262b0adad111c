// Acceptance run: one line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "circlemap/verify.hpp"
#include "fd_geometry.hpp"
#include "oracles.hpp"

using namespace circlemap;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Config config(const std::string& text) { return parse_config_string(text); }

double energy_norm(const ReggeMetric& g, const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t e = 0; e < a.size(); ++e) s += g.star_weight[e] * (a[e] - b[e]) * (a[e] - b[e]);
  return std::sqrt(std::abs(static_cast<double>(s)));
}

void analytic_identity(Outcome& o) {
  struct Case {
    const char* name;
    WarpedProductModel model;
  };
  std::vector<Case> cases{{"round", sphere_model(constant_profile(1.0), 1.0)},
                          {"warped", sphere_model(sine_profile(1.0, 0.3, 1.0), 1.0)},
                          {"genus2", hyperbolic_model(2, constant_profile(1.0), 1.0)}};
  for (auto& c : cases) {
    auto t0 = std::chrono::steady_clock::now();
    VerificationReport r = check_main_identity(c.model);
    const double dt = seconds_since(t0);
    const double lhs = r.value("lhs"), rhs = r.value("rhs");
    o.detail << ' ' << c.name << ": lhs=" << lhs << " rhs=" << rhs << " t=" << dt << "s;";
    o.require(r.pass, std::string(c.name) + " identity");
    o.require(dt < 1.0, std::string(c.name) + " runtime");
    if (std::string(c.name) == "round") {
      o.require(std::abs(lhs - 4 * kPi) <= 1e-8 * 4 * kPi && std::abs(rhs - 4 * kPi) <= 1e-8 * 4 * kPi,
                "round sides = 4 pi");
    } else if (std::string(c.name) == "warped") {
      o.require(std::abs(lhs - rhs) <= 1e-8 * std::abs(lhs), "warped equality");
      o.require(r.value("hessian_term") > 0, "warped Hessian term positive");
    } else {
      o.require(std::abs(lhs + 4 * kPi) <= 1e-8 * 4 * kPi && std::abs(rhs + 4 * kPi) <= 1e-8 * 4 * kPi,
                "genus-2 sides = -4 pi");
    }
  }
}

void flat_torus(Outcome& o) {
  for (int n : {2, 3, 4}) {
    MeshProblem p = mesh_problem_from_config(
        config("[manifold]\nn = " + std::to_string(n) + "\n[class]\ncoordinates = 0 0 1\n"));
    VerificationReport r = check_main_inequality_discrete(p);
    o.detail << " n=" << n << ": max|eps|=" << r.value("max_abs_deficit") << " lhs=" << r.value("lhs")
             << " rhs=" << r.value("rhs");
    o.require(r.value("max_abs_deficit") <= 1e-12, "deficits at n=" + std::to_string(n));
    o.require(std::abs(r.value("lhs")) <= 1e-10 && std::abs(r.value("rhs")) <= 1e-10,
              "lhs = rhs = 0 at n=" + std::to_string(n));
    o.require(r.pass, "check passes at n=" + std::to_string(n));
    for (long long k : {1, 2, -3}) {
      HomologyClass alpha{2, {0, 0, k}};
      HarmonicOneForm h = solve_harmonic(p.complex, p.metric, cocycle_for_class(p.basis, alpha));
      const double err = std::abs(harmonic_norm(h) - std::llabs(k));
      o.require(err <= 1e-9, "norm of (0,0," + std::to_string(k) + ") at n=" + std::to_string(n));
    }
  }
  o.detail << " norms |k| for k in {1,2,-3} checked;";
}

void equality_convergence(Outcome& o) {
  double previous = std::numeric_limits<double>::infinity();
  for (int level : {0, 1, 2}) {
    VerificationReport r = run_check(config("[manifold]\nkind = sphere-circle\nlevel = " +
                                            std::to_string(level) + "\n[check]\nid = main-inequality\n"));
    const double lhs = r.value("lhs"), rhs = r.value("rhs");
    const double err = std::max(std::abs(lhs - 4 * kPi), std::abs(rhs - 4 * kPi)) / (4 * kPi);
    o.detail << " level " << level << ": lhs=" << lhs << " rhs=" << rhs << " relerr=" << err << ';';
    o.require(err < previous, "error decreases at level " + std::to_string(level));
    previous = err;
    for (const auto& row : r.table)
      o.require(row[1] == 2 && row[3] == 1, "fiber chi=2, N=1 at level " + std::to_string(level));
    if (level == 2) o.require(err <= 0.05, "finest level within 5% of 4 pi");
  }
}

void coarea(Outcome& o) {
  const std::vector<std::pair<std::string, std::string>> families{
      {"T3 n=8 (1,2,3)", "[manifold]\nn = 8\n[class]\ncoordinates = 1 2 3\n"},
      {"S2xS1 level 2", "[manifold]\nkind = sphere-circle\nlevel = 2\n"},
      {"genus2xS1 level 2", "[manifold]\nkind = surface-circle\ngenus = 2\nlevel = 2\n"}};
  for (const auto& [name, text] : families) {
    MeshProblem p = mesh_problem_from_config(config(text));
    HarmonicOneForm h = solve_harmonic(p.complex, p.metric, p.omega);
    SweepOptions so;
    so.cycles = &p.basis.cycles;
    SweepTable t = sweep(p.complex, p.metric, h, so);
    const double bulk = speed_integral(p.complex, p.metric, h.h);
    const double rel = std::abs(t.area.mean - bulk) / bulk;
    o.detail << ' ' << name << ": integral Area=" << t.area.mean << " bulk=" << bulk
             << " rel=" << rel << ';';
    o.require(rel <= 0.02, name + " coarea within 2%");
  }
}

void thurston(Outcome& o) {
  VerificationReport mesh = run_check(
      config("[manifold]\nkind = surface-circle\ngenus = 2\nlevel = 2\n[check]\nid = thurston-bound\n"));
  const double bound = mesh.value("bound");
  o.detail << " discrete bound=" << bound << " reference=" << mesh.value("reference_norm") << ';';
  o.require(mesh.value("reference_norm") == 2.0, "reference norm 2");
  o.require(2.0 <= bound, "reference <= discrete bound");
  for (const auto& row : mesh.table) o.require(row[4] == 2, "chi_minus of every fiber = 2");
  o.detail << " chi_minus over " << mesh.table.size() << " fibers = 2;";
  VerificationReport cyl = check_thurston_bound(hyperbolic_model(2, constant_profile(1.0), 1.0));
  o.detail << " exact cylinder bound=" << cyl.value("bound");
  o.require(std::abs(cyl.value("bound") - 2.0) <= 0.05 * 2.0, "cylinder bound within 5% of 2");
  o.require(cyl.pass && mesh.pass, "checks pass");
}

void km(Outcome& o) {
  KMGrid grid;  // n = 2, p = 0, C = 100, r in {1e2, 1e3, 1e4}
  VerificationReport r = check_km_convergence(grid);
  const double corner = r.value("product_bound_corner");
  const double rel = std::abs(corner - 8 * kPi) / (8 * kPi);
  o.detail << " product_bound(1e4)=" << corner << " 8pi=" << 8 * kPi << " rel=" << rel << ';';
  o.require(rel <= 1e-4, "within 0.01% of 8 pi");
  o.require(r.value("monotone_in_r") == 1.0, "nonincreasing in r");
  double worst = 0;
  for (const auto& row : r.table) {
    const double rv = row[0], delta = row[1], n = 2, p = 0, C = 100;
    const double l2 = C + 8 * kPi * rv * n;
    const double e = (p * delta + 2 * kPi * n) / rv;
    worst = std::max({worst, std::abs(row[2] - l2) / l2, std::abs(row[3] - e) / e,
                      std::abs(row[4] - std::sqrt(l2 * e)) / std::sqrt(l2 * e)});
  }
  o.detail << " closed-form max rel diff=" << worst;
  o.require(worst <= 1e-12, "closed forms to 1e-12");
}

void systole(Outcome& o) {
  VerificationReport round = check_systole(sphere_model(constant_profile(1.0), 1.0));
  o.detail << " round product=" << round.value("product") << " hessian integral="
           << round.value("hessian_integral") << ';';
  o.require(std::abs(round.value("product") - 8 * kPi) <= 1e-10, "round product = 8 pi");
  o.require(round.value("hessian_integral") <= 1e-12, "round Hessian vanishes");
  VerificationReport warped = check_systole(sphere_model(sine_profile(1.0, 0.1, 4.0), 4.0));
  o.detail << " perturbed (L=4) product=" << warped.value("product") << ';';
  o.require(warped.value("product") < 8 * kPi, "perturbed product < 8 pi");
  VerificationReport mesh =
      run_check(config("[manifold]\nkind = sphere-circle\nlevel = 2\n[check]\nid = systole\n"));
  o.detail << " round chart level 2: product=" << mesh.value("product")
           << " hessian surrogate=" << mesh.value("hessian_surrogate") << ';';
  for (const auto* r : {&round, &warped, &mesh}) {
    o.require(r->value("area_violations") == 0 && r->value("chi_violations") == 0,
              r->check_id + " proof-step inequalities");
    o.require(r->pass, "systole check passes");
  }
}

void oracles(Outcome& o) {
  double worst_hess = 0, worst_curv = 0;
  for (auto [kappa, amp] : {std::pair{1.0, 0.3}, {0.0, 0.2}, {-1.0, 0.25}}) {
    auto p = sine_profile(1.1, amp);
    WarpedProductModel m = kappa > 0   ? sphere_model(p)
                           : kappa < 0 ? hyperbolic_model(2, p)
                                       : torus_model(1.0, p);
    const double c = model_harmonic_form(m).c;
    oracle::FdGeometry geo{p.f, kappa};
    auto du = [&](double t) { return c / (p.f(t) * p.f(t)); };
    std::vector<double> he, hf, re, rf;
    double hs = 0, rs = 0;
    for (int i = 0; i < 32; ++i) {
      const double t = (i + 0.43) / 32;
      he.push_back(model_hessian_norm_sq(m, c, t));
      hf.push_back(geo.hessian_norm_sq(Eigen::Vector3d(t, 1.0, 0.3), du));
      re.push_back(model_scalar_curvature(m, t));
      rf.push_back(geo.scalar_curvature(Eigen::Vector3d(t, 1.0, 0.3)));
      hs = std::max(hs, std::abs(he.back()));
      rs = std::max(rs, std::abs(re.back()));
    }
    for (int i = 0; i < 32; ++i) {
      worst_hess = std::max(worst_hess, std::abs(he[i] - hf[i]) / std::max(std::abs(he[i]), hs));
      worst_curv = std::max(worst_curv, std::abs(re[i] - rf[i]) / std::max(std::abs(re[i]), rs));
    }
  }
  o.detail << " FD Hessian rel=" << worst_hess << " FD curvature rel=" << worst_curv << ';';
  o.require(worst_hess <= 1e-6, "Hessian oracle");
  o.require(worst_curv <= 1e-6, "curvature oracle");

  MeshProblem mp = mesh_problem_from_config(
      config("[manifold]\nkind = surface-circle\ngenus = 1\nlevel = 0\n[class]\ncoordinates = 0 1 0\n"));
  HarmonicOptions tight;
  tight.tol = 1e-13;
  HarmonicOneForm h0 = solve_harmonic(mp.complex, mp.metric, mp.omega, tight);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  int beaten = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(h0.h);
    const double scale = std::pow(10.0, trial % 5 - 3);
    std::vector<double> psi(mp.complex.vertex_count());
    for (auto& v : psi) v = scale * n01(rng);
    for (int e = 0; e < mp.complex.edge_count(); ++e)
      x[e] += psi[mp.complex.edge(e).b] - psi[mp.complex.edge(e).a];
    if (cochain_energy(mp.metric, x) < h0.energy * (1 - 1e-12)) ++beaten;
  }
  o.detail << " competitors below minimum: " << beaten << "/100;";
  o.require(beaten == 0, "energy minimality");

  std::uniform_int_distribution<long long> k(-4, 4);
  double gauge = 0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<long long> psi(mp.complex.vertex_count());
    for (auto& v : psi) v = k(rng);
    IntCochain shifted = mp.omega;
    IntCochain d = vertex_coboundary(mp.complex, psi);
    for (std::size_t e = 0; e < shifted.size(); ++e) shifted[e] += d[e];
    HarmonicOneForm h1 = solve_harmonic(mp.complex, mp.metric, shifted, tight);
    for (std::size_t e = 0; e < h0.h.size(); ++e) gauge = std::max(gauge, std::abs(h0.h[e] - h1.h[e]));
  }
  o.detail << " gauge max diff=" << gauge << ';';
  o.require(gauge <= 1e-10, "gauge invariance");

  HarmonicOptions guessed = tight;
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<double> guess(mp.complex.vertex_count());
  for (auto& v : guess) v = u(rng);
  guessed.initial_potential = guess;
  HarmonicOneForm h2 = solve_harmonic(mp.complex, mp.metric, mp.omega, guessed);
  const double unique = energy_norm(mp.metric, h0.h, h2.h);
  o.detail << " uniqueness energy-norm diff=" << unique;
  o.require(unique <= 1e-9, "uniqueness");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"analytic main identity", analytic_identity},
      {"flat torus null case", flat_torus},
      {"discrete equality-case convergence", equality_convergence},
      {"coarea cross-check", coarea},
      {"Thurston bound", thurston},
      {"KM convergence", km},
      {"systole", systole},
      {"oracle suites", oracles},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    o.detail.precision(10);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu (%s): %s in %.2fs |%s\n", i + 1, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", seconds_since(t0), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
