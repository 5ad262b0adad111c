#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "circlemap/analytic.hpp"
#include "circlemap/config.hpp"
#include "circlemap/fibration.hpp"
#include "circlemap/hodge.hpp"
#include "circlemap/homology.hpp"
#include "circlemap/metric.hpp"

namespace circlemap {

struct Quantity {
  std::string name;
  double value = 0.0;
  std::string units;  // "1" for dimensionless
};

struct VerificationReport {
  std::string check_id;
  std::string inputs_digest;  // FNV-1a 64 of the normalized inputs, hex
  std::vector<Quantity> quantities;
  std::vector<Quantity> tolerances;
  bool pass = false;
  double runtime_seconds = 0.0;  // not part of the reproducible content
  std::vector<std::string> notes;
  std::vector<std::string> table_columns;
  std::vector<std::vector<double>> table;

  /// Throws InputError if the quantity is absent.
  double value(const std::string& name) const;
  bool has(const std::string& name) const;
};

nlohmann::json to_json(const VerificationReport& r, bool include_runtime = true);
VerificationReport report_from_json(const nlohmann::json& j);

/// Writes to a temporary file in the same directory, then renames.
void write_text_atomic(const std::string& path, const std::string& text);
void write_report_atomic(const std::string& path, const VerificationReport& r);
void write_table_csv(std::ostream& out, const VerificationReport& r);

std::string fnv1a_hex(const std::string& text);

/// A discrete manifold with metric and a nontrivial class.
struct MeshProblem {
  std::string description;  // normalized inputs, hashed into report digests
  SimplicialComplex3 complex;
  ReggeMetric metric;
  HomologyBasis basis;
  HomologyClass alpha;
  IntCochain omega;
  /// Curated Thurston norm for model manifolds ("known-model input").
  std::optional<double> reference_norm;
  /// Fiber surface of the model when the manifold is a product, for tests.
  std::optional<SurfaceMesh> fiber;
};

MeshProblem mesh_problem_from_config(const Config& config);

/// Model manifolds: [manifold] kind = model, genus picks the fiber
/// (0 sphere, 1 flat torus of area fiber_area, >= 2 hyperbolic).
WarpedProductModel model_from_config(const Config& config);

/// Thurston norm table: T^3 is 0 for every class; for Sigma_g x S^1 the
/// class k * (circle generator) has norm |k| max(0, 2g - 2). Other classes
/// are not curated.
std::optional<double> known_thurston_norm(const ManifoldConfig& m,
                                          const std::vector<long long>& coordinates);

struct CheckOptions {
  std::optional<double> tol;  // default: 0.05 for discrete checks, 1e-8 analytic
  int levels = 64;
  std::uint64_t seed = 1;
  std::optional<double> reference_norm;
  bool sphere_free = false;
};

CheckOptions options_from_config(const Config& config);

struct KMGrid {
  int thurston_norm = 2;
  int tori = 0;
  double complement_curvature = 100.0;
  std::vector<double> r_values{1e2, 1e3, 1e4};
  std::vector<double> delta_values{1e-3};
};

/// 2 pi * integral of chi >= sum_e eps_e l_e |du|_e (Hessian term dropped).
VerificationReport check_main_inequality_discrete(const MeshProblem& p, const CheckOptions& o = {});
/// (1/4 pi) ||alpha||_H ||R^-||_{L^2} against the reference norm and the
/// fiber chi_minus. Sphere fibers are reported; they fail the check only
/// when the manifold was declared sphere-free.
VerificationReport check_thurston_bound(const MeshProblem& p, const CheckOptions& o = {});
VerificationReport check_thurston_bound(const WarpedProductModel& m, const CheckOptions& o = {});
/// 2 pi * integral of chi >= (1/2) min R * integral of Area. Throws InputError
/// unless min R > 0.
VerificationReport check_corollary_psc(const MeshProblem& p, const CheckOptions& o = {});
VerificationReport check_corollary_psc(const WarpedProductModel& m, const CheckOptions& o = {});
/// Area >= N sys2 and chi <= 2N per sampled level, and min R * sys2 <= 8 pi.
/// Throws InputError unless PSC with b2 != 0.
VerificationReport check_systole(const MeshProblem& p, const CheckOptions& o = {});
VerificationReport check_systole(const WarpedProductModel& m, const CheckOptions& o = {});
VerificationReport check_km_convergence(const KMGrid& grid, const CheckOptions& o = {});
/// Analytic level-set identity on a warped product (submersion equality).
VerificationReport check_main_identity(const WarpedProductModel& m, const CheckOptions& o = {});
/// Weighted inequality with psi(t) = 1 + cos(2 pi t / L) / 2.
VerificationReport check_weighted_inequality(const WarpedProductModel& m,
                                             const CheckOptions& o = {});

/// Check ids accepted by run_check.
const std::vector<std::string>& check_ids();

/// Builds the inputs named by the config and runs check `id` (or
/// config.check.id). Fills the digest and runtime.
VerificationReport run_check(const Config& config, const std::string& id = "");

struct JobOutcome {
  VerificationReport report;
  int status = 0;  // 0 pass, 1 check failed or numerical failure, 2 input error
  std::string error;
};

/// Runs every config on a pool of at most `workers` threads. With a
/// nonempty `out_dir`, each report is written atomically to
/// out_dir/<index>-<check id>.json as soon as its job finishes.
std::vector<JobOutcome> run_jobs(const std::vector<Config>& jobs, int workers,
                                 const std::string& out_dir = "");

}  // namespace circlemap
