// Command-line driver: solve | scan | verify | second-variation | invert-v.
// Every subcommand reads one config file and emits deterministic JSON or CSV,
// to stdout and, when an output directory is set, to a file there. Exit
// codes: 0 ok, 1 verification failure, 2 config error, 3 solver error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmtorus/cole_hopf.hpp"
#include "gmtorus/config.hpp"
#include "gmtorus/effective_hamiltonian.hpp"
#include "gmtorus/eigensolver.hpp"
#include "gmtorus/errors.hpp"
#include "gmtorus/io.hpp"
#include "gmtorus/potential.hpp"
#include "gmtorus/spectral.hpp"
#include "gmtorus/variational.hpp"

namespace {

using namespace gmtorus;

void emit(const RunConfig& cfg, bool quiet, const std::string& filename,
          const std::string& content) {
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    std::ofstream os(std::filesystem::path(cfg.out) / filename, std::ios::binary);
    if (!os) throw DomainError("cannot open output file in '" + cfg.out + "'");
    os << content;
  }
  if (!quiet) std::cout << content;
}

int cmd_solve(const RunConfig& cfg, bool quiet) {
  const ScalarField W = cfg.realize_potential();
  const DualEigenSolution sol =
      principal_eigenpair(SchrodingerParams(cfg.hbar, cfg.P, W), cfg.method);
  Json j = solution_json(sol);
  const ColeHopfFields f = ColeHopfFields::from_dual_solution(sol);
  j["residual_suite"] = residual_suite_json(f);
  if (cfg.dim == 1) j["ode_residual"] = verify_1d_ode(sol, 0.0);
  emit(cfg, quiet, "solve.json", j.dump(2) + "\n");
  return 0;
}

int cmd_scan(const RunConfig& cfg, bool quiet) {
  const EffectiveHamiltonian eh(cfg.realize_potential(), cfg.hbar, cfg.method);
  const std::vector<PScanRecord> rows = eh.scan(cfg.scan_points(), cfg.delta, cfg.fd);
  std::ostringstream csv;
  write_scan_csv(csv, rows, cfg.dim, cfg.fd);
  const bool convex = convex_slopes(rows);
  csv << "# convexity = " << (convex ? "pass" : "fail") << "\n";
  emit(cfg, quiet, "scan.csv", csv.str());
  return convex ? 0 : 1;
}

int cmd_invert_v(const RunConfig& cfg, bool quiet) {
  if (!cfg.has_v_target) throw ConfigError("invert-v requires physics.V_target");
  const EffectiveHamiltonian eh(cfg.realize_potential(), cfg.hbar, cfg.method);
  const std::array<double, 2> P = eh.invert_v(cfg.V_target, cfg.delta);
  const PScanRecord row = eh.record_at(P, cfg.delta, false);
  double flux_err = 0.0, coupling = 0.0;
  for (int c = 0; c < cfg.dim; ++c) {
    flux_err = std::max(flux_err, std::abs(row.V[c] - cfg.V_target[c]));
    coupling = std::max(coupling, std::abs(row.V[c] - row.V_zero[c] - P[c]));
  }
  Json j;
  j["V_target"] = vector_json(cfg.V_target, cfg.dim);
  j["P"] = vector_json(P, cfg.dim);
  j["V_at_P"] = vector_json(row.V, cfg.dim);
  j["flux_error"] = flux_err;
  j["V_zero"] = vector_json(row.V_zero, cfg.dim);
  j["coupling_defect"] = coupling;
  j["Hbar"] = row.Hbar;
  j["E0"] = row.E0;
  emit(cfg, quiet, "invert_v.json", j.dump(2) + "\n");
  return 0;
}

int cmd_second_variation(const RunConfig& cfg, bool quiet) {
  const ScalarField W = cfg.realize_potential();
  const QuantumState state = critical_state_p0(W, cfg.hbar, cfg.method);
  Json dirs = Json::array();
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.seeds; ++i) {
    const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(i);
    const VariationDirection dir = random_direction(state, s);
    const double j2_general = j_second_general(state, dir);
    const double j2_gm = j_second_gm(state, dir);
    const double j2_fd = j_second_fd_oracle(state, dir, cfg.delta);
    mn = std::min(mn, j2_gm);
    mx = std::max(mx, j2_gm);
    Json row;
    row["seed"] = s;
    row["j2_general"] = j2_general;
    row["j2_gm"] = j2_gm;
    row["j2_fd"] = j2_fd;
    row["sign"] = j2_gm >= 0.0 ? "+" : "-";
    dirs.push_back(row);
  }
  Json j;
  j["E0"] = *state.E;
  j["directions"] = dirs;
  j["summary"] = Json{{"min_j2", mn}, {"max_j2", mx}};
  emit(cfg, quiet, "second_variation.json", j.dump(2) + "\n");
  return 0;
}

struct CheckList {
  Json rows = Json::array();
  std::vector<std::string> failures;

  void add(const std::string& name, double value, double tol) {
    const bool pass = value <= tol;
    Json r;
    r["name"] = name;
    r["value"] = value;
    r["tolerance"] = tol;
    r["pass"] = pass;
    rows.push_back(r);
    if (!pass) failures.push_back(name);
  }

  void add_flag(const std::string& name, double value, bool pass,
                const std::string& requirement) {
    Json r;
    r["name"] = name;
    r["value"] = value;
    r["requirement"] = requirement;
    r["pass"] = pass;
    rows.push_back(r);
    if (!pass) failures.push_back(name);
  }
};

int cmd_verify(const RunConfig& cfg, bool quiet) {
  const ScalarField W = cfg.realize_potential();
  const GridSpec grid = cfg.grid();
  const EffectiveHamiltonian eh(W, cfg.hbar, cfg.method);
  CheckList checks;

  const DualEigenSolution sol = eh.solve(cfg.P);
  checks.add("eigen_residual_w", sol.residual_w, 1e-8);
  checks.add("eigen_residual_w_star", sol.residual_w_star, 1e-8);

  const ColeHopfFields f = ColeHopfFields::from_dual_solution(sol);
  checks.add("hamilton_jacobi_v", f.residual_hj_v(), 1e-8);
  checks.add("hamilton_jacobi_v_star", f.residual_hj_vstar(), 1e-8);
  checks.add("transport", f.residual_transport(), 1e-8);
  checks.add("eikonal", f.residual_eikonal(), 1e-8);
  const auto fp = f.residual_fokker_planck();
  checks.add("fokker_planck_v", fp.first, 1e-8);
  checks.add("fokker_planck_v_star", fp.second, 1e-8);
  const IntegralIdentity ii = f.integral_identity();
  checks.add("integral_identity", std::abs(ii.lhs - ii.rhs), 1e-10);

  const std::array<double, 2> V = f.mean_flux();
  const std::array<double, 2> V0 = f.mean_flux_zero();
  double coupling = 0.0;
  for (int c = 0; c < cfg.dim; ++c)
    coupling = std::max(coupling, std::abs(V[c] - V0[c] - cfg.P[c]));
  checks.add("flux_momentum_coupling", coupling, 1e-11);

  std::array<double, 2> minusP = cfg.P;
  for (int c = 0; c < cfg.dim; ++c) minusP[c] = -minusP[c];
  checks.add("hbar_even_in_P", std::abs(f.Hbar - eh.value(minusP)), 1e-10);

  const GradientCheck gc = eh.gradient_check(cfg.P, cfg.delta);
  checks.add("gradient_vs_mean_flux", gc.discrepancy, 1e-6);

  const HessianCheck hc = eh.hessian_check(cfg.P, cfg.delta);
  checks.add("hessian_fd_vs_formula", hc.discrepancy, 1e-4);

  if (cfg.dim == 1) {
    for (const double C : {0.0, 0.2}) {
      const DualEigenSolution shifted =
          eh.solve({cfg.P[0] + C, 0.0});
      checks.add("ode_residual_C_" + format_g17(C), verify_1d_ode(shifted, C), 1e-8);
    }
  }

  const bool dense_ok =
      cfg.dim == 1 ? grid.n[0] <= 256 : (grid.n[0] <= 48 && grid.n[1] <= 48);
  if (dense_ok) {
    const DualEigenSolution dsol =
        principal_eigenpair(SchrodingerParams(cfg.hbar, cfg.P, W), EigenMethod::Dense);
    const DualEigenSolution isol = principal_eigenpair(
        SchrodingerParams(cfg.hbar, cfg.P, W), EigenMethod::InversePower);
    checks.add("dense_vs_inverse_power_E0", std::abs(dsol.E0 - isol.E0), 1e-10);
  }

  {
    GridSpec fine = grid;
    fine.n[0] *= 2;
    if (cfg.dim == 2) fine.n[1] *= 2;
    if (fine.size() <= 4096) {
      const ScalarField W2 = realize(cfg.potential, fine);
      const DualEigenSolution s2 =
          principal_eigenpair(SchrodingerParams(cfg.hbar, cfg.P, W2));
      checks.add("grid_refinement_E0_shift", std::abs(s2.E0 - sol.E0), 1e-9);
    }
  }

  // Field-level invariants on random states and directions.
  const QuantumState critical = critical_state_p0(W, cfg.hbar, cfg.method);
  checks.add("criticality_residual_p0", criticality_residual(critical).residual, 1e-8);

  double worst_action = 0.0, worst_identity = 0.0, worst_equiv = 0.0, worst_oracle = 0.0;
  double census_min_phase = std::numeric_limits<double>::infinity();
  double census_max_osmotic = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.seeds; ++i) {
    const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(i);
    ScalarField g = random_smooth_field(grid, s * 4 + 1);
    ScalarField a = g;
    for (double& x : a.values) x = std::exp(0.5 * x);
    const double norm = std::sqrt(inner(a, a));
    for (double& x : a.values) x /= norm;
    ScalarField z = random_smooth_field(grid, s * 4 + 2);
    const QuantumState state(a, {0.3, -0.1}, z, cfg.hbar, W);
    const VariationDirection dir = random_direction(state, s * 4 + 3);

    const double ag = action_gm(state);
    const double ap = action_polar(state);
    worst_action = std::max(worst_action, std::abs(ag - ap) / (1.0 + std::abs(ap)));
    worst_identity =
        std::max(worst_identity, dual_gradient_identity_residual(state, dir));

    const VariationDirection cdir = random_direction(critical, s * 4 + 3);
    const double j2g = j_second_general(critical, cdir);
    const double j2gm = j_second_gm(critical, cdir);
    worst_equiv = std::max(worst_equiv, std::abs(j2g - j2gm) / (1.0 + std::abs(j2gm)));
    const double j2fd = j_second_fd_oracle(critical, cdir, cfg.delta);
    worst_oracle = std::max(worst_oracle, std::abs(j2fd - j2g) / (1.0 + std::abs(j2g)));

    const ScalarField phi = random_smooth_field(grid, s * 4 + 4);
    census_min_phase =
        std::min(census_min_phase, j_second_gm(critical, direction_phase(critical, phi)));
    census_max_osmotic = std::max(
        census_max_osmotic, j_second_gm(critical, direction_osmotic(critical, phi)));
  }
  checks.add("action_forms_relative_gap", worst_action, 1e-12);
  checks.add("dual_gradient_identity", worst_identity, 1e-11);
  checks.add("second_variation_equivalence", worst_equiv, 1e-9);
  checks.add("second_variation_fd_oracle", worst_oracle, 1e-5);
  checks.add_flag("phase_family_positive", census_min_phase, census_min_phase > 0.0,
                  "min over seeds > 0");
  checks.add_flag("osmotic_family_negative", census_max_osmotic,
                  census_max_osmotic < 0.0, "max over seeds < 0");

  Json j;
  j["config"] = Json{{"dim", cfg.dim},
                     {"N", cfg.dim == 1 ? Json(cfg.N[0]) : Json{cfg.N[0], cfg.N[1]}},
                     {"hbar", cfg.hbar},
                     {"P", vector_json(cfg.P, cfg.dim)},
                     {"delta", cfg.delta},
                     {"seeds", cfg.seeds}};
  j["checks"] = checks.rows;
  j["failures"] = checks.failures;
  j["pass"] = checks.failures.empty();
  emit(cfg, quiet, "verify.json", j.dump(2) + "\n");
  return checks.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral laboratory for the quantum Guerra-Morato action on the torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool quiet = false;

  CLI::App* sub_solve = app.add_subcommand(
      "solve", "dual eigensolve plus the Cole-Hopf residual suite");
  CLI::App* sub_scan =
      app.add_subcommand("scan", "effective-Hamiltonian momentum scan to CSV");
  CLI::App* sub_verify =
      app.add_subcommand("verify", "run every invariant at the configured sizes");
  CLI::App* sub_second = app.add_subcommand(
      "second-variation", "second-variation census over random directions");
  CLI::App* sub_invert =
      app.add_subcommand("invert-v", "recover P from a target mean flux");

  for (CLI::App* sub : {sub_solve, sub_scan, sub_verify, sub_second, sub_invert}) {
    sub->add_option("--config", config_path, "config file path")->required();
    sub->add_option("--out", out_dir, "output directory (overrides run.out)");
    sub->add_option("--seed", seed_override, "seed override (overrides run.seed)");
    sub->add_flag("--quiet", quiet, "suppress stdout report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    gmtorus::RunConfig cfg = gmtorus::load_config(config_path);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (active->count("--seed") > 0) cfg.seed = seed_override;
    const std::string name = active->get_name();
    if (name == "solve") return cmd_solve(cfg, quiet);
    if (name == "scan") return cmd_scan(cfg, quiet);
    if (name == "verify") return cmd_verify(cfg, quiet);
    if (name == "second-variation") return cmd_second_variation(cfg, quiet);
    return cmd_invert_v(cfg, quiet);
  } catch (const gmtorus::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gmtorus::SpecError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gmtorus::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
