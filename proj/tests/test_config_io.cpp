#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include <gmtorus/config.hpp>
#include <gmtorus/effective_hamiltonian.hpp>
#include <gmtorus/io.hpp>

using namespace gmtorus;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.conf");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("full one dimensional config parses") {
  RunConfig cfg = parse(
      "# solver fixture\n"
      "grid.N = 128\n"
      "grid.L = 1.0\n"
      "potential.kind = trig\n"
      "potential.terms = 1:1.0:0.0; 2:0.0:0.3\n"
      "physics.hbar = 1.0\n"
      "physics.P = 0.4\n"
      "physics.P_scan = -1.0:1.0:21\n"
      "run.seed = 7\n"
      "run.seeds = 50\n"
      "run.delta = 5e-4\n"
      "run.method = inverse_power\n"
      "run.fd = false\n"
      "run.out = results\n");
  REQUIRE(cfg.dim == 1);
  REQUIRE(cfg.N[0] == 128);
  REQUIRE(cfg.L[0] == 1.0);
  REQUIRE(cfg.potential.kind == PotentialSpec::Kind::Trig);
  REQUIRE(cfg.potential.terms.size() == 2);
  REQUIRE(cfg.potential.terms[0].k[0] == 1);
  REQUIRE(cfg.potential.terms[0].cos_coeff == 1.0);
  REQUIRE(cfg.potential.terms[1].k[0] == 2);
  REQUIRE(cfg.potential.terms[1].sin_coeff == 0.3);
  REQUIRE(cfg.P[0] == 0.4);
  REQUIRE(cfg.has_scan);
  REQUIRE(cfg.scan_start == -1.0);
  REQUIRE(cfg.scan_stop == 1.0);
  REQUIRE(cfg.scan_count == 21);
  REQUIRE(cfg.seed == 7);
  REQUIRE(cfg.seeds == 50);
  REQUIRE(cfg.delta == 5e-4);
  REQUIRE(cfg.method == EigenMethod::InversePower);
  REQUIRE(!cfg.fd);
  REQUIRE(cfg.out == "results");

  GridSpec g = cfg.grid();
  REQUIRE(g.dim == 1);
  REQUIRE(g.n[0] == 128);
  ScalarField w = cfg.realize_potential();
  REQUIRE(w.size() == 128);

  auto pts = cfg.scan_points();
  REQUIRE(pts.size() == 21);
  REQUIRE(pts.front()[0] == -1.0);
  REQUIRE(pts.back()[0] == 1.0);
  REQUIRE(pts[10][0] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("two dimensional config uses comma pairs") {
  RunConfig cfg = parse(
      "grid.dim = 2\n"
      "grid.N = 16, 24\n"
      "grid.L = 1.0, 2.0\n"
      "potential.kind = trig\n"
      "potential.terms = 1,0:0.5:0.0; 0,1:0.0:0.25\n"
      "physics.P = 0.3, -0.1\n");
  REQUIRE(cfg.dim == 2);
  REQUIRE(cfg.N[0] == 16);
  REQUIRE(cfg.N[1] == 24);
  REQUIRE(cfg.L[1] == 2.0);
  REQUIRE(cfg.potential.terms[1].k[1] == 1);
  REQUIRE(cfg.P[1] == -0.1);
  GridSpec g = cfg.grid();
  REQUIRE(g.n[1] == 24);
  // Scan points carry the transverse momentum through.
  RunConfig cfg2 = parse(
      "grid.dim = 2\n"
      "grid.N = 16, 16\n"
      "grid.L = 1.0, 1.0\n"
      "physics.P = 0.0, -0.25\n"
      "physics.P_scan = 0.0:1.0:3\n");
  auto pts = cfg2.scan_points();
  REQUIRE(pts.size() == 3);
  REQUIRE(pts[1][0] == 0.5);
  REQUIRE(pts[1][1] == -0.25);
}

TEST_CASE("wrapped quadratic and samples kinds parse") {
  RunConfig cfg = parse(
      "grid.N = 512\n"
      "grid.L = 20.0\n"
      "potential.kind = wrapped_quadratic\n"
      "potential.omega = 2.0\n"
      "potential.center = 10.0\n");
  REQUIRE(cfg.potential.kind == PotentialSpec::Kind::WrappedQuadratic);
  REQUIRE(cfg.potential.omega == 2.0);
  REQUIRE(cfg.potential.center[0] == 10.0);

  RunConfig cfg2 = parse(
      "grid.N = 8\n"
      "grid.L = 1.0\n"
      "potential.kind = samples\n"
      "potential.path = w.txt\n");
  REQUIRE(cfg2.potential.kind == PotentialSpec::Kind::Samples);
  REQUIRE(cfg2.potential.path == "w.txt");

  RunConfig cfg3 = parse(
      "grid.N = 8\n"
      "grid.L = 1.0\n"
      "potential.kind = constant\n"
      "potential.c = -0.5\n");
  REQUIRE(cfg3.potential.kind == PotentialSpec::Kind::Constant);
  REQUIRE(cfg3.potential.c == -0.5);
}

TEST_CASE("errors carry the file name and line number") {
  REQUIRE(error_of("grid.N = 128\n"
                   "grid.L = 1.0\n"
                   "grid.bogus = 1\n")
              .find("test.conf:3") != std::string::npos);
  REQUIRE(error_of("grid.N = twelve\n").find("test.conf:1") != std::string::npos);
  REQUIRE(error_of("grid.N 128\n").find("expected key = value") != std::string::npos);
  REQUIRE(error_of("grid.L = 1.0\n").find("missing required key grid.N") !=
          std::string::npos);
  REQUIRE(error_of("grid.N = 128\n").find("missing required key grid.L") !=
          std::string::npos);
  REQUIRE(error_of("grid.N = 128\ngrid.L = 1.0\nphysics.P_scan = 1.0:0.0:5\n")
              .find("stop > start") != std::string::npos);
  REQUIRE(error_of("grid.N = 128\ngrid.L = 1.0\nphysics.P_scan = 0.0:1.0:1\n")
              .find("at least 2") != std::string::npos);
  REQUIRE(error_of("grid.N = 128\ngrid.L = 1.0\nrun.method = qr\n")
              .find("run.method") != std::string::npos);
  REQUIRE(error_of("grid.N = 128\ngrid.L = 1.0\nphysics.hbar = 0.0\n")
              .find("positive") != std::string::npos);
  REQUIRE(error_of("grid.dim = 2\ngrid.N = 16\ngrid.L = 1.0\n")
              .find("two entries") != std::string::npos);
  REQUIRE(error_of("grid.N = 128\ngrid.L = 1.0\nrun.fd = maybe\n")
              .find("true/false") != std::string::npos);
}

TEST_CASE("missing config file raises a config error") {
  REQUIRE_THROWS_AS(load_config("no_such_config.conf"), ConfigError);
}

TEST_CASE("seventeen digit formatting round-trips doubles") {
  const double x = 1.0 / 3.0;
  REQUIRE(std::stod(format_g17(x)) == x);
  const double y = -0.025468796984040599;
  REQUIRE(std::stod(format_g17(y)) == y);
  REQUIRE(format_g17(1.0) == "1");
}

TEST_CASE("scan csv header matches the dimension and fd switch") {
  auto h1 = scan_csv_header(1, false);
  REQUIRE(h1 == std::vector<std::string>{"P", "E0", "Hbar", "V", "gap"});
  auto h1fd = scan_csv_header(1, true);
  REQUIRE(h1fd == std::vector<std::string>{"P", "E0", "Hbar", "V", "grad_fd", "hess_fd",
                                           "hess_formula", "gap"});
  auto h2 = scan_csv_header(2, true);
  REQUIRE(h2.size() == 17);
  REQUIRE(h2[0] == "P0");
  REQUIRE(h2[1] == "P1");
  REQUIRE(h2[8] == "hess_fd_00");
  REQUIRE(h2.back() == "gap");
}

TEST_CASE("scan csv rows carry full precision values") {
  PScanRecord r;
  r.P = {0.4, 0.0};
  r.E0 = -0.025468796984040599;
  r.Hbar = 0.105468796984040599;
  r.V = {0.398008612770888, 0.0};
  r.V_zero = {r.V[0] - 0.4, 0.0};
  r.gap = 19.7727716372362;
  std::ostringstream os;
  write_scan_csv(os, {r}, 1, false);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  REQUIRE(header == "P,E0,Hbar,V,gap");
  std::istringstream cells(row);
  std::string cell;
  std::getline(cells, cell, ',');
  REQUIRE(std::stod(cell) == 0.4);
  std::getline(cells, cell, ',');
  REQUIRE(std::stod(cell) == r.E0);
  std::getline(cells, cell, ',');
  REQUIRE(std::stod(cell) == r.Hbar);
}

TEST_CASE("solution json carries the gauge and the inputs") {
  const GridSpec g = GridSpec::line(32, 1.0);
  SchrodingerParams params(1.0, {0.4, 0.0},
                           realize(PotentialSpec::trig({TrigTerm{{1, 0}, 1.0, 0.0}}), g));
  DualEigenSolution sol = principal_eigenpair(params);
  Json j = solution_json(sol);
  REQUIRE(j.contains("E0"));
  REQUIRE(j.contains("gap"));
  REQUIRE(j.contains("residual_w"));
  REQUIRE(j.contains("residual_w_star"));
  REQUIRE(j["hbar"] == 1.0);
  REQUIRE(j["P"][0] == 0.4);
  REQUIRE(j["grid"]["N"][0] == 32);
  const std::string gauge = j["normalization_gauge"];
  REQUIRE(gauge.find("w w*") != std::string::npos);
  // Key order is fixed for byte-identical reruns.
  auto it = j.begin();
  REQUIRE(it.key() == "hbar");
}
