#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <gmtorus/cole_hopf.hpp>
#include <gmtorus/eigensolver.hpp>
#include <gmtorus/potential.hpp>

using namespace gmtorus;

namespace {

DualEigenSolution mixed_solution(double p0, double hbar = 1.0, int n = 128) {
  const GridSpec g = GridSpec::line(n, 1.0);
  SchrodingerParams params(
      hbar, {p0, 0.0},
      realize(PotentialSpec::trig({TrigTerm{{1, 0}, 1.0, 0.0}, TrigTerm{{2, 0}, 0.0, 0.3}}),
              g));
  return principal_eigenpair(params);
}

}  // namespace

TEST_CASE("free fields vanish identically") {
  const GridSpec g = GridSpec::line(128, 1.0);
  SchrodingerParams params(1.0, {0.6, 0.0}, realize(PotentialSpec::zero(), g));
  ColeHopfFields f = ColeHopfFields::from_dual_solution(principal_eigenpair(params));

  REQUIRE(f.E0 == 0.0);
  REQUIRE(f.Hbar == Catch::Approx(0.18).margin(1e-15));
  REQUIRE(sup_norm(f.dv.comp[0]) == 0.0);
  REQUIRE(sup_norm(f.dv_star.comp[0]) == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(f.sigma[i] == 1.0);
    REQUIRE(f.Du.comp[0][i] == 0.6);
  }
  REQUIRE(f.residual_hj_v() == 0.0);
  REQUIRE(f.residual_hj_vstar() == 0.0);
  REQUIRE(f.residual_transport() == 0.0);
  REQUIRE(f.residual_eikonal() == 0.0);
  REQUIRE(f.residual_fokker_planck_v() == 0.0);
  REQUIRE(f.residual_fokker_planck_vstar() == 0.0);
  IntegralIdentity id = f.integral_identity();
  REQUIRE(id.lhs == Catch::Approx(id.rhs).margin(1e-15));
  REQUIRE(f.mean_flux()[0] == Catch::Approx(0.6).margin(1e-15));
  REQUIRE(f.mean_flux_zero()[0] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("drifted fields satisfy every pointwise identity") {
  ColeHopfFields f = ColeHopfFields::from_dual_solution(mixed_solution(0.4));

  REQUIRE(f.Hbar == Catch::Approx(0.105468796984041).margin(1e-10));
  REQUIRE(f.Hbar == 0.5 * 0.4 * 0.4 - f.E0);

  REQUIRE(f.residual_hj_v() < 1e-8);
  REQUIRE(f.residual_hj_vstar() < 1e-8);
  REQUIRE(f.residual_transport() < 1e-8);
  REQUIRE(f.residual_eikonal() < 1e-8);
  auto fp = f.residual_fokker_planck();
  REQUIRE(fp.first < 1e-8);
  REQUIRE(fp.second < 1e-8);
  REQUIRE(fp.first == f.residual_fokker_planck_v());
  REQUIRE(fp.second == f.residual_fokker_planck_vstar());

  IntegralIdentity id = f.integral_identity();
  REQUIRE(std::abs(id.lhs - id.rhs) < 1e-10);

  REQUIRE(integrate(f.sigma) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(min_value(f.sigma) > 0.0);
  REQUIRE(f.mean_flux()[0] == Catch::Approx(0.398008612770888).margin(1e-9));
}

TEST_CASE("mean flux splits into the momentum and the zero-momentum part") {
  ColeHopfFields f = ColeHopfFields::from_dual_solution(mixed_solution(0.4));
  const double v = f.mean_flux()[0];
  const double v0 = f.mean_flux_zero()[0];
  REQUIRE(v == Catch::Approx(v0 + 0.4).margin(1e-11));

  auto [gv, gvs] = f.dual_mean_gradients();
  // The difference of the log-gradients is hbar times d(log sigma), whose
  // density-weighted mean is the integral of d(sigma): zero on the torus.
  REQUIRE(gv[0] == Catch::Approx(gvs[0]).margin(1e-10));
  REQUIRE(v0 == Catch::Approx(0.5 * (gv[0] + gvs[0])).margin(1e-12));
}

TEST_CASE("fields rebuild from their defining logs") {
  ColeHopfFields f = ColeHopfFields::from_dual_solution(mixed_solution(0.4, 0.7));
  const double hbar = 0.7;
  for (std::size_t i = 0; i < f.sigma.size(); ++i) {
    REQUIRE(f.sigma[i] ==
            Catch::Approx(std::exp((f.v_star[i] - f.v[i]) / hbar)).margin(1e-12));
    REQUIRE(f.a[i] == Catch::Approx(std::sqrt(f.sigma[i])).margin(1e-13));
    REQUIRE(f.z[i] == Catch::Approx(0.5 * (f.v[i] + f.v_star[i])).margin(1e-13));
  }
  ScalarField dz = derivative(f.z, 0);
  for (std::size_t i = 0; i < f.sigma.size(); ++i)
    REQUIRE(f.Du.comp[0][i] == Catch::Approx(0.4 + dz[i]).margin(1e-10));

  GradientBounds gb = f.gradient_bounds();
  REQUIRE(gb.sup_dv == sup_norm(f.dv.comp[0]));
  REQUIRE(gb.sup_dv_star == sup_norm(f.dv_star.comp[0]));
  REQUIRE(gb.sup_du == sup_norm(f.Du.comp[0]));
  REQUIRE(gb.sup_du <= 0.4 + 0.5 * (gb.sup_dv + gb.sup_dv_star) + 1e-12);
}

TEST_CASE("identities hold across the diffusion strength") {
  for (double hbar : {0.2, 0.5, 1.0, 2.0}) {
    ColeHopfFields f = ColeHopfFields::from_dual_solution(mixed_solution(0.4, hbar));
    CAPTURE(hbar);
    REQUIRE(f.residual_hj_v() < 1e-8);
    REQUIRE(f.residual_hj_vstar() < 1e-8);
    REQUIRE(f.residual_transport() < 1e-8);
    REQUIRE(f.residual_eikonal() < 1e-8);
    REQUIRE(f.residual_fokker_planck_v() < 1e-8);
    REQUIRE(f.residual_fokker_planck_vstar() < 1e-8);
    IntegralIdentity id = f.integral_identity();
    REQUIRE(std::abs(id.lhs - id.rhs) < 1e-10);
  }
}

TEST_CASE("two dimensional fields satisfy the identities") {
  const GridSpec g = GridSpec::square(16, 1.0);
  SchrodingerParams params(
      0.8, {0.3, -0.1},
      realize(PotentialSpec::trig({TrigTerm{{1, 0}, 0.6, 0.0}, TrigTerm{{0, 1}, 0.0, 0.4},
                                   TrigTerm{{1, 1}, 0.2, 0.0}}),
              g));
  ColeHopfFields f = ColeHopfFields::from_dual_solution(principal_eigenpair(params));
  REQUIRE(f.residual_hj_v() < 1e-8);
  REQUIRE(f.residual_hj_vstar() < 1e-8);
  REQUIRE(f.residual_transport() < 1e-8);
  REQUIRE(f.residual_eikonal() < 1e-8);
  REQUIRE(f.residual_fokker_planck_v() < 1e-8);
  REQUIRE(f.residual_fokker_planck_vstar() < 1e-8);
  IntegralIdentity id = f.integral_identity();
  REQUIRE(std::abs(id.lhs - id.rhs) < 1e-10);
  auto flux = f.mean_flux();
  auto flux0 = f.mean_flux_zero();
  REQUIRE(flux[0] == Catch::Approx(flux0[0] + 0.3).margin(1e-11));
  REQUIRE(flux[1] == Catch::Approx(flux0[1] - 0.1).margin(1e-11));
}

TEST_CASE("construction refuses a sign changing amplitude") {
  DualEigenSolution sol = mixed_solution(0.0);
  sol.w[3] = -1e-6;
  REQUIRE_THROWS_AS(ColeHopfFields::from_dual_solution(sol), DomainError);
}

TEST_CASE("construction refuses the vanishing tail of a deep well") {
  const GridSpec g = GridSpec::line(512, 20.0);
  SchrodingerParams params(1.0, {0.0, 0.0},
                           realize(PotentialSpec::wrapped_quadratic(1.0, {0.0, 0.0}), g));
  DualEigenSolution sol = principal_eigenpair(params);
  REQUIRE_THROWS_AS(ColeHopfFields::from_dual_solution(sol), DomainError);
}
