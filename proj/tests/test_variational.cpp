#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <gmtorus/potential.hpp>
#include <gmtorus/variational.hpp>

using namespace gmtorus;

namespace {

ScalarField mixed_potential(const GridSpec& g) {
  return realize(
      PotentialSpec::trig({TrigTerm{{1, 0}, 1.0, 0.0}, TrigTerm{{2, 0}, 0.0, 0.3}}), g);
}

// Positive random amplitude with unit mass, plus a random phase part.
QuantumState random_state(const GridSpec& g, std::uint64_t seed,
                          std::array<double, 2> P = {0.3, -0.1}) {
  ScalarField gfield = random_smooth_field(g, seed);
  ScalarField a(g);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::exp(0.5 * gfield[i]);
  const double norm = std::sqrt(inner(a, a));
  for (double& x : a.values) x /= norm;
  ScalarField z = random_smooth_field(g, seed + 1);
  return QuantumState(std::move(a), P, std::move(z), 1.0, mixed_potential(g));
}

}  // namespace

TEST_CASE("flat state reduces both action forms to the parabola") {
  const GridSpec g = GridSpec::line(64, 1.0);
  ScalarField W = mixed_potential(g);  // mean zero
  QuantumState state(ScalarField(g, 1.0), {0.6, 0.0}, ScalarField(g, 0.0), 1.0, W);
  REQUIRE(action_gm(state) == Catch::Approx(0.18).margin(1e-13));
  REQUIRE(action_polar(state) == Catch::Approx(0.18).margin(1e-13));
  REQUIRE(expected_energy(state) == Catch::Approx(0.18).margin(1e-13));
}

TEST_CASE("state construction enforces the mass constraint") {
  const GridSpec g = GridSpec::line(64, 1.0);
  ScalarField W = mixed_potential(g);
  REQUIRE_THROWS_AS(
      QuantumState(ScalarField(g, 1.1), {0.0, 0.0}, ScalarField(g, 0.0), 1.0, W),
      DomainError);
  REQUIRE_THROWS_AS(
      QuantumState(ScalarField(g, 1.0), {0.0, 0.0}, ScalarField(g, 0.0), -1.0, W),
      DomainError);
}

TEST_CASE("action forms agree on random states") {
  const GridSpec g = GridSpec::line(64, 1.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    QuantumState state = random_state(g, seed * 7);
    const double gm = action_gm(state);
    const double polar = action_polar(state);
    CAPTURE(seed);
    REQUIRE(std::abs(gm - polar) <= 1e-12 * (1.0 + std::abs(gm)));
  }
}

TEST_CASE("energy splits off the amplitude stiffness") {
  const GridSpec g = GridSpec::line(64, 1.0);
  for (std::uint64_t seed : {3u, 11u, 42u}) {
    QuantumState state = random_state(g, seed);
    ScalarField da = derivative(state.a, 0);
    const double stiff = inner(da, da);
    ScalarField wa2 = pointwise_mul(state.W, pointwise_mul(state.a, state.a));
    const double pot = integrate(wa2);
    REQUIRE(expected_energy(state) ==
            Catch::Approx(action_polar(state) + stiff + 2.0 * pot).margin(1e-11));
  }
}

TEST_CASE("gradient identity holds for random states and directions") {
  const GridSpec g = GridSpec::line(64, 1.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    QuantumState state = random_state(g, seed * 13 + 1);
    VariationDirection dir = random_direction(state, seed * 13 + 5);
    CAPTURE(seed);
    REQUIRE(dual_gradient_identity_residual(state, dir) < 1e-11);
  }
}

TEST_CASE("criticality of the ground state") {
  const GridSpec g = GridSpec::line(128, 1.0);
  QuantumState state = critical_state_p0(mixed_potential(g), 1.0);
  REQUIRE(state.E.has_value());
  CriticalityResidual cr = criticality_residual(state);
  REQUIRE(cr.E_est == Catch::Approx(*state.E).margin(1e-10));
  REQUIRE(cr.residual < 1e-8);
  REQUIRE(expected_energy(state) == Catch::Approx(*state.E).margin(1e-10));
}

TEST_CASE("criticality residual of a hand-built trial state") {
  const GridSpec g = GridSpec::line(128, 1.0);
  ScalarField W = realize(PotentialSpec::trig({TrigTerm{{1, 0}, 1.0, 0.0}}), g);
  ScalarField a = sample(g, [](double x, double) {
    return 1.0 + 0.3 * std::cos(2.0 * M_PI * x);
  });
  const double norm = std::sqrt(inner(a, a));
  for (double& x : a.values) x /= norm;
  QuantumState state(std::move(a), {0.0, 0.0}, ScalarField(g, 0.0), 1.0, std::move(W));
  CriticalityResidual cr = criticality_residual(state);
  REQUIRE(cr.E_est == Catch::Approx(1.1370951158832938).margin(1e-12));
  REQUIRE(cr.residual == Catch::Approx(7.2562599147044367).margin(1e-9));
}

TEST_CASE("second variation forms agree at critical states") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = critical_state_p0(mixed_potential(g), 1.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    VariationDirection dir = random_direction(state, seed * 31 + 2);
    const double jg = j_second_general(state, dir);
    const double jgm = j_second_gm(state, dir);
    CAPTURE(seed);
    REQUIRE(std::abs(jg - jgm) <= 1e-9 * (1.0 + std::abs(jgm)));
  }
}

TEST_CASE("general second variation requires the multiplier") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = random_state(g, 5, {0.0, 0.0});
  VariationDirection dir = random_direction(state, 6);
  REQUIRE_THROWS_AS(j_second_general(state, dir), DomainError);
}

TEST_CASE("finite difference oracle confirms the second variation") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = critical_state_p0(mixed_potential(g), 1.0);
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    VariationDirection dir = random_direction(state, seed * 17 + 3);
    const double jg = j_second_general(state, dir);
    const double fd = j_second_fd_oracle(state, dir, 1e-3);
    CAPTURE(seed);
    REQUIRE(std::abs(fd - jg) <= 1e-5 * (1.0 + std::abs(jg)));
  }
}

TEST_CASE("finite difference oracle guards its domain") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState critical = critical_state_p0(mixed_potential(g), 1.0);
  VariationDirection dir = random_direction(critical, 9);
  REQUIRE_THROWS_AS(j_second_fd_oracle(critical, dir, 1e-5), DomainError);
  REQUIRE_THROWS_AS(j_second_fd_oracle(critical, dir, 0.1), DomainError);

  QuantumState moving = random_state(g, 21);  // nonzero current
  VariationDirection dir2 = random_direction(moving, 22);
  REQUIRE_THROWS_AS(j_second_fd_oracle(moving, dir2, 1e-3), DomainError);
}

TEST_CASE("sign census over the two structured families") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = critical_state_p0(mixed_potential(g), 1.0);
  int phase_positive = 0, osmotic_negative = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ScalarField field = random_smooth_field(g, seed * 101 + 7);
    VariationDirection phase = direction_phase(state, field);
    if (j_second_gm(state, phase) > 0.0) ++phase_positive;
    VariationDirection osmotic = direction_osmotic(state, field);
    if (j_second_gm(state, osmotic) < 0.0) ++osmotic_negative;
  }
  REQUIRE(phase_positive == 100);
  REQUIRE(osmotic_negative == 100);
}

TEST_CASE("structured directions have the advertised shape") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = critical_state_p0(mixed_potential(g), 1.0);
  ScalarField field = random_smooth_field(g, 77);

  VariationDirection phase = direction_phase(state, field);
  REQUIRE(sup_norm(phase.a_prime) == 0.0);
  ScalarField a2phi2(g, 0.0);
  VectorField dphi = gradient(field);
  for (std::size_t i = 0; i < g.size(); ++i)
    a2phi2[i] = state.a[i] * state.a[i] * dphi.comp[0][i] * dphi.comp[0][i];
  REQUIRE(j_second_gm(state, phase) == Catch::Approx(integrate(a2phi2)).margin(1e-12));

  VariationDirection osmotic = direction_osmotic(state, field);
  REQUIRE(osmotic.s_prime.has_value());
  REQUIRE(sup_norm(osmotic.z_prime) == 0.0);
  REQUIRE(inner(state.a, osmotic.a_prime) == Catch::Approx(0.0).margin(1e-13));
  ScalarField a2ds2(g, 0.0);
  VectorField ds = gradient(*osmotic.s_prime);
  for (std::size_t i = 0; i < g.size(); ++i)
    a2ds2[i] = state.a[i] * state.a[i] * ds.comp[0][i] * ds.comp[0][i];
  REQUIRE(j_second_gm(state, osmotic) == Catch::Approx(-integrate(a2ds2)).margin(1e-12));
}

TEST_CASE("trivial directions") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = critical_state_p0(mixed_potential(g), 1.0);
  VariationDirection zero{ScalarField(g, 0.0), {0.0, 0.0}, ScalarField(g, 0.0), std::nullopt};
  REQUIRE(j_second_gm(state, zero) == 0.0);
  REQUIRE(j_second_general(state, zero) == 0.0);

  VariationDirection uniform{ScalarField(g, 0.0), {0.9, 0.0}, ScalarField(g, 0.0),
                             std::nullopt};
  REQUIRE(j_second_gm(state, uniform) == Catch::Approx(0.81).margin(1e-12));
}

TEST_CASE("the product form ignores the background momentum") {
  const GridSpec g = GridSpec::line(64, 1.0);
  ScalarField W = mixed_potential(g);
  QuantumState rest = random_state(g, 33, {0.0, 0.0});
  QuantumState boosted(rest.a, {0.5, 0.0}, rest.z, rest.hbar, W);
  VariationDirection dir = random_direction(rest, 34);
  REQUIRE(j_second_gm(rest, dir) == j_second_gm(boosted, dir));
}

TEST_CASE("random directions are deterministic in the seed") {
  const GridSpec g = GridSpec::line(64, 1.0);
  QuantumState state = random_state(g, 50);
  VariationDirection d1 = random_direction(state, 123);
  VariationDirection d2 = random_direction(state, 123);
  VariationDirection d3 = random_direction(state, 124);
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(d1.a_prime[i] == d2.a_prime[i]);
    REQUIRE(d1.z_prime[i] == d2.z_prime[i]);
  }
  REQUIRE(d1.P_prime[0] == d2.P_prime[0]);
  REQUIRE(sup_norm(pointwise_add(d1.a_prime, scaled(d3.a_prime, -1.0))) > 0.0);
  REQUIRE(inner(state.a, d1.a_prime) == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("harmonic well: lowest level is no action minimum") {
  HarmonicCheck one = harmonic_oscillator_check(1.0, 1.0, 20.0, 512);
  REQUIRE(one.E0 == Catch::Approx(0.5).margin(1e-6));
  REQUIRE(one.j2 < 0.0);
  REQUIRE(one.j2 == Catch::Approx(-0.5).margin(1e-3));

  HarmonicCheck two = harmonic_oscillator_check(2.0, 1.0, 20.0, 512);
  REQUIRE(two.E0 == Catch::Approx(1.0).margin(1e-5));
  REQUIRE(two.j2 == Catch::Approx(-1.0).margin(2e-3));

  REQUIRE_THROWS_AS(harmonic_oscillator_check(1.0, 1.0, 4.0, 64), DomainError);
}

TEST_CASE("two dimensional variational forms stay consistent") {
  const GridSpec g = GridSpec::square(16, 1.0);
  ScalarField W = realize(
      PotentialSpec::trig({TrigTerm{{1, 0}, 0.6, 0.0}, TrigTerm{{0, 1}, 0.0, 0.4}}), g);
  QuantumState state = critical_state_p0(W, 1.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    VariationDirection dir = random_direction(state, seed * 19);
    const double jg = j_second_general(state, dir);
    const double jgm = j_second_gm(state, dir);
    CAPTURE(seed);
    REQUIRE(std::abs(jg - jgm) <= 1e-9 * (1.0 + std::abs(jgm)));
    REQUIRE(dual_gradient_identity_residual(state, dir) < 1e-11);
  }
}
