#pragma once

// The action calculus for polar wave data on the torus. A state carries an
// amplitude a > 0 with unit quadratic mass, a momentum P with periodic phase
// part z (the full phase u = P.x + z exists only through its gradient
// Du = P + Dz), a potential W, and optionally the criticality multiplier E.
// The dual velocity potentials enter through their gradients
//   Dv = Du - hbar Da/a,   Dv* = Du + hbar Da/a,
// and variations split the same way: a direction (a', P', z') has
// Du' = P' + Dz' and osmotic scalar s' = hbar a'/a, with Dv' = Du' - Ds' and
// D(v*)' = Du' + Ds'. Second-variation forms are evaluated in both the
// general and the product form, together with a finite-difference oracle
// valid at zero-current critical states.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "gmtorus/eigensolver.hpp"
#include "gmtorus/errors.hpp"
#include "gmtorus/grid.hpp"
#include "gmtorus/potential.hpp"
#include "gmtorus/spectral.hpp"

namespace gmtorus {

struct QuantumState {
  ScalarField a;  // amplitude, positive, int a^2 dx = 1
  std::array<double, 2> P{0.0, 0.0};
  ScalarField z;  // periodic part of the phase
  double hbar = 1.0;
  ScalarField W;
  std::optional<double> E;  // criticality multiplier when known

  QuantumState(ScalarField a_, std::array<double, 2> P_, ScalarField z_, double hbar_,
               ScalarField W_, std::optional<double> E_ = std::nullopt)
      : a(std::move(a_)), P(P_), z(std::move(z_)), hbar(hbar_), W(std::move(W_)), E(E_) {
    if (a.grid != z.grid || a.grid != W.grid)
      throw DomainError("QuantumState: a, z, W must share one grid");
    if (!(hbar > 0.0)) throw DomainError("QuantumState: hbar must be positive");
    a.check_finite("a");
    z.check_finite("z");
    W.check_finite("W");
    const double mass = inner(a, a);
    if (std::abs(mass - 1.0) > 1e-12)
      throw DomainError("QuantumState: int a^2 dx = " + std::to_string(mass) +
                        ", must be 1 within 1e-12");
  }

  VectorField current() const {
    VectorField du = gradient(z);
    for (int c = 0; c < a.grid.dim; ++c)
      for (double& x : du.comp[c].values) x += P[c];
    return du;
  }
};

struct VariationDirection {
  ScalarField a_prime;
  std::array<double, 2> P_prime{0.0, 0.0};
  ScalarField z_prime;
  std::optional<ScalarField> s_prime;  // osmotic scalar, cached when the
                                       // direction was built from one

  VectorField current() const {
    VectorField du = gradient(z_prime);
    for (int c = 0; c < a_prime.grid.dim; ++c)
      for (double& x : du.comp[c].values) x += P_prime[c];
    return du;
  }

  VectorField osmotic_gradient(const QuantumState& state) const {
    if (s_prime) return gradient(*s_prime);
    ScalarField s = pointwise_div(a_prime, state.a);
    for (double& x : s.values) x *= state.hbar;
    return gradient(s);
  }
};

// Pure phase variation: v' = (v*)' = phi, so a' = 0 and Du' = D phi. The
// product second-variation form is nonnegative along this family.
inline VariationDirection direction_phase(const QuantumState& state, ScalarField phi) {
  if (phi.grid != state.a.grid) throw DomainError("direction_phase: grid mismatch");
  return {ScalarField(state.a.grid, 0.0), {0.0, 0.0}, std::move(phi), std::nullopt};
}

// Pure osmotic variation: v' = -(v*)' = -s', so Du' = 0 and a' = a s'/hbar.
// s is recentered so that int a a' dx = 0. The product second-variation form
// is nonpositive along this family.
inline VariationDirection direction_osmotic(const QuantumState& state, ScalarField s) {
  if (s.grid != state.a.grid) throw DomainError("direction_osmotic: grid mismatch");
  ScalarField weighted = pointwise_mul(pointwise_mul(state.a, state.a), s);
  const double shift = integrate(weighted) / inner(state.a, state.a);
  for (double& x : s.values) x -= shift;
  ScalarField ap = pointwise_mul(state.a, s);
  for (double& x : ap.values) x /= state.hbar;
  return {std::move(ap), {0.0, 0.0}, ScalarField(state.a.grid, 0.0), std::move(s)};
}

namespace detail {

inline double unit_draw(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) / 9007199254740992.0) - 1.0;
}

// Random trigonometric polynomial, band-limited to a quarter of the grid
// size per axis, with mode weights 1/(1 + |m|^2).
inline ScalarField band_limited_field(const GridSpec& g, std::mt19937_64& rng) {
  ScalarField f(g, 0.0);
  const int b0 = g.n[0] / 4;
  const int b1 = g.dim == 2 ? g.n[1] / 4 : 0;
  for (int m0 = 0; m0 <= b0; ++m0) {
    for (int m1 = (m0 == 0 ? 1 : -b1); m1 <= b1; ++m1) {
      const double wgt = 1.0 / (1.0 + m0 * m0 + m1 * m1);
      const double ca = wgt * unit_draw(rng);
      const double cb = wgt * unit_draw(rng);
      const double k0 = 2.0 * M_PI * m0 / g.len[0];
      const double k1 = g.dim == 2 ? 2.0 * M_PI * m1 / g.len[1] : 0.0;
      std::size_t idx = 0;
      for (int j0 = 0; j0 < g.n[0]; ++j0) {
        const double x0 = j0 * g.spacing(0);
        for (int j1 = 0; j1 < g.n[1]; ++j1, ++idx) {
          const double phase = k0 * x0 + k1 * (j1 * (g.dim == 2 ? g.spacing(1) : 0.0));
          f[idx] += ca * std::cos(phase) + cb * std::sin(phase);
        }
      }
    }
  }
  return f;
}

}  // namespace detail

inline ScalarField random_smooth_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return detail::band_limited_field(g, rng);
}

// Seed-deterministic direction: band-limited random a' and z', uniform P';
// a' is projected against a so the mass constraint is preserved to first
// order.
inline VariationDirection random_direction(const QuantumState& state, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ScalarField ap = detail::band_limited_field(state.a.grid, rng);
  ScalarField zp = detail::band_limited_field(state.a.grid, rng);
  std::array<double, 2> pp{0.0, 0.0};
  for (int c = 0; c < state.a.grid.dim; ++c) pp[c] = detail::unit_draw(rng);
  const double overlap = inner(state.a, ap) / inner(state.a, state.a);
  for (std::size_t i = 0; i < ap.size(); ++i) ap[i] -= overlap * state.a[i];
  return {std::move(ap), pp, std::move(zp), std::nullopt};
}

// Action in the dual-gradient product form, int (Dv.Dv*/2 - W) a^2 dx.
// Divides by a, so a must sit above the positivity floor.
inline double action_gm(const QuantumState& state) {
  require_positive(state.a, "action_gm: a");
  VectorField du = state.current();
  VectorField da = gradient(state.a);
  VectorField osm(state.a.grid);
  for (int c = 0; c < state.a.grid.dim; ++c)
    for (std::size_t i = 0; i < state.a.size(); ++i)
      osm.comp[c][i] = state.hbar * da.comp[c][i] / state.a[i];
  ScalarField integrand(state.a.grid, 0.0);
  for (int c = 0; c < state.a.grid.dim; ++c)
    for (std::size_t i = 0; i < integrand.size(); ++i)
      integrand[i] += (du.comp[c][i] - osm.comp[c][i]) * (du.comp[c][i] + osm.comp[c][i]);
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = (0.5 * integrand[i] - state.W[i]) * state.a[i] * state.a[i];
  return integrate(integrand);
}

// Same action in polar form, int -(hbar^2/2)|Da|^2 + (a^2/2)|Du|^2 - W a^2 dx;
// free of divisions, valid for amplitudes touching zero.
inline double action_polar(const QuantumState& state) {
  VectorField du = state.current();
  VectorField da = gradient(state.a);
  ScalarField da2 = squared_magnitude(da);
  ScalarField du2 = squared_magnitude(du);
  ScalarField integrand(state.a.grid, 0.0);
  const double half_h2 = 0.5 * state.hbar * state.hbar;
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = -half_h2 * da2[i] + 0.5 * state.a[i] * state.a[i] * du2[i] -
                   state.W[i] * state.a[i] * state.a[i];
  return integrate(integrand);
}

// int (hbar^2/2)|Da|^2 + (a^2/2)|Du|^2 + W a^2 dx, the energy of the wave
// function a e^{iu/hbar}.
inline double expected_energy(const QuantumState& state) {
  VectorField du = state.current();
  VectorField da = gradient(state.a);
  ScalarField da2 = squared_magnitude(da);
  ScalarField du2 = squared_magnitude(du);
  ScalarField integrand(state.a.grid, 0.0);
  const double half_h2 = 0.5 * state.hbar * state.hbar;
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = half_h2 * da2[i] + 0.5 * state.a[i] * state.a[i] * du2[i] +
                   state.W[i] * state.a[i] * state.a[i];
  return integrate(integrand);
}

struct CriticalityResidual {
  double E_est = 0.0;
  double residual = 0.0;
};

// Recovers the multiplier by projection onto a and reports the sup-norm
// defect of the amplitude equation (hbar^2/2) lap a = a (|Du|^2/2 + W - E).
inline CriticalityResidual criticality_residual(const QuantumState& state) {
  ScalarField lap_a = laplacian(state.a);
  ScalarField du2 = squared_magnitude(state.current());
  const double half_h2 = 0.5 * state.hbar * state.hbar;
  ScalarField proj(state.a.grid, 0.0);
  for (std::size_t i = 0; i < proj.size(); ++i)
    proj[i] = -half_h2 * state.a[i] * lap_a[i] +
              (0.5 * du2[i] + state.W[i]) * state.a[i] * state.a[i];
  const double E_est = integrate(proj);
  double r = 0.0;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const double t =
        half_h2 * lap_a[i] - state.a[i] * (0.5 * du2[i] + state.W[i] - E_est);
    r = std::max(r, std::abs(t));
  }
  return {E_est, r};
}

// Zero-momentum critical state: the principal eigenfunction at P = 0 (the
// self-adjoint case, where w = w*) with flat phase and E fixed to the
// eigenvalue.
inline QuantumState critical_state_p0(const ScalarField& W, double hbar,
                                      EigenMethod method = EigenMethod::Auto) {
  DualEigenSolution sol = principal_eigenpair(SchrodingerParams(hbar, {0.0, 0.0}, W), method);
  return QuantumState(sol.w, {0.0, 0.0}, ScalarField(W.grid, 0.0), hbar, W, sol.E0);
}

// Pointwise defect of -hbar^2 |D(a'/a)|^2 + |Du'|^2 = Dv'.D(v*)'. The left
// side differentiates the quotient a'/a directly; the right side goes through
// osmotic_gradient, which prefers the direction's own s' field when one is
// attached. For directions carrying s' this compares two genuinely different
// routes to the same gradient; otherwise it checks the quadratic-form algebra.
inline double dual_gradient_identity_residual(const QuantumState& state,
                                              const VariationDirection& dir) {
  require_positive(state.a, "dual_gradient_identity_residual: a");
  VectorField dup = dir.current();
  VectorField dq = gradient(pointwise_div(dir.a_prime, state.a));
  VectorField dsp = dir.osmotic_gradient(state);
  const double h2 = state.hbar * state.hbar;
  double r = 0.0;
  for (std::size_t i = 0; i < state.a.size(); ++i) {
    double lhs = 0.0, rhs = 0.0;
    for (int c = 0; c < state.a.grid.dim; ++c) {
      lhs += -h2 * dq.comp[c][i] * dq.comp[c][i] + dup.comp[c][i] * dup.comp[c][i];
      rhs += (dup.comp[c][i] - dsp.comp[c][i]) * (dup.comp[c][i] + dsp.comp[c][i]);
    }
    r = std::max(r, std::abs(lhs - rhs));
  }
  return r;
}

// Second variation in expanded form,
//   int -hbar^2 |Da'|^2 + a^2 |Du'|^2 - 2 a'^2 (|Du|^2/2 + W - E) dx.
// Needs the criticality multiplier.
inline double j_second_general(const QuantumState& state, const VariationDirection& dir) {
  if (!state.E)
    throw DomainError("j_second_general: state has no criticality multiplier E");
  const double E = *state.E;
  ScalarField dap2 = squared_magnitude(gradient(dir.a_prime));
  ScalarField dup2 = squared_magnitude(dir.current());
  ScalarField du2 = squared_magnitude(state.current());
  ScalarField integrand(state.a.grid, 0.0);
  const double h2 = state.hbar * state.hbar;
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = -h2 * dap2[i] + state.a[i] * state.a[i] * dup2[i] -
                   2.0 * dir.a_prime[i] * dir.a_prime[i] *
                       (0.5 * du2[i] + state.W[i] - E);
  return integrate(integrand);
}

// Second variation in product form, int a^2 Dv'.D(v*)' dx
//   = int a^2 (Du' - Ds').(Du' + Ds') dx.
inline double j_second_gm(const QuantumState& state, const VariationDirection& dir) {
  VectorField dup = dir.current();
  VectorField dsp = dir.osmotic_gradient(state);
  ScalarField integrand(state.a.grid, 0.0);
  for (int c = 0; c < state.a.grid.dim; ++c)
    for (std::size_t i = 0; i < integrand.size(); ++i)
      integrand[i] += (dup.comp[c][i] - dsp.comp[c][i]) * (dup.comp[c][i] + dsp.comp[c][i]);
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] *= state.a[i] * state.a[i];
  return integrate(integrand);
}

// Five-point second derivative of the polar action along the normalized
// family a(t) = (a + t a')/||a + t a'||, z(t) = z + t z', P(t) = P + t P'.
// Only valid where the current vanishes: there the constraint corrections to
// the raw derivative carry a Du factor and drop out, so the straight-line
// family differentiates the true action.
inline double j_second_fd_oracle(const QuantumState& state, const VariationDirection& dir,
                                 double delta) {
  if (!(delta >= 1e-4 && delta <= 1e-2))
    throw DomainError("j_second_fd_oracle: delta must lie in [1e-4, 1e-2]");
  VectorField du0 = state.current();
  double du_sup = 0.0;
  for (int c = 0; c < state.a.grid.dim; ++c)
    du_sup = std::max(du_sup, sup_norm(du0.comp[c]));
  if (du_sup > 1e-12)
    throw DomainError("j_second_fd_oracle: state must carry zero current");

  auto at = [&](double tau) {
    ScalarField a_tau = state.a;
    for (std::size_t i = 0; i < a_tau.size(); ++i) a_tau[i] += tau * dir.a_prime[i];
    if (!(min_value(a_tau) > 0.0))
      throw DomainError("j_second_fd_oracle: amplitude loses positivity on the stencil");
    const double norm = std::sqrt(inner(a_tau, a_tau));
    for (double& x : a_tau.values) x /= norm;
    ScalarField z_tau = state.z;
    for (std::size_t i = 0; i < z_tau.size(); ++i) z_tau[i] += tau * dir.z_prime[i];
    std::array<double, 2> p_tau = state.P;
    for (int c = 0; c < state.a.grid.dim; ++c) p_tau[c] += tau * dir.P_prime[c];
    return action_polar(QuantumState(std::move(a_tau), p_tau, std::move(z_tau),
                                     state.hbar, state.W));
  };
  const double f_2m = at(-2.0 * delta);
  const double f_1m = at(-delta);
  const double f_0 = at(0.0);
  const double f_1p = at(delta);
  const double f_2p = at(2.0 * delta);
  return (-f_2m + 16.0 * f_1m - 30.0 * f_0 + 16.0 * f_1p - f_2p) / (12.0 * delta * delta);
}

struct HarmonicCheck {
  double E0 = 0.0;
  double j2 = 0.0;
};

// Periodized harmonic oscillator W = (omega^2/2) d(x)^2 with d the wrapped
// distance. The ground energy approaches hbar omega / 2 once the wrapped
// tail is negligible, and the osmotic direction built from the ground-state
// log-amplitude has strictly negative second variation: the minimum-energy
// state is not a local action minimum.
inline HarmonicCheck harmonic_oscillator_check(double omega, double hbar, double L, int N) {
  if (!(wrapped_quadratic_tail(omega, L, hbar) < 1e-12))
    throw DomainError("harmonic_oscillator_check: torus too small, wrapped tail above 1e-12");
  const GridSpec grid = GridSpec::line(N, L);
  ScalarField W = realize(PotentialSpec::wrapped_quadratic(omega, {0.0, 0.0}), grid);
  QuantumState state = critical_state_p0(W, hbar);
  ScalarField vprime = sample(grid, [&](double x0, double) {
    const double d = wrapped_distance(x0, 0.0, L);
    return 0.5 * omega * d * d;
  });
  ScalarField s = vprime;
  for (double& x : s.values) x = -x;
  VariationDirection dir = direction_osmotic(state, std::move(s));
  const double j2 = j_second_gm(state, dir);
  if (!(j2 < 0.0))
    throw RangeError("harmonic_oscillator_check: second variation came out nonnegative");
  return {*state.E, j2};
}

}  // namespace gmtorus
