#pragma once

// Cole-Hopf transform of a dual eigenpair and the pointwise identities the
// transformed fields satisfy. With w, w* the positive right and left
// eigenvectors,
//   v  = -hbar log w,   v* = hbar log w*,   sigma = w w*,
//   a = sqrt(sigma),    z = (v + v*)/2,     Du = P + grad z,
//   Hbar = |P|^2/2 - E0.
// v and v* solve forward and backward Hamilton-Jacobi equations, sigma is the
// stationary density of the dual drift diffusions, and the current sigma Du
// is divergence free. Every residual here vanishes in the continuum; its
// discrete size measures spectral resolution.

#include <array>
#include <cmath>
#include <utility>

#include "gmtorus/eigensolver.hpp"
#include "gmtorus/errors.hpp"
#include "gmtorus/grid.hpp"
#include "gmtorus/spectral.hpp"

namespace gmtorus {

struct IntegralIdentity {
  double lhs = 0.0;  // int (|Du|^2/2 - W) sigma dx
  double rhs = 0.0;  // Hbar + (1/8) int |D(v - v*)|^2 sigma dx
};

struct GradientBounds {
  double sup_dv = 0.0;
  double sup_dv_star = 0.0;
  double sup_du = 0.0;
};

class ColeHopfFields {
 public:
  SchrodingerParams params;
  double E0 = 0.0;
  double Hbar = 0.0;
  ScalarField v;
  ScalarField v_star;
  ScalarField sigma;
  ScalarField a;
  ScalarField z;
  VectorField dv;
  VectorField dv_star;
  VectorField Du;

  static ColeHopfFields from_dual_solution(const DualEigenSolution& sol) {
    require_positive(sol.w, "ColeHopfFields: w");
    require_positive(sol.w_star, "ColeHopfFields: w*");
    ColeHopfFields f{sol.params};
    const double hbar = sol.params.hbar;
    f.E0 = sol.E0;
    f.Hbar = 0.5 * sol.params.p_squared() - sol.E0;
    f.v = scaled(pointwise_log(sol.w), -hbar);
    f.v_star = scaled(pointwise_log(sol.w_star), hbar);
    f.sigma = pointwise_mul(sol.w, sol.w_star);
    f.a = f.sigma;
    for (double& x : f.a.values) x = std::sqrt(x);
    f.z = scaled(pointwise_add(f.v, f.v_star), 0.5);
    f.dv = gradient(f.v);
    f.dv_star = gradient(f.v_star);
    f.Du = gradient(f.z);
    for (int c = 0; c < f.params.grid.dim; ++c)
      for (double& x : f.Du.comp[c].values) x += f.params.P[c];
    return f;
  }

  // sup | -(hbar/2) lap v + |P + Dv|^2 / 2 - W - Hbar |
  double residual_hj_v() const { return hj_residual(v, dv, -1.0); }

  // sup | +(hbar/2) lap v* + |P + Dv*|^2 / 2 - W - Hbar |
  double residual_hj_vstar() const { return hj_residual(v_star, dv_star, 1.0); }

  // sup | div(sigma Du) |
  double residual_transport() const {
    VectorField flux = Du;
    for (int c = 0; c < params.grid.dim; ++c)
      for (std::size_t i = 0; i < sigma.size(); ++i) flux.comp[c][i] *= sigma[i];
    return sup_norm(divergence(flux));
  }

  // sup | |Du|^2/2 - W - Hbar - (hbar/4) lap(v - v*) + |D(v - v*)|^2 / 8 |,
  // the average of the two Hamilton-Jacobi equations written in the
  // current / osmotic splitting.
  double residual_eikonal() const {
    ScalarField diff = v;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= v_star[i];
    ScalarField lap_diff = laplacian(diff);
    ScalarField du2 = squared_magnitude(Du);
    VectorField ddiff = dv;
    for (int c = 0; c < params.grid.dim; ++c)
      for (std::size_t i = 0; i < diff.size(); ++i) ddiff.comp[c][i] -= dv_star.comp[c][i];
    ScalarField ddiff2 = squared_magnitude(ddiff);
    const double hbar = params.hbar;
    double r = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      const double t = 0.5 * du2[i] - params.W[i] - Hbar - 0.25 * hbar * lap_diff[i] +
                       0.125 * ddiff2[i];
      r = std::max(r, std::abs(t));
    }
    return r;
  }

  // sup | -(hbar/2) lap sigma - div((P + Dv) sigma) |; sigma is stationary
  // for the time-reversed drift.
  double residual_fokker_planck_v() const { return fp_residual(dv, -1.0); }

  // sup | -(hbar/2) lap sigma + div((P + Dv*) sigma) |; sigma is stationary
  // for the forward drift.
  double residual_fokker_planck_vstar() const { return fp_residual(dv_star, 1.0); }

  std::pair<double, double> residual_fokker_planck() const {
    return {residual_fokker_planck_v(), residual_fokker_planck_vstar()};
  }

  IntegralIdentity integral_identity() const {
    ScalarField du2 = squared_magnitude(Du);
    ScalarField lhs_int = sigma;
    for (std::size_t i = 0; i < sigma.size(); ++i)
      lhs_int[i] = (0.5 * du2[i] - params.W[i]) * sigma[i];
    VectorField ddiff = dv;
    for (int c = 0; c < params.grid.dim; ++c)
      for (std::size_t i = 0; i < sigma.size(); ++i) ddiff.comp[c][i] -= dv_star.comp[c][i];
    ScalarField ddiff2 = squared_magnitude(ddiff);
    for (std::size_t i = 0; i < sigma.size(); ++i) ddiff2[i] *= sigma[i];
    return {integrate(lhs_int), Hbar + 0.125 * integrate(ddiff2)};
  }

  // V = int sigma Du dx; equals P + int sigma Dz dx since sigma has unit mass.
  std::array<double, 2> mean_flux() const { return weighted_mean(Du); }

  std::array<double, 2> mean_flux_zero() const {
    VectorField dz = gradient(z);
    return weighted_mean(dz);
  }

  std::pair<std::array<double, 2>, std::array<double, 2>> dual_mean_gradients() const {
    return {weighted_mean(dv), weighted_mean(dv_star)};
  }

  GradientBounds gradient_bounds() const {
    return {sup_norm_vector(dv), sup_norm_vector(dv_star), sup_norm_vector(Du)};
  }

 private:
  explicit ColeHopfFields(SchrodingerParams p) : params(std::move(p)) {}

  double hj_residual(const ScalarField& pot, const VectorField& dpot, double lap_sign) const {
    ScalarField lap = laplacian(pot);
    VectorField drift = dpot;
    for (int c = 0; c < params.grid.dim; ++c)
      for (double& x : drift.comp[c].values) x += params.P[c];
    ScalarField drift2 = squared_magnitude(drift);
    const double half_h = 0.5 * params.hbar;
    double r = 0.0;
    for (std::size_t i = 0; i < pot.size(); ++i) {
      const double t = lap_sign * half_h * lap[i] + 0.5 * drift2[i] - params.W[i] - Hbar;
      r = std::max(r, std::abs(t));
    }
    return r;
  }

  double fp_residual(const VectorField& dpot, double div_sign) const {
    ScalarField lap_sigma = laplacian(sigma);
    VectorField flux(params.grid);
    for (int c = 0; c < params.grid.dim; ++c)
      for (std::size_t i = 0; i < sigma.size(); ++i)
        flux.comp[c][i] = (params.P[c] + dpot.comp[c][i]) * sigma[i];
    ScalarField div_flux = divergence(flux);
    const double half_h = 0.5 * params.hbar;
    double r = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i)
      r = std::max(r, std::abs(-half_h * lap_sigma[i] + div_sign * div_flux[i]));
    return r;
  }

  std::array<double, 2> weighted_mean(const VectorField& F) const {
    std::array<double, 2> out{0.0, 0.0};
    for (int c = 0; c < params.grid.dim; ++c) {
      ScalarField g = F.comp[c];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= sigma[i];
      out[c] = integrate(g);
    }
    return out;
  }

  static double sup_norm_vector(const VectorField& F) {
    double m = 0.0;
    for (std::size_t i = 0; i < F.comp[0].size(); ++i) {
      double s = 0.0;
      for (int c = 0; c < F.grid.dim; ++c) s += F.comp[c][i] * F.comp[c][i];
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }
};

}  // namespace gmtorus
