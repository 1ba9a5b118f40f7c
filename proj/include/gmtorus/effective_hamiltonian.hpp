#pragma once

// The effective Hamiltonian Hbar(P) = |P|^2/2 - E0(P) of the drifted cell
// problem, probed pointwise and on scans. First derivative: grad Hbar = V,
// the mean current flux int Du dsigma. Second derivative: the Gram-matrix
// formula
//   hess_ab = int sum_c U_ca U_cb dsigma + (1/4) int sum_c Y_ca Y_cb dsigma,
// with U_.a = d(Du)/dP_a and Y_.a = d(D(v - v*))/dP_a taken by central
// differences in P and the density sigma frozen at the center point. Only
// gradient fields are differenced across neighboring-P solves, so the
// per-solve gauge constants cancel. Both Gram blocks are symmetric positive
// semidefinite by construction, which is the convexity statement in
// discrete form.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "gmtorus/cole_hopf.hpp"
#include "gmtorus/eigensolver.hpp"
#include "gmtorus/errors.hpp"
#include "gmtorus/grid.hpp"
#include "gmtorus/spectral.hpp"

namespace gmtorus {

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct PScanRecord {
  std::array<double, 2> P{0.0, 0.0};
  double E0 = 0.0;
  double Hbar = 0.0;
  double gap = 0.0;
  double residual_w = 0.0;
  double residual_w_star = 0.0;
  std::array<double, 2> V{0.0, 0.0};       // mean flux, int Du dsigma
  std::array<double, 2> V_zero{0.0, 0.0};  // int Dz dsigma; V = V_zero + P
  bool has_fd = false;
  std::array<double, 2> grad_fd{0.0, 0.0};
  Matrix2 hess_fd{{{0.0, 0.0}, {0.0, 0.0}}};
  Matrix2 hess_formula{{{0.0, 0.0}, {0.0, 0.0}}};
};

struct GradientCheck {
  std::array<double, 2> grad_fd{0.0, 0.0};
  std::array<double, 2> V{0.0, 0.0};
  double discrepancy = 0.0;
  double max_stencil_residual = 0.0;
};

struct HessianCheck {
  Matrix2 hess_fd{{{0.0, 0.0}, {0.0, 0.0}}};
  Matrix2 hess_formula{{{0.0, 0.0}, {0.0, 0.0}}};
  double discrepancy = 0.0;
};

namespace detail {

inline int thread_budget(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  long cap = hw;
  if (const char* env = std::getenv("GM_TORUS_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1) cap = std::min(cap, parsed);
  }
  return static_cast<int>(std::min<std::size_t>(cap, jobs == 0 ? 1 : jobs));
}

}  // namespace detail

class EffectiveHamiltonian {
 public:
  EffectiveHamiltonian(ScalarField W, double hbar, EigenMethod method = EigenMethod::Auto)
      : W_(std::move(W)), hbar_(hbar), method_(method) {
    if (!(hbar_ > 0.0)) throw DomainError("EffectiveHamiltonian: hbar must be positive");
  }

  const GridSpec& grid() const { return W_.grid; }
  int dim() const { return W_.grid.dim; }

  DualEigenSolution solve(std::array<double, 2> P) const {
    return principal_eigenpair(SchrodingerParams(hbar_, P, W_), method_);
  }

  ColeHopfFields fields(std::array<double, 2> P) const {
    return ColeHopfFields::from_dual_solution(solve(P));
  }

  double value(std::array<double, 2> P) const {
    const DualEigenSolution sol = solve(P);
    return 0.5 * sol.params.p_squared() - sol.E0;
  }

  std::array<double, 2> mean_flux(std::array<double, 2> P) const {
    return fields(P).mean_flux();
  }

  // Single-point record with the finite-difference slots left empty.
  PScanRecord hbar_at(std::array<double, 2> P) const { return record_at(P, 0.0, false); }

  PScanRecord record_at(std::array<double, 2> P, double delta, bool with_fd) const {
    const DualEigenSolution sol = solve(P);
    const ColeHopfFields f = ColeHopfFields::from_dual_solution(sol);
    PScanRecord row;
    row.P = P;
    row.E0 = sol.E0;
    row.Hbar = f.Hbar;
    row.gap = sol.gap;
    row.residual_w = sol.residual_w;
    row.residual_w_star = sol.residual_w_star;
    row.V = f.mean_flux();
    row.V_zero = f.mean_flux_zero();
    if (with_fd) {
      check_delta(delta);
      row.has_fd = true;
      const Stencil st = stencil_fields(f, P, delta);
      row.grad_fd = st.grad_fd;
      row.hess_formula = st.hess_formula;
      for (int a = 0; a < dim(); ++a)
        row.hess_fd[a][a] =
            (st.hbar_plus[a] - 2.0 * row.Hbar + st.hbar_minus[a]) / (delta * delta);
      if (dim() == 2) {
        const double pp = value(shift(shift(P, 0, delta), 1, delta));
        const double pm = value(shift(shift(P, 0, delta), 1, -delta));
        const double mp = value(shift(shift(P, 0, -delta), 1, delta));
        const double mm = value(shift(shift(P, 0, -delta), 1, -delta));
        row.hess_fd[0][1] = row.hess_fd[1][0] = (pp - pm - mp + mm) / (4.0 * delta * delta);
      }
    }
    return row;
  }

  // Central difference of Hbar along each momentum axis.
  std::array<double, 2> grad_fd(std::array<double, 2> P, double delta) const {
    check_delta(delta);
    std::array<double, 2> g{0.0, 0.0};
    for (int a = 0; a < dim(); ++a)
      g[a] = (value(shift(P, a, delta)) - value(shift(P, a, -delta))) / (2.0 * delta);
    return g;
  }

  // Compares the finite-difference gradient of Hbar against the mean flux of
  // the center solution. The stencil eigenpairs must sit at their residual
  // floor for the comparison to be meaningful.
  GradientCheck gradient_check(std::array<double, 2> P, double delta) const {
    check_delta(delta);
    GradientCheck out;
    out.V = mean_flux(P);
    for (int a = 0; a < dim(); ++a) {
      const DualEigenSolution plus = solve(shift(P, a, delta));
      const DualEigenSolution minus = solve(shift(P, a, -delta));
      out.max_stencil_residual =
          std::max({out.max_stencil_residual, plus.residual_w, plus.residual_w_star,
                    minus.residual_w, minus.residual_w_star});
      if (out.max_stencil_residual > 1e-9)
        throw ConvergenceError("gradient_check: stencil residual " +
                               std::to_string(out.max_stencil_residual) + " above 1e-9");
      const double hp = 0.5 * plus.params.p_squared() - plus.E0;
      const double hm = 0.5 * minus.params.p_squared() - minus.E0;
      out.grad_fd[a] = (hp - hm) / (2.0 * delta);
      out.discrepancy = std::max(out.discrepancy, std::abs(out.grad_fd[a] - out.V[a]));
    }
    return out;
  }

  // Second-difference Hessian of Hbar against the Gram-matrix formula at the
  // same stencil width; the formula matrix must be symmetric PSD.
  HessianCheck hessian_check(std::array<double, 2> P, double delta) const {
    const PScanRecord row = record_at(P, delta, true);
    HessianCheck out{row.hess_fd, row.hess_formula, 0.0};
    for (int a = 0; a < dim(); ++a)
      for (int b = 0; b < dim(); ++b)
        out.discrepancy =
            std::max(out.discrepancy, std::abs(out.hess_fd[a][b] - out.hess_formula[a][b]));
    double lo = out.hess_formula[0][0];
    if (dim() == 2) {
      const double tr = out.hess_formula[0][0] + out.hess_formula[1][1];
      const double det = out.hess_formula[0][0] * out.hess_formula[1][1] -
                         out.hess_formula[0][1] * out.hess_formula[1][0];
      lo = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    }
    if (lo < -1e-8)
      throw RangeError("hessian_check: formula Hessian has eigenvalue " +
                       std::to_string(lo) + " below -1e-8");
    return out;
  }

  // Probes every momentum in the list, fanning the points out over worker
  // threads. Results come back in input order regardless of scheduling.
  std::vector<PScanRecord> scan(const std::vector<std::array<double, 2>>& Ps, double delta,
                                bool with_fd) const {
    std::vector<PScanRecord> rows(Ps.size());
    const int workers = detail::thread_budget(Ps.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < Ps.size(); ++i) rows[i] = record_at(Ps[i], delta, with_fd);
      return rows;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (std::size_t i = t; i < Ps.size(); i += workers)
            rows[i] = record_at(Ps[i], delta, with_fd);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
    return rows;
  }

  // Finds P with mean flux V(P) = target; dV/dP is the formula Hessian, so
  // convexity makes the root unique when it exists. One dimension:
  // safeguarded Newton inside a bracket, falling back to bisection whenever
  // the Newton point leaves it. Two dimensions: Newton with a trust radius
  // on the step length.
  std::array<double, 2> invert_v(std::array<double, 2> target, double delta = 1e-3,
                                 double tol = 1e-11) const {
    if (dim() == 1) return {invert_v_1d(target[0], delta, tol), 0.0};
    return invert_v_2d(target, delta, tol);
  }

 private:
  ScalarField W_;
  double hbar_;
  EigenMethod method_;

  struct Stencil {
    Matrix2 hess_formula{{{0.0, 0.0}, {0.0, 0.0}}};
    std::array<double, 2> grad_fd{0.0, 0.0};
    std::array<double, 2> hbar_plus{0.0, 0.0};
    std::array<double, 2> hbar_minus{0.0, 0.0};
    double worst_residual = 0.0;
  };

  static void check_delta(double delta) {
    if (!(delta >= 1e-4 && delta <= 1e-2))
      throw DomainError("momentum stencil delta must lie in [1e-4, 1e-2]");
  }

  static std::array<double, 2> shift(std::array<double, 2> P, int axis, double d) {
    P[axis] += d;
    return P;
  }

  // One ring of +/- delta solves around the center fields: the gradient and
  // both Hessian routes are read off the same ring.
  Stencil stencil_fields(const ColeHopfFields& center, std::array<double, 2> P,
                         double delta) const {
    const int d = dim();
    Stencil st;
    std::vector<VectorField> U(d), Y(d);
    for (int a = 0; a < d; ++a) {
      const DualEigenSolution sp = solve(shift(P, a, delta));
      const DualEigenSolution sm = solve(shift(P, a, -delta));
      st.worst_residual = std::max({st.worst_residual, sp.residual_w, sp.residual_w_star,
                                    sm.residual_w, sm.residual_w_star});
      const ColeHopfFields fp = ColeHopfFields::from_dual_solution(sp);
      const ColeHopfFields fm = ColeHopfFields::from_dual_solution(sm);
      st.hbar_plus[a] = 0.5 * sp.params.p_squared() - sp.E0;
      st.hbar_minus[a] = 0.5 * sm.params.p_squared() - sm.E0;
      st.grad_fd[a] = (st.hbar_plus[a] - st.hbar_minus[a]) / (2.0 * delta);
      U[a] = VectorField(center.params.grid);
      Y[a] = VectorField(center.params.grid);
      const double inv = 1.0 / (2.0 * delta);
      for (int c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < center.sigma.size(); ++i) {
          U[a].comp[c][i] = (fp.Du.comp[c][i] - fm.Du.comp[c][i]) * inv;
          const double yp = fp.dv.comp[c][i] - fp.dv_star.comp[c][i];
          const double ym = fm.dv.comp[c][i] - fm.dv_star.comp[c][i];
          Y[a].comp[c][i] = (yp - ym) * inv;
        }
      }
    }
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b) {
        ScalarField uu = dot(U[a], U[b]);
        ScalarField yy = dot(Y[a], Y[b]);
        for (std::size_t i = 0; i < uu.size(); ++i)
          uu[i] = (uu[i] + 0.25 * yy[i]) * center.sigma[i];
        st.hess_formula[a][b] = st.hess_formula[b][a] = integrate(uu);
      }
    }
    return st;
  }

 public:
  Matrix2 hess_formula(std::array<double, 2> P, double delta) const {
    check_delta(delta);
    return stencil_fields(fields(P), P, delta).hess_formula;
  }

 private:
  double invert_v_1d(double target, double delta, double tol) const {
    double lo = std::min(target, 0.0) - 2.0;
    double hi = std::max(target, 0.0) + 2.0;
    double flo = mean_flux({lo, 0.0})[0] - target;
    double fhi = mean_flux({hi, 0.0})[0] - target;
    if (!(flo <= 0.0 && fhi >= 0.0))
      throw RangeError("invert_v: target " + std::to_string(target) +
                       " not bracketed by P in [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
    double p = 0.5 * (lo + hi);
    for (int it = 0; it < 80; ++it) {
      const double f = mean_flux({p, 0.0})[0] - target;
      if (std::abs(f) <= tol) return p;
      if (f > 0.0)
        hi = p;
      else
        lo = p;
      const double slope = hess_formula({p, 0.0}, delta)[0][0];
      double next = slope > 0.0 ? p - f / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - p) < 1e-14) return p;
      p = next;
    }
    throw ConvergenceError("invert_v: no convergence in 80 iterations");
  }

  std::array<double, 2> invert_v_2d(std::array<double, 2> target, double delta,
                                    double tol) const {
    std::array<double, 2> p = target;  // V(P) ~ P for small potentials
    for (int it = 0; it < 80; ++it) {
      const std::array<double, 2> v = mean_flux(p);
      const double r0 = v[0] - target[0], r1 = v[1] - target[1];
      if (std::max(std::abs(r0), std::abs(r1)) <= tol) return p;
      const Matrix2 h = hess_formula(p, delta);
      Eigen::Matrix2d J;
      J << h[0][0], h[0][1], h[1][0], h[1][1];
      Eigen::Vector2d rhs(-r0, -r1);
      Eigen::Vector2d step = J.fullPivLu().solve(rhs);
      const double len = step.norm();
      if (!(len == len)) throw ConvergenceError("invert_v: singular Jacobian");
      if (len > 0.5) step *= 0.5 / len;
      p[0] += step[0];
      p[1] += step[1];
    }
    throw ConvergenceError("invert_v: no convergence in 80 iterations");
  }
};

// Convexity verdict for a one-dimensional scan: consecutive chord slopes of
// Hbar against P must be nondecreasing up to the slack.
inline bool convex_slopes(const std::vector<PScanRecord>& rows, double slack = 1e-8) {
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double dp = rows[i].P[0] - rows[i - 1].P[0];
    if (!(dp > 0.0)) throw DomainError("convex_slopes: scan momenta must increase");
    const double s = (rows[i].Hbar - rows[i - 1].Hbar) / dp;
    if (s < prev - slack) return false;
    prev = s;
  }
  return true;
}

}  // namespace gmtorus
