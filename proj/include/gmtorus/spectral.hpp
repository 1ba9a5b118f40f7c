#pragma once

// Fourier-spectral operators on periodic uniform grids.
//
// Conventions: full-spectrum collocation, no dealiasing. Wavenumbers on an
// axis with N points and period L are k = 2*pi*m/L for m = 0..N/2,-N/2+1..-1.
// First derivatives zero the Nyquist coefficient m = N/2 (the standard
// convention for odd derivatives on even grids); the Laplacian keeps the
// full -|k|^2 multiplier.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "gmtorus/errors.hpp"
#include "gmtorus/grid.hpp"

namespace gmtorus {

namespace detail {

// FFTW planning is not thread-safe; plan creation is serialized globally and
// executed plans live in a per-thread cache keyed by grid shape. Plans use
// FFTW_ESTIMATE so results do not depend on planner timing.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlan {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t size = 0;

  FftPlan(int dim, int n0, int n1) {
    size = static_cast<std::size_t>(n0) * (dim == 2 ? n1 : 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(size);
    if (dim == 1) {
      fwd = fftw_plan_dft_1d(n0, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_1d(n0, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
  }

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

inline FftPlan& plan_for(const GridSpec& g) {
  thread_local std::map<std::tuple<int, int, int>, std::unique_ptr<FftPlan>> cache;
  auto key = std::make_tuple(g.dim, g.n[0], g.n[1]);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<FftPlan>(g.dim, g.n[0], g.n[1])).first;
  return *it->second;
}

// Signed integer mode for index j on an axis of size n.
inline int mode_of(int j, int n) { return j <= n / 2 ? j : j - n; }

// Applies one complex multiplier in Fourier space: out = ifft(m .* fft(f)).
// The callable receives (kg0, kg1, k2sum): the derivative wavenumbers per
// axis (Nyquist zeroed) and |k|^2 with Nyquist kept.
template <class Mult>
inline ScalarField apply_multiplier(const ScalarField& f, Mult&& m) {
  const GridSpec& g = f.grid;
  FftPlan& plan = plan_for(g);
  const std::size_t sz = g.size();
  for (std::size_t i = 0; i < sz; ++i) {
    plan.buf[i][0] = f.values[i];
    plan.buf[i][1] = 0.0;
  }
  fftw_execute(plan.fwd);
  const double scale = 1.0 / static_cast<double>(sz);
  const int n0 = g.n[0], n1 = g.dim == 2 ? g.n[1] : 1;
  std::size_t idx = 0;
  for (int j0 = 0; j0 < n0; ++j0) {
    const int m0 = mode_of(j0, n0);
    const double kf0 = 2.0 * M_PI * m0 / g.len[0];
    const double kg0 = (j0 == n0 / 2) ? 0.0 : kf0;
    for (int j1 = 0; j1 < n1; ++j1, ++idx) {
      double kg1 = 0.0, kf1 = 0.0;
      if (g.dim == 2) {
        const int m1 = mode_of(j1, n1);
        kf1 = 2.0 * M_PI * m1 / g.len[1];
        kg1 = (j1 == n1 / 2) ? 0.0 : kf1;
      }
      const std::complex<double> mult = m(kg0, kg1, kf0 * kf0 + kf1 * kf1);
      const double re = plan.buf[idx][0], im = plan.buf[idx][1];
      plan.buf[idx][0] = (re * mult.real() - im * mult.imag()) * scale;
      plan.buf[idx][1] = (re * mult.imag() + im * mult.real()) * scale;
    }
  }
  fftw_execute(plan.bwd);
  ScalarField out(g);
  for (std::size_t i = 0; i < sz; ++i) out.values[i] = plan.buf[i][0];
  return out;
}

}  // namespace detail

inline ScalarField derivative(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= f.grid.dim) throw DomainError("derivative: axis out of range");
  return detail::apply_multiplier(f, [axis](double kg0, double kg1, double) {
    return std::complex<double>(0.0, axis == 0 ? kg0 : kg1);
  });
}

inline VectorField gradient(const ScalarField& f) {
  VectorField out(f.grid);
  for (int a = 0; a < f.grid.dim; ++a) out.comp[a] = derivative(f, a);
  return out;
}

inline ScalarField divergence(const VectorField& F) {
  ScalarField out(F.grid);
  for (int a = 0; a < F.grid.dim; ++a) {
    ScalarField d = derivative(F.comp[a], a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
  }
  return out;
}

inline ScalarField laplacian(const ScalarField& f) {
  return detail::apply_multiplier(
      f, [](double, double, double k2) { return std::complex<double>(-k2, 0.0); });
}

inline double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values) s += x;
  return s * f.grid.cell();
}

inline double inner(const ScalarField& f, const ScalarField& g) {
  if (f.grid != g.grid) throw DomainError("inner: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid.cell();
}

inline double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

inline double min_value(const ScalarField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double x : f.values) m = std::min(m, x);
  return m;
}

inline double max_value(const ScalarField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double x : f.values) m = std::max(m, x);
  return m;
}

inline ScalarField pointwise_add(const ScalarField& f, const ScalarField& g) {
  if (f.grid != g.grid) throw DomainError("pointwise_add: grid mismatch");
  ScalarField out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  return out;
}

inline ScalarField pointwise_mul(const ScalarField& f, const ScalarField& g) {
  if (f.grid != g.grid) throw DomainError("pointwise_mul: grid mismatch");
  ScalarField out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= g[i];
  return out;
}

inline ScalarField scaled(const ScalarField& f, double c) {
  ScalarField out = f;
  for (double& x : out.values) x *= c;
  return out;
}

inline ScalarField shifted(const ScalarField& f, double c) {
  ScalarField out = f;
  for (double& x : out.values) x += c;
  return out;
}

// Relative floor below which log/div arguments count as non-positive.
inline constexpr double kPositivityFloor = 1e-13;

inline void require_positive(const ScalarField& f, const char* what) {
  const double floor = kPositivityFloor * sup_norm(f);
  if (!(min_value(f) > floor))
    throw DomainError(std::string(what) + ": argument not positive above relative floor");
}

inline ScalarField pointwise_div(const ScalarField& f, const ScalarField& g) {
  if (f.grid != g.grid) throw DomainError("pointwise_div: grid mismatch");
  require_positive(g, "pointwise_div");
  ScalarField out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= g[i];
  return out;
}

inline ScalarField pointwise_exp(const ScalarField& f) {
  ScalarField out = f;
  for (double& x : out.values) x = std::exp(x);
  return out;
}

inline ScalarField pointwise_log(const ScalarField& f) {
  require_positive(f, "pointwise_log");
  ScalarField out = f;
  for (double& x : out.values) x = std::log(x);
  return out;
}

inline ScalarField pointwise_abs2(const ScalarField& f) {
  ScalarField out = f;
  for (double& x : out.values) x = x * x;
  return out;
}

// |F|^2 summed over components.
inline ScalarField squared_magnitude(const VectorField& F) {
  ScalarField out(F.grid);
  for (int a = 0; a < F.grid.dim; ++a)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += F.comp[a][i] * F.comp[a][i];
  return out;
}

inline ScalarField dot(const VectorField& F, const VectorField& G) {
  if (F.grid != G.grid) throw DomainError("dot: grid mismatch");
  ScalarField out(F.grid);
  for (int a = 0; a < F.grid.dim; ++a)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += F.comp[a][i] * G.comp[a][i];
  return out;
}

// Field dump: '# grid: dim,N,L' header, one value per line, row-major,
// 17 significant digits. Per-axis N and L are 'x'-joined on 2-d grids.
inline std::string grid_header(const GridSpec& g) {
  char buf[128];
  if (g.dim == 1)
    std::snprintf(buf, sizeof buf, "# grid: 1,%d,%.17g", g.n[0], g.len[0]);
  else
    std::snprintf(buf, sizeof buf, "# grid: 2,%dx%d,%.17gx%.17g", g.n[0], g.n[1], g.len[0],
                  g.len[1]);
  return buf;
}

inline void dump_field_csv(const ScalarField& f, std::ostream& os) {
  os << grid_header(f.grid) << "\n";
  char buf[64];
  for (double x : f.values) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << "\n";
  }
}

inline void dump_field_csv(const ScalarField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DomainError("dump_field_csv: cannot open " + path);
  dump_field_csv(f, os);
}

}  // namespace gmtorus
