#pragma once

// Declarative potentials W : T^n -> R and their realization on a grid.

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmtorus/grid.hpp"
#include "gmtorus/spectral.hpp"

namespace gmtorus {

struct TrigTerm {
  std::array<int, 2> k{0, 0};  // integer wavevector, k[1] unused in 1-d
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

struct PotentialSpec {
  enum class Kind { Zero, Constant, Trig, WrappedQuadratic, Samples };

  Kind kind = Kind::Zero;
  double c = 0.0;                      // Constant
  std::vector<TrigTerm> terms;         // Trig
  double omega = 1.0;                  // WrappedQuadratic
  std::array<double, 2> center{0.0, 0.0};
  std::string path;                    // Samples

  static PotentialSpec zero() { return {}; }

  static PotentialSpec constant(double value) {
    PotentialSpec s;
    s.kind = Kind::Constant;
    s.c = value;
    return s;
  }

  static PotentialSpec trig(std::vector<TrigTerm> t) {
    PotentialSpec s;
    s.kind = Kind::Trig;
    s.terms = std::move(t);
    return s;
  }

  static PotentialSpec wrapped_quadratic(double omega, std::array<double, 2> center) {
    PotentialSpec s;
    s.kind = Kind::WrappedQuadratic;
    s.omega = omega;
    s.center = center;
    return s;
  }

  static PotentialSpec samples(std::string file_path) {
    PotentialSpec s;
    s.kind = Kind::Samples;
    s.path = std::move(file_path);
    return s;
  }
};

// Shortest signed distance from x to c on a circle of period L.
inline double wrapped_distance(double x, double c, double L) {
  double d = x - c;
  d -= L * std::round(d / L);
  return d;
}

// Ground-state mass left at the far side of the torus when the wrapped
// quadratic is used as a harmonic-oscillator stand-in; must be < 1e-12 for
// the periodization to be numerically exact.
inline double wrapped_quadratic_tail(double omega, double L, double hbar) {
  return std::exp(-omega * L * L / (8.0 * hbar));
}

inline ScalarField realize(const PotentialSpec& spec, const GridSpec& grid) {
  switch (spec.kind) {
    case PotentialSpec::Kind::Zero:
      return ScalarField(grid, 0.0);
    case PotentialSpec::Kind::Constant:
      return ScalarField(grid, spec.c);
    case PotentialSpec::Kind::Trig: {
      for (const TrigTerm& t : spec.terms)
        for (int a = 0; a < grid.dim; ++a)
          if (std::abs(t.k[a]) >= grid.n[a] / 2)
            throw SpecError("potential: trig wavevector at or above Nyquist");
      return sample(grid, [&](double x0, double x1) {
        double w = 0.0;
        for (const TrigTerm& t : spec.terms) {
          double phase = 2.0 * M_PI * (t.k[0] * x0 / grid.len[0]);
          if (grid.dim == 2) phase += 2.0 * M_PI * (t.k[1] * x1 / grid.len[1]);
          w += t.cos_coeff * std::cos(phase) + t.sin_coeff * std::sin(phase);
        }
        return w;
      });
    }
    case PotentialSpec::Kind::WrappedQuadratic:
      return sample(grid, [&](double x0, double x1) {
        double d2 = std::pow(wrapped_distance(x0, spec.center[0], grid.len[0]), 2);
        if (grid.dim == 2)
          d2 += std::pow(wrapped_distance(x1, spec.center[1], grid.len[1]), 2);
        return 0.5 * spec.omega * spec.omega * d2;
      });
    case PotentialSpec::Kind::Samples: {
      std::ifstream is(spec.path);
      if (!is) throw SpecError("potential: cannot open samples file " + spec.path);
      std::vector<double> vals;
      std::string line;
      while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        try {
          vals.push_back(std::stod(line));
        } catch (const std::exception&) {
          throw SpecError("potential: bad sample value '" + line + "'");
        }
      }
      if (vals.size() != grid.size())
        throw SpecError("potential: sample count " + std::to_string(vals.size()) +
                        " does not match grid size " + std::to_string(grid.size()));
      return ScalarField(grid, std::move(vals));
    }
  }
  throw SpecError("potential: unknown kind");
}

}  // namespace gmtorus
