#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gmtorus/errors.hpp"

namespace gmtorus {

// Uniform periodic grid on the torus, dim in {1,2}. Row-major storage,
// axis 0 slowest. Axis a has n[a] points covering a period of len[a].
struct GridSpec {
  int dim = 1;
  std::array<int, 2> n{8, 1};
  std::array<double, 2> len{1.0, 1.0};

  GridSpec() = default;

  GridSpec(int dim_, std::array<int, 2> n_, std::array<double, 2> len_)
      : dim(dim_), n(n_), len(len_) {
    validate();
  }

  static GridSpec line(int n0, double l0 = 1.0) {
    return GridSpec(1, {n0, 1}, {l0, 1.0});
  }

  static GridSpec square(int n_per_axis, double l_per_axis = 1.0) {
    return GridSpec(2, {n_per_axis, n_per_axis}, {l_per_axis, l_per_axis});
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw DomainError("GridSpec: dim must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
      if (n[a] < 8 || n[a] % 2 != 0)
        throw DomainError("GridSpec: points per axis must be even and >= 8, got " +
                          std::to_string(n[a]));
      if (!(len[a] > 0.0)) throw DomainError("GridSpec: period must be positive");
    }
    if (dim == 1 && n[1] != 1) throw DomainError("GridSpec: 1-d grid must have n[1] == 1");
  }

  std::size_t size() const { return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]); }

  // Quadrature weight of one cell.
  double cell() const {
    double c = len[0] / n[0];
    if (dim == 2) c *= len[1] / n[1];
    return c;
  }

  double spacing(int axis) const { return len[axis] / n[axis]; }

  // Node coordinate along an axis.
  double coord(int axis, int index) const { return len[axis] * index / n[axis]; }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && n == o.n && len == o.len;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;

  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}

  ScalarField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw DomainError("ScalarField: value count does not match grid");
  }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  void check_finite(const char* what = "field") const {
    for (double x : values)
      if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite value");
  }
};

struct VectorField {
  GridSpec grid;
  std::vector<ScalarField> comp;  // dim components

  VectorField() = default;

  explicit VectorField(const GridSpec& g) : grid(g) {
    comp.reserve(g.dim);
    for (int a = 0; a < g.dim; ++a) comp.emplace_back(g);
  }

  VectorField(const GridSpec& g, std::vector<ScalarField> c) : grid(g), comp(std::move(c)) {
    if (static_cast<int>(comp.size()) != g.dim)
      throw DomainError("VectorField: component count does not match dim");
    for (const auto& f : comp)
      if (f.grid != g) throw DomainError("VectorField: component grid mismatch");
  }
};

// Evaluate f(x0, x1) at every node, row-major; x1 is 0 on 1-d grids.
template <class F>
ScalarField sample(const GridSpec& g, F&& f) {
  ScalarField out(g);
  std::size_t idx = 0;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j, ++idx)
      out[idx] = f(g.coord(0, i), g.dim == 2 ? g.coord(1, j) : 0.0);
  return out;
}

}  // namespace gmtorus
