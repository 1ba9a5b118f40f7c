#pragma once

// Serialization of solver output: JSON reports with a fixed key order and
// CSV tables with %.17g values, so identical inputs reproduce identical
// bytes.

#include <array>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmtorus/cole_hopf.hpp"
#include "gmtorus/eigensolver.hpp"
#include "gmtorus/effective_hamiltonian.hpp"
#include "gmtorus/errors.hpp"
#include "gmtorus/grid.hpp"

namespace gmtorus {

using Json = nlohmann::ordered_json;

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline Json vector_json(const std::array<double, 2>& v, int dim) {
  Json a = Json::array();
  for (int c = 0; c < dim; ++c) a.push_back(v[c]);
  return a;
}

inline Json grid_json(const GridSpec& g) {
  Json j;
  j["dim"] = g.dim;
  Json n = Json::array(), l = Json::array();
  for (int a = 0; a < g.dim; ++a) {
    n.push_back(g.n[a]);
    l.push_back(g.len[a]);
  }
  j["N"] = n;
  j["L"] = l;
  return j;
}

inline Json solution_json(const DualEigenSolution& sol) {
  const int dim = sol.params.grid.dim;
  Json j;
  j["hbar"] = sol.params.hbar;
  j["P"] = vector_json(sol.params.P, dim);
  j["E0"] = sol.E0;
  j["gap"] = sol.gap;
  j["residual_w"] = sol.residual_w;
  j["residual_w_star"] = sol.residual_w_star;
  j["grid"] = grid_json(sol.params.grid);
  j["normalization_gauge"] = "int w^2 dx = 1, int w w* dx = 1";
  return j;
}

inline Json residual_suite_json(const ColeHopfFields& f) {
  const int dim = f.params.grid.dim;
  Json j;
  j["Hbar"] = f.Hbar;
  j["hj_v"] = f.residual_hj_v();
  j["hj_v_star"] = f.residual_hj_vstar();
  j["transport"] = f.residual_transport();
  j["eikonal"] = f.residual_eikonal();
  const auto fp = f.residual_fokker_planck();
  j["fokker_planck_v"] = fp.first;
  j["fokker_planck_v_star"] = fp.second;
  const IntegralIdentity ii = f.integral_identity();
  j["integral_identity"] = Json{{"lhs", ii.lhs}, {"rhs", ii.rhs},
                                {"difference", ii.lhs - ii.rhs}};
  j["mean_flux"] = vector_json(f.mean_flux(), dim);
  j["mean_flux_zero"] = vector_json(f.mean_flux_zero(), dim);
  const auto duals = f.dual_mean_gradients();
  j["mean_grad_v"] = vector_json(duals.first, dim);
  j["mean_grad_v_star"] = vector_json(duals.second, dim);
  const GradientBounds gb = f.gradient_bounds();
  j["sup_dv"] = gb.sup_dv;
  j["sup_dv_star"] = gb.sup_dv_star;
  j["sup_du"] = gb.sup_du;
  return j;
}

inline std::vector<std::string> scan_csv_header(int dim, bool with_fd) {
  std::vector<std::string> cols;
  auto axes = [&](const std::string& base) {
    if (dim == 1) {
      cols.push_back(base);
    } else {
      cols.push_back(base + "0");
      cols.push_back(base + "1");
    }
  };
  axes("P");
  cols.push_back("E0");
  cols.push_back("Hbar");
  axes("V");
  if (with_fd) {
    axes("grad_fd");
    if (dim == 1) {
      cols.push_back("hess_fd");
      cols.push_back("hess_formula");
    } else {
      for (const char* base : {"hess_fd_", "hess_formula_"})
        for (const char* ij : {"00", "01", "10", "11"})
          cols.push_back(std::string(base) + ij);
    }
  }
  cols.push_back("gap");
  return cols;
}

inline void write_scan_csv(std::ostream& os, const std::vector<PScanRecord>& rows, int dim,
                           bool with_fd) {
  const std::vector<std::string> cols = scan_csv_header(dim, with_fd);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const PScanRecord& r : rows) {
    std::vector<double> vals;
    for (int c = 0; c < dim; ++c) vals.push_back(r.P[c]);
    vals.push_back(r.E0);
    vals.push_back(r.Hbar);
    for (int c = 0; c < dim; ++c) vals.push_back(r.V[c]);
    if (with_fd) {
      for (int c = 0; c < dim; ++c) vals.push_back(r.grad_fd[c]);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) vals.push_back(r.hess_fd[a][b]);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) vals.push_back(r.hess_formula[a][b]);
    }
    vals.push_back(r.gap);
    for (std::size_t i = 0; i < vals.size(); ++i)
      os << (i ? "," : "") << format_g17(vals[i]);
    os << "\n";
  }
}

inline void write_scan_csv(const std::string& path, const std::vector<PScanRecord>& rows,
                           int dim, bool with_fd) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  write_scan_csv(os, rows, dim, with_fd);
}

}  // namespace gmtorus
