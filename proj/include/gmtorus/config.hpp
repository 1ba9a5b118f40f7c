#pragma once

// Run configuration: flat key = value files with # comments and dotted
// section prefixes. Parsing is total: every line either contributes to the
// config or raises a ConfigError naming the file and line, and unknown keys
// are errors rather than silent typos.
//
//   grid.dim = 1            grid.N = 128        grid.L = 6.2831853
//   potential.kind = trig   potential.terms = 1:1:0; 2:0:0.3
//   physics.hbar = 1.0      physics.P = 0.4     physics.P_scan = -1:1:21
//   run.seed = 1            run.delta = 1e-3    run.method = auto
//
// Two-dimensional values are comma pairs (grid.N = 48,48; physics.P =
// 0.4,0.1) and trig wavevectors become k0,k1:cos:sin.

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmtorus/eigensolver.hpp"
#include "gmtorus/errors.hpp"
#include "gmtorus/grid.hpp"
#include "gmtorus/potential.hpp"

namespace gmtorus {

struct RunConfig {
  int dim = 1;
  std::array<int, 2> N{0, 1};
  std::array<double, 2> L{0.0, 1.0};
  PotentialSpec potential;
  double hbar = 1.0;
  std::array<double, 2> P{0.0, 0.0};
  bool has_scan = false;
  double scan_start = 0.0, scan_stop = 0.0;
  int scan_count = 0;
  bool has_v_target = false;
  std::array<double, 2> V_target{0.0, 0.0};
  std::uint64_t seed = 1;
  int seeds = 25;
  std::string out;
  double delta = 1e-3;
  EigenMethod method = EigenMethod::Auto;
  bool fd = true;

  GridSpec grid() const {
    GridSpec g;
    g.dim = dim;
    g.n = N;
    g.len = L;
    if (dim == 1) {
      g.n[1] = 1;
      g.len[1] = 1.0;
    }
    g.validate();
    return g;
  }

  ScalarField realize_potential() const { return realize(potential, grid()); }

  std::vector<std::array<double, 2>> scan_points() const {
    if (!has_scan) throw ConfigError("config has no physics.P_scan range");
    std::vector<std::array<double, 2>> out_pts;
    out_pts.reserve(scan_count);
    for (int i = 0; i < scan_count; ++i) {
      const double t = scan_count == 1 ? 0.0 : static_cast<double>(i) / (scan_count - 1);
      out_pts.push_back({scan_start + t * (scan_stop - scan_start), P[1]});
    }
    return out_pts;
  }
};

namespace detail {

struct ConfigCursor {
  std::string where;  // "file:line" for diagnostics
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where + ": " + msg); }
};

inline std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

inline double parse_real(const ConfigCursor& c, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) c.fail("trailing characters in number '" + s + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    c.fail("expected a number, got '" + s + "'");
  }
}

inline long parse_integer(const ConfigCursor& c, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) c.fail("trailing characters in integer '" + s + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    c.fail("expected an integer, got '" + s + "'");
  }
}

inline std::array<double, 2> parse_real_pair(const ConfigCursor& c, const std::string& s,
                                             double fill) {
  const std::vector<std::string> parts = split(s, ',');
  if (parts.size() == 1) return {parse_real(c, parts[0]), fill};
  if (parts.size() == 2) return {parse_real(c, parts[0]), parse_real(c, parts[1])};
  c.fail("expected one value or a comma pair, got '" + s + "'");
}

inline std::array<int, 2> parse_int_pair(const ConfigCursor& c, const std::string& s,
                                         int fill) {
  const std::vector<std::string> parts = split(s, ',');
  if (parts.size() == 1) return {static_cast<int>(parse_integer(c, parts[0])), fill};
  if (parts.size() == 2)
    return {static_cast<int>(parse_integer(c, parts[0])),
            static_cast<int>(parse_integer(c, parts[1]))};
  c.fail("expected one value or a comma pair, got '" + s + "'");
}

inline bool parse_flag(const ConfigCursor& c, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  c.fail("expected true/false, got '" + s + "'");
}

inline std::vector<TrigTerm> parse_trig_terms(const ConfigCursor& c, const std::string& s) {
  std::vector<TrigTerm> terms;
  for (const std::string& entry : split(s, ';')) {
    if (entry.empty()) continue;
    const std::vector<std::string> f = split(entry, ':');
    if (f.size() != 3) c.fail("trig term must be k:cos:sin, got '" + entry + "'");
    TrigTerm t;
    t.k = parse_int_pair(c, f[0], 0);
    t.cos_coeff = parse_real(c, f[1]);
    t.sin_coeff = parse_real(c, f[2]);
    terms.push_back(t);
  }
  if (terms.empty()) c.fail("potential.terms is empty");
  return terms;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is, const std::string& name) {
  using detail::ConfigCursor;
  RunConfig cfg;
  bool saw_n = false, saw_l = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const ConfigCursor cur{name + ":" + std::to_string(lineno)};
    const std::string text = detail::trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) cur.fail("expected key = value");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string val = detail::trim(text.substr(eq + 1));
    if (val.empty()) cur.fail("empty value for '" + key + "'");

    if (key == "grid.dim") {
      const long d = detail::parse_integer(cur, val);
      if (d != 1 && d != 2) cur.fail("grid.dim must be 1 or 2");
      cfg.dim = static_cast<int>(d);
    } else if (key == "grid.N") {
      cfg.N = detail::parse_int_pair(cur, val, 1);
      saw_n = true;
    } else if (key == "grid.L") {
      cfg.L = detail::parse_real_pair(cur, val, 1.0);
      saw_l = true;
    } else if (key == "potential.kind") {
      if (val == "zero")
        cfg.potential = PotentialSpec::zero();
      else if (val == "constant")
        cfg.potential.kind = PotentialSpec::Kind::Constant;
      else if (val == "trig")
        cfg.potential.kind = PotentialSpec::Kind::Trig;
      else if (val == "wrapped_quadratic")
        cfg.potential.kind = PotentialSpec::Kind::WrappedQuadratic;
      else if (val == "samples")
        cfg.potential.kind = PotentialSpec::Kind::Samples;
      else
        cur.fail("unknown potential.kind '" + val + "'");
    } else if (key == "potential.c") {
      cfg.potential.c = detail::parse_real(cur, val);
    } else if (key == "potential.terms") {
      cfg.potential.terms = detail::parse_trig_terms(cur, val);
    } else if (key == "potential.omega") {
      cfg.potential.omega = detail::parse_real(cur, val);
    } else if (key == "potential.center") {
      cfg.potential.center = detail::parse_real_pair(cur, val, 0.0);
    } else if (key == "potential.path") {
      cfg.potential.path = val;
    } else if (key == "physics.hbar") {
      cfg.hbar = detail::parse_real(cur, val);
      if (!(cfg.hbar > 0.0)) cur.fail("physics.hbar must be positive");
    } else if (key == "physics.P") {
      cfg.P = detail::parse_real_pair(cur, val, 0.0);
    } else if (key == "physics.P_scan") {
      const std::vector<std::string> f = detail::split(val, ':');
      if (f.size() != 3) cur.fail("physics.P_scan must be start:stop:count");
      cfg.scan_start = detail::parse_real(cur, f[0]);
      cfg.scan_stop = detail::parse_real(cur, f[1]);
      const long n = detail::parse_integer(cur, f[2]);
      if (n < 2) cur.fail("physics.P_scan needs at least 2 points");
      if (!(cfg.scan_stop > cfg.scan_start)) cur.fail("physics.P_scan needs stop > start");
      cfg.scan_count = static_cast<int>(n);
      cfg.has_scan = true;
    } else if (key == "physics.V_target") {
      cfg.V_target = detail::parse_real_pair(cur, val, 0.0);
      cfg.has_v_target = true;
    } else if (key == "run.seed") {
      const long s = detail::parse_integer(cur, val);
      if (s < 0) cur.fail("run.seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "run.seeds") {
      const long s = detail::parse_integer(cur, val);
      if (s < 1) cur.fail("run.seeds must be at least 1");
      cfg.seeds = static_cast<int>(s);
    } else if (key == "run.out") {
      cfg.out = val;
    } else if (key == "run.delta") {
      cfg.delta = detail::parse_real(cur, val);
      if (!(cfg.delta > 0.0)) cur.fail("run.delta must be positive");
    } else if (key == "run.method") {
      if (val == "auto")
        cfg.method = EigenMethod::Auto;
      else if (val == "dense")
        cfg.method = EigenMethod::Dense;
      else if (val == "inverse_power")
        cfg.method = EigenMethod::InversePower;
      else
        cur.fail("run.method must be auto, dense, or inverse_power");
    } else if (key == "run.fd") {
      cfg.fd = detail::parse_flag(cur, val);
    } else {
      cur.fail("unknown key '" + key + "'");
    }
  }
  if (!saw_n) throw ConfigError(name + ": missing required key grid.N");
  if (!saw_l) throw ConfigError(name + ": missing required key grid.L");
  if (cfg.dim == 2 && (cfg.N[1] == 1)) throw ConfigError(name + ": grid.N needs two entries when grid.dim = 2");
  cfg.grid();  // validates dimensions
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is, path);
}

}  // namespace gmtorus
