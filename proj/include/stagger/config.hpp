// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stagger/materials.hpp"

namespace stagger {

struct MaterialSpec {
  std::string name = "elastic";
  double rho = 1.0;
  Moduli moduli{1.0, 0.0};
  PlasticCreepParams plastic;
  BiotParams biot;
  DamageParams damage;
  bool operator==(const MaterialSpec&) const = default;
};

struct IntegratorSpec {
  std::optional<double> tau; // empty: largest stable step for eta
  double eta = 0.1;
  double t_end = 1.0;
  int cfl_recheck_every = 0;
  bool enforce_energy = false;
  double energy_tol = 1e-9;
  bool cfl_override = false;
  bool operator==(const IntegratorSpec&) const = default;
};

struct LoadingSpec {
  std::array<double, 2> body_force{0.0, 0.0};       // force per unit volume
  std::vector<std::pair<double, double>> traction;  // (time, normal traction), piecewise linear
  bool operator==(const LoadingSpec&) const = default;

  double traction_at(double t) const {
    if (traction.empty()) return 0.0;
    if (t <= traction.front().first) return traction.front().second;
    for (std::size_t i = 1; i < traction.size(); ++i)
      if (t <= traction[i].first) {
        const auto [t0, g0] = traction[i - 1];
        const auto [t1, g1] = traction[i];
        return g0 + (g1 - g0) * (t - t0) / (t1 - t0);
      }
    return traction.back().second;
  }
};

enum class InitialVelocity { zero, sine, pulse };

struct InitialSpec {
  InitialVelocity velocity = InitialVelocity::sine;
  double amplitude = 1.0;
  std::optional<double> internal; // uniform internal variable; material default when empty
  bool operator==(const InitialSpec&) const = default;
};

struct OutputSpec {
  std::string energy_log = "energy.csv";
  int snapshot_every = 0;
  std::vector<std::string> snapshot_fields{"u", "v", "sigma", "z"};
  std::string out_dir = ".";
  bool operator==(const OutputSpec&) const = default;
};

struct SimConfig {
  unsigned long seed = 0;
  Grid grid;
  MaterialSpec material;
  IntegratorSpec integrator;
  LoadingSpec loading;
  InitialSpec initial;
  OutputSpec output;
  bool operator==(const SimConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double to_number(const std::string& v, const std::string& where) {
  double x = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  if (!v.empty() && *b == '+') ++b;
  const auto r = std::from_chars(b, e, x);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x))
    throw Error(ErrorKind::config, where + ": expected a number, got '" + v + "'");
  return x;
}

inline long to_integer(const std::string& v, const std::string& where) {
  long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw Error(ErrorKind::config, where + ": expected an integer, got '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::config, where + ": expected true or false, got '" + v + "'");
}

inline Boundary to_boundary(const std::string& v, const std::string& where) {
  if (v == "dirichlet") return Boundary::dirichlet;
  if (v == "neumann") return Boundary::neumann;
  if (v == "traction") return Boundary::traction;
  throw Error(ErrorKind::config, where + ": expected dirichlet, neumann or traction, got '" + v + "'");
}

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const std::set<std::string>& material_keys(const std::string& name) {
  static const std::map<std::string, std::set<std::string>> keys{
      {"elastic", {}},
      {"plastic_creep", {"K2", "G2", "sigma_y", "viscosity"}},
      {"biot", {"M", "beta", "L", "zeta_eq", "kappa", "mobility", "solver_tol"}},
      {"damage", {"eps0", "eps", "gc", "eps1", "eps_grad", "mode", "solver_tol"}},
  };
  const auto it = keys.find(name);
  if (it == keys.end())
    throw Error(ErrorKind::config, "material.name: expected elastic, plastic_creep, biot or damage, got '" + name + "'");
  return it->second;
}

} // namespace detail

// Parses the sectioned key = value format; every key is checked against the schema.
inline SimConfig parse_config(const std::string& text) {
  using namespace detail;
  // section -> key -> (value, line)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> raw;
  static const std::set<std::string> sections{"", "grid", "material", "integrator", "loading", "initial", "output"};
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section))
        throw Error(ErrorKind::config, section + ": unknown section (line " + std::to_string(lineno) + ")");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = unquote(trim(line.substr(eq + 1)));
    const std::string where = section.empty() ? key : section + "." + key;
    if (raw[section].count(key)) throw Error(ErrorKind::config, where + ": duplicate key");
    raw[section][key] = {val, lineno};
  }

  SimConfig c;
  auto take = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
    auto s = raw.find(sec);
    if (s == raw.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    std::string v = k->second.first;
    s->second.erase(k);
    return v;
  };
  auto loc = [](const std::string& sec, const std::string& key) { return sec.empty() ? key : sec + "." + key; };
  auto num = [&](const std::string& sec, const std::string& key, double& out) {
    if (auto v = take(sec, key)) out = to_number(*v, loc(sec, key));
  };
  auto require = [&](const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    if (!v) throw Error(ErrorKind::config, loc(sec, key) + ": missing required key");
    return *v;
  };

  if (auto v = take("", "seed")) {
    const long s = to_integer(*v, "seed");
    if (s < 0) throw Error(ErrorKind::config, "seed: must be nonnegative");
    c.seed = static_cast<unsigned long>(s);
  }

  // grid
  c.grid.dim = static_cast<int>(to_integer(require("grid", "dim"), "grid.dim"));
  if (c.grid.dim != 1 && c.grid.dim != 2) throw Error(ErrorKind::config, "grid.dim: must be 1 or 2");
  c.grid.nx = static_cast<int>(to_integer(require("grid", "nx"), "grid.nx"));
  if (c.grid.dim == 2) {
    c.grid.ny = static_cast<int>(to_integer(require("grid", "ny"), "grid.ny"));
  } else {
    c.grid.ny = 1;
    if (auto v = take("grid", "ny"); v && to_integer(*v, "grid.ny") != 1)
      throw Error(ErrorKind::config, "grid.ny: must be 1 for a 1D grid");
  }
  c.grid.h = to_number(require("grid", "h"), "grid.h");
  if (c.grid.nx < 2) throw Error(ErrorKind::config, "grid.nx: at least 2 cells are required");
  if (c.grid.dim == 2 && c.grid.ny < 2) throw Error(ErrorKind::config, "grid.ny: at least 2 cells are required");
  if (!(c.grid.h > 0.0)) throw Error(ErrorKind::config, "grid.h: must be positive");
  const char* side_names[4] = {"left", "right", "bottom", "top"};
  c.grid.sides = {Boundary::dirichlet, Boundary::dirichlet, Boundary::neumann, Boundary::neumann};
  if (c.grid.dim == 2) c.grid.sides[2] = c.grid.sides[3] = Boundary::dirichlet;
  for (int s = 0; s < 4; ++s)
    if (auto v = take("grid", side_names[s])) {
      if (c.grid.dim == 1 && s >= 2) throw Error(ErrorKind::config, std::string("grid.") + side_names[s] + ": not used by a 1D grid");
      c.grid.sides[s] = to_boundary(*v, std::string("grid.") + side_names[s]);
    }

  // material
  auto& m = c.material;
  m.name = require("material", "name");
  const auto& allowed = material_keys(m.name);
  num("material", "rho", m.rho);
  num("material", "K", m.moduli.K);
  num("material", "G", m.moduli.G);
  if (!(m.rho > 0.0)) throw Error(ErrorKind::config, "material.rho: must be positive");
  if (!(m.moduli.K > 0.0)) throw Error(ErrorKind::config, "material.K: must be positive");
  if (m.moduli.G < 0.0 || (c.grid.dim == 2 && !(m.moduli.G > 0.0)))
    throw Error(ErrorKind::config, "material.G: must be positive in 2D and nonnegative in 1D");
  if (auto it = raw.find("material"); it != raw.end())
    for (const auto& [key, val] : it->second)
      if (!allowed.count(key))
        throw Error(ErrorKind::config, "material." + key + ": unknown key for material '" + m.name + "'");
  if (m.name == "plastic_creep") {
    num("material", "K2", m.plastic.hardening.K);
    num("material", "G2", m.plastic.hardening.G);
    num("material", "sigma_y", m.plastic.sigma_y);
    num("material", "viscosity", m.plastic.viscosity);
    try {
      PlasticCreep check(m.plastic);
    } catch (const Error& e) {
      throw Error(ErrorKind::config, e.what());
    }
  } else if (m.name == "biot") {
    num("material", "M", m.biot.M);
    num("material", "beta", m.biot.beta);
    num("material", "L", m.biot.L);
    num("material", "zeta_eq", m.biot.zeta_eq);
    num("material", "kappa", m.biot.kappa);
    num("material", "mobility", m.biot.mobility);
    num("material", "solver_tol", m.biot.solver_tol);
    Biot check(m.biot);
  } else if (m.name == "damage") {
    num("material", "eps0", m.damage.eps0);
    num("material", "eps", m.damage.eps);
    num("material", "gc", m.damage.gc);
    num("material", "eps1", m.damage.eps1);
    num("material", "eps_grad", m.damage.eps_grad);
    num("material", "solver_tol", m.damage.solver_tol);
    if (auto v = take("material", "mode")) {
      if (*v == "unidirectional")
        m.damage.mode = DamageMode::unidirectional;
      else if (*v == "healing")
        m.damage.mode = DamageMode::healing;
      else
        throw Error(ErrorKind::config, "material.mode: expected unidirectional or healing, got '" + *v + "'");
    }
    Damage check(m.damage);
  }

  // integrator
  auto& ig = c.integrator;
  const std::string tau = require("integrator", "tau");
  const auto eta = take("integrator", "eta");
  if (tau == "auto") {
    if (!eta) throw Error(ErrorKind::config, "integrator.eta: required when integrator.tau = auto");
  } else {
    ig.tau = to_number(tau, "integrator.tau");
    if (!(*ig.tau > 0.0)) throw Error(ErrorKind::config, "integrator.tau: must be positive or auto");
  }
  if (eta) ig.eta = to_number(*eta, "integrator.eta");
  if (!(ig.eta > 0.0 && ig.eta < 4.0)) throw Error(ErrorKind::config, "integrator.eta: must lie in (0, 4)");
  ig.t_end = to_number(require("integrator", "t_end"), "integrator.t_end");
  if (!(ig.t_end > 0.0)) throw Error(ErrorKind::config, "integrator.t_end: must be positive");
  if (auto v = take("integrator", "cfl_recheck_every")) {
    ig.cfl_recheck_every = static_cast<int>(to_integer(*v, "integrator.cfl_recheck_every"));
    if (ig.cfl_recheck_every < 0) throw Error(ErrorKind::config, "integrator.cfl_recheck_every: must be nonnegative");
  }
  if (auto v = take("integrator", "enforce_energy")) ig.enforce_energy = to_bool(*v, "integrator.enforce_energy");
  num("integrator", "energy_tol", ig.energy_tol);
  if (!(ig.energy_tol > 0.0)) throw Error(ErrorKind::config, "integrator.energy_tol: must be positive");
  if (auto v = take("integrator", "cfl_override")) ig.cfl_override = to_bool(*v, "integrator.cfl_override");

  // loading
  if (auto v = take("loading", "body_force")) {
    const auto parts = split(*v, " ,");
    if (parts.empty() || static_cast<int>(parts.size()) > c.grid.dim)
      throw Error(ErrorKind::config, "loading.body_force: expected " + std::to_string(c.grid.dim) + " components");
    for (std::size_t i = 0; i < parts.size(); ++i)
      c.loading.body_force[i] = to_number(parts[i], "loading.body_force");
  }
  if (auto v = take("loading", "traction")) {
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& item : split(*v, " ,")) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw Error(ErrorKind::config, "loading.traction: expected time:value pairs, got '" + item + "'");
      const double t = to_number(item.substr(0, colon), "loading.traction");
      const double g = to_number(item.substr(colon + 1), "loading.traction");
      if (!(t > last)) throw Error(ErrorKind::config, "loading.traction: times must be strictly increasing");
      last = t;
      c.loading.traction.push_back({t, g});
    }
    bool any = false;
    for (int s = 0; s < 2 * c.grid.dim; ++s) any = any || c.grid.sides[s] == Boundary::traction;
    if (!any) throw Error(ErrorKind::config, "loading.traction: no grid side has boundary kind traction");
  }

  // initial data
  if (auto v = take("initial", "velocity")) {
    if (*v == "zero")
      c.initial.velocity = InitialVelocity::zero;
    else if (*v == "sine")
      c.initial.velocity = InitialVelocity::sine;
    else if (*v == "pulse")
      c.initial.velocity = InitialVelocity::pulse;
    else
      throw Error(ErrorKind::config, "initial.velocity: expected zero, sine or pulse, got '" + *v + "'");
  }
  num("initial", "amplitude", c.initial.amplitude);
  if (auto v = take("initial", "internal")) c.initial.internal = to_number(*v, "initial.internal");

  // output
  if (auto v = take("output", "energy_log")) c.output.energy_log = *v;
  if (auto v = take("output", "snapshot_every")) {
    c.output.snapshot_every = static_cast<int>(to_integer(*v, "output.snapshot_every"));
    if (c.output.snapshot_every < 0) throw Error(ErrorKind::config, "output.snapshot_every: must be nonnegative");
  }
  if (auto v = take("output", "snapshot_fields")) {
    c.output.snapshot_fields = split(*v, " ,");
    for (const auto& f : c.output.snapshot_fields)
      if (f != "u" && f != "v" && f != "sigma" && f != "z")
        throw Error(ErrorKind::config, "output.snapshot_fields: unknown field '" + f + "'");
  }
  if (auto v = take("output", "out_dir")) c.output.out_dir = *v;

  for (const auto& [sec, keys] : raw)
    for (const auto& [key, val] : keys)
      throw Error(ErrorKind::config, loc(sec, key) + ": unknown key (line " + std::to_string(val.second) + ")");
  return c;
}

inline std::string serialize_config(const SimConfig& c) {
  using detail::fmt;
  std::ostringstream os;
  os << "seed = " << c.seed << "\n\n[grid]\n";
  os << "dim = " << c.grid.dim << "\nnx = " << c.grid.nx << "\n";
  if (c.grid.dim == 2) os << "ny = " << c.grid.ny << "\n";
  os << "h = " << fmt(c.grid.h) << "\n";
  const char* side_names[4] = {"left", "right", "bottom", "top"};
  for (int s = 0; s < 2 * c.grid.dim; ++s) os << side_names[s] << " = " << to_string(c.grid.sides[s]) << "\n";

  const auto& m = c.material;
  os << "\n[material]\nname = " << m.name << "\nrho = " << fmt(m.rho) << "\nK = " << fmt(m.moduli.K)
     << "\nG = " << fmt(m.moduli.G) << "\n";
  if (m.name == "plastic_creep") {
    os << "K2 = " << fmt(m.plastic.hardening.K) << "\nG2 = " << fmt(m.plastic.hardening.G)
       << "\nsigma_y = " << fmt(m.plastic.sigma_y) << "\nviscosity = " << fmt(m.plastic.viscosity) << "\n";
  } else if (m.name == "biot") {
    os << "M = " << fmt(m.biot.M) << "\nbeta = " << fmt(m.biot.beta) << "\nL = " << fmt(m.biot.L)
       << "\nzeta_eq = " << fmt(m.biot.zeta_eq) << "\nkappa = " << fmt(m.biot.kappa)
       << "\nmobility = " << fmt(m.biot.mobility) << "\nsolver_tol = " << fmt(m.biot.solver_tol) << "\n";
  } else if (m.name == "damage") {
    os << "eps0 = " << fmt(m.damage.eps0) << "\neps = " << fmt(m.damage.eps) << "\ngc = " << fmt(m.damage.gc)
       << "\neps1 = " << fmt(m.damage.eps1) << "\neps_grad = " << fmt(m.damage.eps_grad) << "\nmode = "
       << (m.damage.mode == DamageMode::unidirectional ? "unidirectional" : "healing")
       << "\nsolver_tol = " << fmt(m.damage.solver_tol) << "\n";
  }

  const auto& ig = c.integrator;
  os << "\n[integrator]\ntau = " << (ig.tau ? fmt(*ig.tau) : std::string("auto")) << "\neta = " << fmt(ig.eta)
     << "\nt_end = " << fmt(ig.t_end) << "\ncfl_recheck_every = " << ig.cfl_recheck_every
     << "\nenforce_energy = " << (ig.enforce_energy ? "true" : "false") << "\nenergy_tol = " << fmt(ig.energy_tol)
     << "\ncfl_override = " << (ig.cfl_override ? "true" : "false") << "\n";

  os << "\n[loading]\nbody_force = " << fmt(c.loading.body_force[0]);
  if (c.grid.dim == 2) os << " " << fmt(c.loading.body_force[1]);
  os << "\n";
  if (!c.loading.traction.empty()) {
    os << "traction =";
    for (const auto& [t, g] : c.loading.traction) os << " " << fmt(t) << ":" << fmt(g);
    os << "\n";
  }

  os << "\n[initial]\nvelocity = "
     << (c.initial.velocity == InitialVelocity::zero ? "zero"
         : c.initial.velocity == InitialVelocity::sine ? "sine"
                                                        : "pulse")
     << "\namplitude = " << fmt(c.initial.amplitude) << "\n";
  if (c.initial.internal) os << "internal = " << fmt(*c.initial.internal) << "\n";

  os << "\n[output]\nenergy_log = " << c.output.energy_log << "\nsnapshot_every = " << c.output.snapshot_every
     << "\nsnapshot_fields =";
  for (const auto& f : c.output.snapshot_fields) os << " " << f;
  os << "\nout_dir = " << c.output.out_dir << "\n";
  return os.str();
}

} // namespace stagger
