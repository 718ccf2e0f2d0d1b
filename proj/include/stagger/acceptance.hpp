// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "stagger/cfl.hpp"
#include "stagger/oracle.hpp"

namespace stagger::acceptance {

struct Result {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string format(const Result& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.2f s)", r.seconds);
  return std::string(r.pass ? "PASS" : "FAIL") + " " + std::to_string(r.id) + " " + r.title + ": " + r.detail + buf;
}

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}
inline std::string fix(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

constexpr Boundary D = Boundary::dirichlet;
constexpr Boundary N = Boundary::neumann;
constexpr Boundary T = Boundary::traction;

inline Discretization mixed_grid(int dim, int n, Moduli mod = {1.0, 1.0}) {
  Grid g{dim, n, dim == 1 ? 1 : n, 1.0 / n, {D, N, D, N}};
  if (dim == 1) mod.G = 0.0;
  return Discretization::build(g, mod, 1.0);
}

inline Field sine_velocity(const Discretization& d, double amplitude) {
  Field v(d.nv());
  for (std::size_t i = 0; i < d.nv(); ++i) {
    const auto x = d.velocity_position(i);
    v[i] = amplitude * std::sin(M_PI * x[0]) * (d.dim() == 2 ? std::cos(2.0 * x[1]) : 1.0);
  }
  return v;
}

struct NamedMaterial {
  std::string name;
  std::shared_ptr<Material> m;
  bool smooth; // differentiable dissipation potential: the ledger balance is an equality
};

inline std::vector<NamedMaterial> dissipative_materials() {
  return {
      {"maxwell", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.0, 0.0}, 0.0, 0.5}), true},
      {"zener", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.5, 0.5}, 0.0, 0.5}), true},
      {"viscoplastic", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.2, 0.2}, 0.3, 0.1}), false},
      {"biot", std::make_shared<Biot>(BiotParams{1.0, 0.8, 0.3, 0.0, 0.0, 0.01}), true},
      {"damage", std::make_shared<Damage>(DamageParams{1.0, 0.1, 0.05, 0.5, 0.0, DamageMode::unidirectional}), false},
      {"damage-healing", std::make_shared<Damage>(DamageParams{1.0, 0.1, 0.05, 0.5, 0.0, DamageMode::healing}), true},
  };
}

template <class F>
Result timed(int id, std::string title, F&& body) {
  Result r;
  r.id = id;
  r.title = std::move(title);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

} // namespace detail

inline constexpr double conservation_tol = 1e-10;
inline constexpr double conservation_seconds = 2.0;
inline constexpr double energy_tol = 1e-9;
inline constexpr double adjoint_tol = 1e-12;
inline constexpr double prox_tol = 1e-6;
inline constexpr double oracle_order_maxwell = 1.8;
inline constexpr double oracle_order_biot = 1.0;
inline constexpr double oracle_seconds = 30.0;
inline constexpr double wave_order_lo = 1.8;
inline constexpr double wave_order_hi = 2.2;
inline constexpr double gradient_tol = 1e-6;
inline constexpr double content_tol = 1e-10;
inline constexpr double trace_tol = 1e-12;
inline constexpr double scaling_tol = 0.2;

// Elastic 1D, no loads: the ledger energy stays at its initial value.
inline Result discrete_conservation(unsigned long) {
  return detail::timed(1, "discrete conservation", [](Result& r) {
    const auto t0 = std::chrono::steady_clock::now();
    Grid g{1, 100, 1, 0.01, {detail::D, detail::D, detail::N, detail::N}};
    const Discretization dd = Discretization::build(g, {1.0, 0.0}, 1.0);
    Elastic m;
    IntegratorConfig cfg;
    cfg.tau = 0.9 * max_stable_timestep(dd, m, {}, 0.0).tau_max;
    State s;
    s.v = detail::sine_velocity(dd, 1.0);
    s = bootstrap(s, dd, m, Loading{}, cfg);
    double drift = 0.0;
    for (int k = 0; k < 10000; ++k) {
      StepOutcome o = advance(s, dd, m, Loading{}, cfg);
      drift = std::fmax(drift, std::fabs(o.ledger.energy - s.energy0));
      s = std::move(o.state);
    }
    const double rel = drift / std::fabs(s.energy0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.detail = "max relative drift " + detail::sci(rel) + " over 10000 steps (tol " + detail::sci(conservation_tol) +
               "), " + detail::fix(secs) + " s (limit " + detail::fix(conservation_seconds) + " s)";
    r.pass = rel <= conservation_tol && secs < conservation_seconds;
  });
}

// Per-step ledger residuals for every dissipative material in 1D and 2D.
inline Result energy_inequality(unsigned long) {
  return detail::timed(2, "energy inequality", [](Result& r) {
    bool ok = true;
    std::string worst;
    double worst_rel = 0.0;
    for (int dim : {1, 2}) {
      const Discretization d = detail::mixed_grid(dim, dim == 1 ? 50 : 16);
      for (const auto& nm : detail::dissipative_materials()) {
        const Material& m = *nm.m;
        IntegratorConfig cfg;
        cfg.tau = 0.9 * max_stable_timestep(d, m, m.cfl_probe(d), 0.1).tau_max;
        State s;
        s.v = detail::sine_velocity(d, 3.0);
        s.z = m.cfl_probe(d);
        s = bootstrap(s, d, m, Loading{}, cfg);
        const double scale = std::fmax(1.0, std::fabs(s.energy0));
        double hi = -1e300, lo = 1e300;
        for (int k = 0; k < 1000; ++k) {
          StepOutcome o = advance(s, d, m, Loading{}, cfg);
          hi = std::fmax(hi, o.ledger.residual);
          lo = std::fmin(lo, o.ledger.residual);
          s = std::move(o.state);
        }
        const double bound = nm.smooth ? std::fmax(hi, -lo) : hi;
        const bool pass = bound <= energy_tol * scale;
        ok = ok && pass;
        if (!pass || bound / scale > worst_rel) {
          worst_rel = std::fmax(worst_rel, bound / scale);
          worst = std::to_string(dim) + "D " + nm.name;
        }
      }
    }
    r.detail = "worst scaled residual " + detail::sci(worst_rel) + " (" + worst + ", tol " + detail::sci(energy_tol) +
               ", two-sided for smooth dissipation)";
    r.pass = ok;
  });
}

// Stable just below the bound, blow-up just above it.
inline Result cfl_sharpness(unsigned long) {
  return detail::timed(3, "CFL sharpness", [](Result& r) {
    Grid g{1, 50, 1, 1.0 / 50, {detail::D, detail::D, detail::N, detail::N}};
    const Discretization d = Discretization::build(g, {1.0, 0.0}, 1.0);
    Elastic m;
    auto run = [&](double tau, double& ratio) {
      IntegratorConfig cfg;
      cfg.tau = tau;
      State s;
      s.v = detail::sine_velocity(d, 1.0);
      s = bootstrap(s, d, m, Loading{}, cfg);
      const double e0 = plain_energy(d, m, s);
      ratio = 1.0;
      for (int k = 0; k < 5000; ++k) {
        s = advance(s, d, m, Loading{}, cfg).state;
        const double e = plain_energy(d, m, s);
        if (!std::isfinite(e)) {
          ratio = std::numeric_limits<double>::infinity();
          return k + 1;
        }
        ratio = std::fmax(ratio, e / e0);
        if (ratio > 1e6) return k + 1;
      }
      return 5000;
    };
    double below = 0.0, above = 0.0;
    run(0.99 * max_stable_timestep(d, m, {}, 0.01).tau_max, below);
    const int k_blow = run(1.05 * max_stable_timestep(d, m, {}, 0.0).tau_max, above);
    r.pass = below <= 2.0 && above > 1e6;
    r.detail = "max E/E0 " + detail::fix(below) + " at 0.99 tau_max, " +
               (above > 1e6 ? "blow-up after " + std::to_string(k_blow) + " steps" : "no blow-up (max " + detail::sci(above) + ")") +
               " at 1.05 tau_max";
  });
}

inline Result adjointness(unsigned long seed) {
  return detail::timed(4, "adjointness", [seed](Result& r) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Boundary kinds[3] = {detail::D, detail::N, detail::T};
    double worst = 0.0;
    int configs = 0;
    auto probe = [&](const Discretization& d) {
      ++configs;
      for (int k = 0; k < 100; ++k) {
        Field s(d.ns()), v(d.nv());
        for (double& x : s) x = nd(rng);
        for (double& x : v) x = nd(rng);
        const Field ev = d.apply_E(v);
        const Field es = d.apply_E_adjoint(s);
        const double a = wdot(d.stress_weights(), s, ev);
        const double b = dot(es, v);
        const double scale = std::sqrt(wdot(d.stress_weights(), s, s) * wdot(d.stress_weights(), ev, ev)) +
                             norm2(es) * norm2(v);
        worst = std::fmax(worst, std::fabs(a - b) / scale);
      }
    };
    for (Boundary l : kinds)
      for (Boundary rr : kinds) probe(Discretization::build({1, 7, 1, 1.0 / 7, {l, rr, detail::N, detail::N}}, {1.0, 0.0}, 1.0));
    for (Boundary l : kinds)
      for (Boundary rr : kinds)
        for (Boundary b : kinds)
          for (Boundary t : kinds) probe(Discretization::build({2, 5, 4, 0.2, {l, rr, b, t}}, {1.0, 0.5}, 1.0));
    r.detail = "worst relative defect " + detail::sci(worst) + " over " + std::to_string(configs) +
               " boundary configurations x 100 pairs (tol " + detail::sci(adjoint_tol) + ")";
    r.pass = worst <= adjoint_tol;
  });
}

// Internal steps against brute-force line minimization of the incremental objective.
inline Result prox_equivalence(unsigned long seed) {
  return detail::timed(5, "prox oracle equivalence", [seed](Result& r) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const Discretization d = Discretization::build({1, 3, 1, 1.0 / 3, {detail::D, detail::N, detail::N, detail::N}}, {1.0, 0.0}, 1.0);
    double worst = 0.0;
    std::string worst_name;
    for (const auto& nm : detail::dissipative_materials()) {
      const Material& m = *nm.m;
      const bool damage = nm.name.rfind("damage", 0) == 0;
      const bool biot = nm.name == "biot";
      for (int k = 0; k < 200; ++k) {
        const double tau = 0.01 + 0.5 * ud(rng);
        Field s(d.ns()), z(m.z_size(d)), dir(m.z_size(d));
        for (double& x : s) x = nd(rng);
        for (double& x : z) x = damage ? 0.2 + 0.8 * ud(rng) : 0.5 * nd(rng);
        for (double& x : dir) x = nd(rng);
        if (k % 4 == 0) dir = add(m.internal_step(d, s, z, tau), z, -1.0);
        if (biot) {
          const Field& pw = d.point_weights();
          double net = 0.0, tot = 0.0;
          for (std::size_t p = 0; p < dir.size(); ++p) {
            net += pw[p] * dir[p];
            tot += pw[p];
          }
          for (double& x : dir) x -= net / tot;
        }
        const double n = norm_inf(dir);
        if (n == 0.0) continue;
        dir = scaled(dir, 1.0 / n);
        const Field z_star = m.internal_step(d, s, z, tau);
        const double t = prox_line_offset(d, m, s, z, tau, z_star, dir);
        const double err = std::fabs(t) / std::fmax(1.0, norm_inf(z_star));
        if (err > worst) {
          worst = err;
          worst_name = nm.name;
        }
      }
    }
    r.detail = "worst offset " + detail::sci(worst) + (worst_name.empty() ? "" : " (" + worst_name + ")") +
               " over 200 instances per material (tol " + detail::sci(prox_tol) + ")";
    r.pass = worst <= prox_tol;
  });
}

// Maxwell and Biot against the Crank-Nicolson oracle.
inline Result oracle_self_convergence(unsigned long) {
  return detail::timed(6, "self-convergence vs implicit oracle", [](Result& r) {
    auto study = [](int n, const Material& m, double tau0) {
      Grid g{1, n, 1, 1.0 / n, {detail::D, detail::D, detail::N, detail::N}};
      const Discretization d = Discretization::build(g, {1.0, 0.0}, 1.0);
      State s;
      s.v = detail::sine_velocity(d, 1.0);
      s.u.assign(d.nv(), 0.0);
      s.sigma.assign(d.ns(), 0.0);
      s.z.assign(m.z_size(d), 0.0);
      return oracle_convergence(d, m, Loading{}, s, tau0, 1.0, 4);
    };
    const auto t0 = std::chrono::steady_clock::now();
    const PlasticCreep maxwell(PlasticCreepParams{{0.0, 0.0}, 0.0, 1.0});
    const Biot biot(BiotParams{1.0, 0.8, 0.3, 0.0, 0.01, 0.5});
    const ConvergenceReport a = study(8, maxwell, 0.05);
    const ConvergenceReport b = study(4, biot, 0.05);
    const bool pa = a.errors.size() == 4 && a.order >= oracle_order_maxwell;
    const bool pb = b.errors.size() == 4 && b.order >= oracle_order_biot;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.detail = "Maxwell order " + detail::fix(a.order) + " (need " + detail::fix(oracle_order_maxwell) + "), Biot order " +
               detail::fix(b.order) + " (need " + detail::fix(oracle_order_biot) + "), " + detail::fix(secs) + " s";
    r.pass = pa && pb && secs < oracle_seconds;
  });
}

inline Result manufactured_solution(unsigned long) {
  return detail::timed(7, "manufactured standing wave", [](Result& r) {
    const ConvergenceReport rep = standing_wave_convergence(8, 3, 0.5, 1.0);
    r.detail = "joint order " + detail::fix(rep.order) + " (need [" + detail::fix(wave_order_lo) + ", " +
               detail::fix(wave_order_hi) + "])";
    r.pass = rep.order >= wave_order_lo && rep.order <= wave_order_hi;
  });
}

inline Result gradient_checks(unsigned long seed) {
  return detail::timed(8, "gradient checks", [seed](Result& r) {
    const std::vector<std::pair<std::string, std::shared_ptr<Material>>> mats{
        {"elastic", std::make_shared<Elastic>()},
        {"plastic_creep", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.4, 0.3}, 0.2, 1.0})},
        {"biot", std::make_shared<Biot>(BiotParams{1.5, 0.7, 0.4, 0.1, 0.05, 1.0})},
        {"damage", std::make_shared<Damage>(DamageParams{1.0, 0.2, 0.5, 1.0, 0.01, DamageMode::unidirectional})},
    };
    double worst = 0.0;
    std::string worst_name = "none";
    for (int dim : {1, 2}) {
      Grid g{dim, dim == 1 ? 6 : 4, dim == 1 ? 1 : 4, 0.25, {detail::D, detail::T, detail::N, detail::D}};
      const Discretization d = Discretization::build(g, {1.3, dim == 1 ? 0.0 : 0.7}, 1.0);
      for (const auto& [name, m] : mats) {
        const bool damage = name == "damage";
        const GradientReport rep = gradient_check(d, *m, 20, static_cast<unsigned>(seed), damage ? 0.6 : 0.0, damage ? 0.3 : 1.0);
        const double w = std::fmax(rep.sigma_defect, rep.z_defect);
        if (w >= worst) {
          worst = w;
          worst_name = std::to_string(dim) + "D " + name;
        }
      }
    }
    r.detail = "worst relative defect " + detail::sci(worst) + " (" + worst_name + ", tol " + detail::sci(gradient_tol) + ")";
    r.pass = worst <= gradient_tol;
  });
}

// Content conservation, damage monotonicity and positivity, trace-free plastic strain.
inline Result structural_properties(unsigned long) {
  return detail::timed(9, "structural properties", [](Result& r) {
    double content = 0.0, increase = 0.0, alpha_min = 1.0, trace = 0.0;
    for (int dim : {1, 2}) {
      const Discretization d = detail::mixed_grid(dim, dim == 1 ? 50 : 16);
      const Field& pw = d.point_weights();
      {
        const Biot m(BiotParams{1.0, 0.8, 0.3, 0.0, 0.0, 0.01});
        IntegratorConfig cfg;
        cfg.tau = 0.9 * max_stable_timestep(d, m, m.cfl_probe(d), 0.1).tau_max;
        State s;
        s.v = detail::sine_velocity(d, 3.0);
        s.z.resize(d.npoints());
        for (std::size_t p = 0; p < s.z.size(); ++p) s.z[p] = 0.2 + 0.1 * std::cos(M_PI * d.point_position(p)[0]);
        auto total = [&](const Field& z) {
          double t = 0.0;
          for (std::size_t p = 0; p < z.size(); ++p) t += pw[p] * z[p];
          return t;
        };
        const double c0 = total(s.z);
        for (int k = 0; k < 1000; ++k) {
          s = advance(s, d, m, Loading{}, cfg).state;
          content = std::fmax(content, std::fabs(total(s.z) - c0) / std::fmax(1.0, std::fabs(c0)));
        }
      }
      {
        const Damage m(DamageParams{1.0, 0.1, 0.05, 0.5, 0.0, DamageMode::unidirectional});
        IntegratorConfig cfg;
        cfg.tau = 0.9 * max_stable_timestep(d, m, m.cfl_probe(d), 0.1).tau_max;
        State s;
        s.v = detail::sine_velocity(d, 3.0);
        s.z = m.cfl_probe(d);
        for (int k = 0; k < 1000; ++k) {
          Field before = s.z;
          s = advance(s, d, m, Loading{}, cfg).state;
          for (std::size_t p = 0; p < s.z.size(); ++p) {
            increase = std::fmax(increase, s.z[p] - before[p]);
            alpha_min = std::fmin(alpha_min, s.z[p]);
          }
        }
      }
      if (dim == 2) {
        const PlasticCreep m(PlasticCreepParams{{0.2, 0.2}, 0.3, 0.1});
        IntegratorConfig cfg;
        cfg.tau = 0.9 * max_stable_timestep(d, m, m.cfl_probe(d), 0.1).tau_max;
        State s;
        s.v = detail::sine_velocity(d, 3.0);
        for (int k = 0; k < 1000; ++k) {
          s = advance(s, d, m, Loading{}, cfg).state;
          trace = std::fmax(trace, norm_inf(d.point_trace(s.z)));
        }
      }
    }
    r.detail = "content drift " + detail::sci(content) + " (tol " + detail::sci(content_tol) + "), max damage increase " +
               detail::sci(increase) + ", min damage " + detail::fix(alpha_min) + ", max plastic trace " +
               detail::sci(trace) + " (tol " + detail::sci(trace_tol) + ")";
    r.pass = content <= content_tol && increase <= 0.0 && alpha_min >= 0.0 && trace <= trace_tol;
  });
}

// Fitted exponent of the damage time-step bound against h / sqrt(1 + eps/h^2).
inline Result damage_cfl_scaling(unsigned long) {
  return detail::timed(10, "damage CFL scaling", [](Result& r) {
    const double eps = 0.01;
    const Damage m(DamageParams{1.0, 0.1, 1.0, 1.0, eps, DamageMode::unidirectional});
    bool ok = true;
    std::string text;
    for (int dim : {1, 2}) {
      std::vector<double> hs, taus, ref;
      for (int n : {16, 32, 64}) {
        const double h = 1.0 / n;
        Grid g{dim, n, dim == 1 ? 1 : n, h, {detail::D, detail::D, detail::D, detail::D}};
        const Discretization d = Discretization::build(g, {1.0, dim == 1 ? 0.0 : 1.0}, 1.0);
        hs.push_back(h);
        taus.push_back(max_stable_timestep(d, m, m.cfl_probe(d), 0.0).tau_max);
        ref.push_back(h / std::sqrt(1.0 + eps / (h * h)));
      }
      const double fit = fit_order(hs, taus), want = fit_order(hs, ref);
      ok = ok && std::fabs(fit - want) <= scaling_tol;
      text += (text.empty() ? "" : "; ") + std::to_string(dim) + "D exponent " + detail::fix(fit) + " vs " + detail::fix(want);
    }
    r.detail = text + " (tol " + detail::fix(scaling_tol) + ")";
    r.pass = ok;
  });
}

inline std::vector<Result> run_all(unsigned long seed, const std::function<void(const Result&)>& report = {}) {
  const std::vector<std::function<Result(unsigned long)>> criteria{
      discrete_conservation, energy_inequality, cfl_sharpness,  adjointness,           prox_equivalence,
      oracle_self_convergence, manufactured_solution, gradient_checks, structural_properties, damage_cfl_scaling};
  std::vector<Result> out;
  for (const auto& c : criteria) {
    out.push_back(c(seed));
    if (report) report(out.back());
  }
  return out;
}

} // namespace stagger::acceptance
