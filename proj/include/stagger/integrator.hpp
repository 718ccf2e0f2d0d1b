// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "stagger/materials.hpp"

namespace stagger {

// Fields at one time level. After the first step `sigma` lives half a step behind `v`,
// `v_prev` is the velocity one level earlier.
struct State {
  Field u, v, sigma, z, v_prev;
  long k = 0;
  bool started = false;
  double energy0 = 0.0;
};

struct Loading {
  Field body_force;                              // covector on the velocity layout, constant in time
  std::function<Field(double)> boundary_force;   // traction covector F_b(t); empty means none
  std::function<Field(double)> offset;           // stress offset G(t); empty means none

  Field force(double t, std::size_t nv) const {
    Field f = body_force.empty() ? Field(nv, 0.0) : body_force;
    require_size(f, nv, "body force");
    if (boundary_force) axpy(1.0, boundary_force(std::fmax(0.0, t)), f);
    return f;
  }
  // Force at the half level (k+1/2)tau, held at t = 0 before the start.
  Field force_half(long k, double tau, std::size_t nv) const { return force((k + 0.5) * tau, nv); }

  // Mean rate of the offset over the k-th stress interval [(k-1/2)tau, (k+1/2)tau],
  // with G held at G(0) before t = 0.
  Field rate(long k, double tau, std::size_t ns) const {
    if (!offset) return Field(ns, 0.0);
    const double t1 = (k + 0.5) * tau;
    const double t0 = std::fmax(0.0, (k - 0.5) * tau);
    return scaled(add(offset(t1), offset(t0), -1.0), 1.0 / tau);
  }
};

struct IntegratorConfig {
  double tau = 0.0;
  double eta = 0.1;
  double t_end = 1.0;
  int cfl_recheck_every = 0;
  bool enforce_energy_inequality = false;
  double energy_tol = 1e-9;
  bool cfl_override = false;

  void validate() const {
    if (!(tau > 0.0)) throw Error(ErrorKind::config, "integrator.tau: must be positive");
    if (!(eta > 0.0 && eta < 4.0)) throw Error(ErrorKind::config, "integrator.eta: must lie in (0, 4)");
    if (!(t_end > 0.0)) throw Error(ErrorKind::config, "integrator.t_end: must be positive");
    if (cfl_recheck_every < 0) throw Error(ErrorKind::config, "integrator.cfl_recheck_every: must be nonnegative");
  }
};

struct EnergyLedger {
  long k = 0;           // level of the new state
  double t = 0.0;
  double kinetic = 0.0; // 1/2 <M v^{k+1}, v^k>
  double stored = 0.0;  // Phi(Sigma^{k+1}, z^{k+1})
  double energy = 0.0;  // kinetic + stored
  double dissipated_step = 0.0;
  double external_work_step = 0.0;
  double stability_coeff = 1.0;
  double residual = 0.0;
  bool flagged = false;
};

inline Field mass_solve(const Discretization& d, const Field& f) { return divided(f, d.mass()); }

inline void check_finite(const Field& f, const char* what) {
  if (!all_finite(f)) throw Error(ErrorKind::solver, std::string("non-finite values in ") + what);
}

inline double kinetic_pairing(const Discretization& d, const Field& a, const Field& b) {
  return 0.5 * wdot(d.mass(), a, b);
}

// Sigma^{k+1} = Sigma^k + tau (I C E v^k + D^k)
inline Field step_sigma(const State& s, const Discretization& d, const Loading& load, const IntegratorConfig& cfg) {
  check_finite(s.v, "velocity");
  check_finite(s.sigma, "proto-stress");
  Field next = s.sigma;
  axpy(cfg.tau, d.apply_I(d.apply_C(d.apply_E(s.v))), next);
  axpy(cfg.tau, load.rate(s.k, cfg.tau, d.ns()), next);
  return next;
}

inline Field step_internal(const State& s, const Field& sigma_next, const Discretization& d, const Material& m,
                           const IntegratorConfig& cfg) {
  check_finite(s.z, "internal variable");
  Field z = m.internal_step(d, sigma_next, s.z, cfg.tau);
  check_finite(z, "internal variable");
  return z;
}

struct VelocityUpdate {
  Field v, u, S;
};

inline VelocityUpdate step_velocity(const State& s, const Field& sigma_next, const Field& z_next,
                                    const Discretization& d, const Material& m, const Loading& load,
                                    const IntegratorConfig& cfg) {
  VelocityUpdate r;
  r.S = m.true_stress(d, sigma_next, z_next);
  const Field f = add(d.apply_E_adjoint(r.S), load.force_half(s.k, cfg.tau, d.nv()), -1.0);
  r.v = s.v;
  axpy(-cfg.tau, mass_solve(d, f), r.v);
  r.u = s.u.empty() ? Field(d.nv(), 0.0) : s.u;
  axpy(cfg.tau, r.v, r.u);
  check_finite(r.v, "velocity");
  return r;
}

inline double stored_energy(const Discretization& d, const Material& m, const State& s) {
  return m.phi(d, s.sigma, s.z);
}

inline double total_energy(const Discretization& d, const Material& m, const State& s) {
  return kinetic_pairing(d, s.v, s.v_prev) + stored_energy(d, m, s);
}

// Positive energy 1/2 <M v, v> + Phi; unlike the ledger energy it grows when the scheme is unstable.
inline double plain_energy(const Discretization& d, const Material& m, const State& s) {
  return 0.5 * wdot(d.mass(), s.v, s.v) + m.phi(d, s.sigma, s.z);
}

// Shifts the proto-stress half a step back so that it is centred against the first velocity
// update, and sets the level -1 velocity consistent with the momentum balance at level 0.
inline State bootstrap(const State& s0, const Discretization& d, const Material& m, const Loading& load,
                       const IntegratorConfig& cfg) {
  State s = s0;
  if (s.u.empty()) s.u.assign(d.nv(), 0.0);
  if (s.v.empty()) s.v.assign(d.nv(), 0.0);
  if (s.sigma.empty()) s.sigma.assign(d.ns(), 0.0);
  if (s.z.empty()) s.z.assign(m.z_size(d), 0.0);
  require_size(s.v, d.nv(), "velocity");
  require_size(s.sigma, d.ns(), "proto-stress");
  require_size(s.z, m.z_size(d), "internal variable");
  axpy(-0.5 * cfg.tau, d.apply_C(d.apply_E(s.v)), s.sigma);
  const Field S0 = m.true_stress(d, s.sigma, s.z);
  s.v_prev = s.v;
  axpy(cfg.tau, mass_solve(d, add(d.apply_E_adjoint(S0), load.force_half(-1, cfg.tau, d.nv()), -1.0)), s.v_prev);
  s.started = true;
  s.energy0 = total_energy(d, m, s);
  return s;
}

// Proto-stress moved forward to the velocity's time level (second-order accurate).
inline Field synchronized_sigma(const State& s, const Discretization& d, const Loading& load, double tau) {
  Field r = s.sigma;
  axpy(0.5 * tau, d.apply_C(d.apply_E(s.v)), r);
  axpy(0.5 * tau, load.rate(s.k, tau, d.ns()), r);
  return r;
}

// a = 1 - (tau^2/4) <E*S, M^-1 E*S> / (2 Phi). Below `phi_floor` the quotient is round-off
// and 1 is reported.
inline double stability_coefficient(const Discretization& d, const Field& S, double phi, double tau,
                                    double phi_floor = 0.0) {
  const Field f = d.apply_E_adjoint(S);
  const double q = dot(f, mass_solve(d, f));
  if (q == 0.0 || phi <= phi_floor) return 1.0;
  return 1.0 - 0.25 * tau * tau * q / (2.0 * phi);
}

// Per-step energy balance between consecutive accepted states.
inline EnergyLedger energy_audit(const State& prev, const State& next, const Discretization& d, const Material& m,
                                 const Loading& load, const IntegratorConfig& cfg) {
  const double tau = cfg.tau;
  const Field& w = d.stress_weights();
  EnergyLedger L;
  L.k = next.k;
  L.t = next.k * tau;
  L.kinetic = kinetic_pairing(d, next.v, prev.v);
  L.stored = m.phi(d, next.sigma, next.z);
  L.energy = L.kinetic + L.stored;
  const double e_prev = kinetic_pairing(d, prev.v, prev.v_prev) + m.phi(d, prev.sigma, prev.z);
  Field zdot = scaled(add(next.z, prev.z, -1.0), 1.0 / tau);
  L.dissipated_step = next.z.empty() ? 0.0 : tau * m.dissipation_rate(d, zdot);

  const Field e_new = m.dphi_dsigma(d, next.sigma, next.z);
  const Field e_old = m.dphi_dsigma(d, prev.sigma, prev.z);
  const Field e_mix = m.dphi_dsigma(d, next.sigma, prev.z);
  const Field D = load.rate(prev.k, tau, d.ns());
  const Field f_mean = scaled(add(load.force_half(prev.k, tau, d.nv()), load.force_half(prev.k - 1, tau, d.nv())), 0.5);
  double ext = tau * dot(f_mean, prev.v);
  ext += tau * 0.5 * (wdot(w, e_new, D) + wdot(w, e_old, D));
  ext -= 0.5 * wdot(w, add(e_new, e_mix, -1.0), add(next.sigma, prev.sigma, -1.0));
  L.external_work_step = ext;
  L.residual = (L.energy - e_prev) + L.dissipated_step - ext;
  const double scale = std::fmax(1.0, std::fabs(next.energy0));
  L.stability_coeff = stability_coefficient(d, d.apply_C_adjoint(e_new), L.stored, tau, 1e-14 * scale);
  L.flagged = L.residual > cfg.energy_tol * scale;
  return L;
}

struct StepOutcome {
  State state;
  EnergyLedger ledger;
};

// One step of the three-stage scheme in its fixed order: proto-stress, internal variable,
// velocity and displacement.
inline StepOutcome advance(const State& s_in, const Discretization& d, const Material& m, const Loading& load,
                           const IntegratorConfig& cfg) {
  const State s = s_in.started ? s_in : bootstrap(s_in, d, m, load, cfg);
  State n;
  n.sigma = step_sigma(s, d, load, cfg);
  n.z = step_internal(s, n.sigma, d, m, cfg);
  VelocityUpdate vu = step_velocity(s, n.sigma, n.z, d, m, load, cfg);
  n.v = std::move(vu.v);
  n.u = std::move(vu.u);
  n.v_prev = s.v;
  n.k = s.k + 1;
  n.started = true;
  n.energy0 = s.energy0;
  StepOutcome out{std::move(n), {}};
  out.ledger = energy_audit(s, out.state, d, m, load, cfg);
  if (cfg.enforce_energy_inequality && out.ledger.flagged)
    throw Error(ErrorKind::energy, "energy inequality violated at step " + std::to_string(out.state.k) +
                                       ": residual " + std::to_string(out.ledger.residual));
  return out;
}

} // namespace stagger
