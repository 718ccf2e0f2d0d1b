// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <ostream>
#include <string>

#include "stagger/cfl.hpp"
#include "stagger/config.hpp"
#include "stagger/oracle.hpp"
#include "stagger/output.hpp"

namespace stagger {

inline std::unique_ptr<Material> make_material(const MaterialSpec& s) {
  if (s.name == "elastic") return std::make_unique<Elastic>();
  if (s.name == "plastic_creep") return std::make_unique<PlasticCreep>(s.plastic);
  if (s.name == "biot") return std::make_unique<Biot>(s.biot);
  if (s.name == "damage") return std::make_unique<Damage>(s.damage);
  throw Error(ErrorKind::config, "material.name: unknown material '" + s.name + "'");
}

inline Discretization make_discretization(const SimConfig& c) {
  return Discretization::build(c.grid, c.material.moduli, c.material.rho);
}

inline Loading make_loading(const SimConfig& c, const Discretization& d) {
  Loading load;
  load.body_force.assign(d.nv(), 0.0);
  for (std::size_t i = 0; i < d.nv(); ++i)
    load.body_force[i] = c.loading.body_force[d.velocity_direction(i)] * d.mass()[i] / c.material.rho;
  if (!c.loading.traction.empty()) {
    const LoadingSpec spec = c.loading;
    const Field unit = d.traction_covector({1.0, 1.0, 1.0, 1.0});
    load.boundary_force = [spec, unit](double t) { return scaled(unit, spec.traction_at(t)); };
  }
  return load;
}

inline State initial_state(const SimConfig& c, const Discretization& d, const Material& m) {
  State s;
  s.u.assign(d.nv(), 0.0);
  s.v.assign(d.nv(), 0.0);
  s.sigma.assign(d.ns(), 0.0);
  const double lx = c.grid.nx * c.grid.h;
  const double ly = c.grid.ny * c.grid.h;
  const double a = c.initial.amplitude;
  for (std::size_t i = 0; i < d.nv(); ++i) {
    const auto [x, y] = d.velocity_position(i);
    double v = 0.0;
    switch (c.initial.velocity) {
    case InitialVelocity::zero:
      break;
    case InitialVelocity::sine:
      v = a * std::sin(M_PI * x / lx);
      if (c.grid.dim == 2) v *= std::sin(M_PI * y / ly) * (d.velocity_direction(i) == 0 ? 1.0 : -1.0);
      break;
    case InitialVelocity::pulse: {
      const double w = 0.1 * lx;
      double r2 = (x - 0.5 * lx) * (x - 0.5 * lx);
      if (c.grid.dim == 2) r2 += (y - 0.5 * ly) * (y - 0.5 * ly);
      v = a * std::exp(-r2 / (w * w));
      break;
    }
    }
    s.v[i] = v;
  }
  const double z0 = c.initial.internal.value_or(m.name() == "damage" ? 1.0 : 0.0);
  s.z.assign(m.z_size(d), z0);
  return s;
}

inline CflEstimate estimate_cfl(const Discretization& d, const Material& m, double eta) {
  return max_stable_timestep(d, m, m.cfl_probe(d), eta);
}

struct RunOptions {
  bool quiet = false;
  std::string out_dir; // overrides output.out_dir when set
};

struct RunSummary {
  int exit_code = 0;
  long steps = 0;
  double tau = 0.0;
  double tau_max = 0.0;
  double lambda = 0.0;
  double energy0 = 0.0;
  double energy_final = 0.0;
  double max_residual = -std::numeric_limits<double>::infinity();
  double min_a = std::numeric_limits<double>::infinity();
  double dissipated = 0.0;
  double external_work = 0.0;
  std::string message;
};

// Energy 1/2 |v|^2 + Phi above this multiple of its initial value plus the work supplied
// stops a run as unstable.
inline constexpr double instability_factor = 1e6;

inline RunSummary simulate(const SimConfig& c, const RunOptions& opt = {}) {
  RunSummary r;
  try {
    const Discretization d = make_discretization(c);
    const auto m = make_material(c.material);
    const Loading load = make_loading(c, d);
    const CflEstimate cfl = estimate_cfl(d, *m, c.integrator.eta);
    r.tau_max = cfl.tau_max;
    r.lambda = cfl.lambda;

    IntegratorConfig ic;
    ic.tau = c.integrator.tau.value_or(cfl.tau_max);
    ic.eta = c.integrator.eta;
    ic.t_end = c.integrator.t_end;
    ic.cfl_recheck_every = c.integrator.cfl_recheck_every;
    ic.enforce_energy_inequality = c.integrator.enforce_energy;
    ic.energy_tol = c.integrator.energy_tol;
    ic.cfl_override = c.integrator.cfl_override;
    ic.validate();
    r.tau = ic.tau;
    if (ic.tau > cfl.tau_max && !ic.cfl_override) {
      r.exit_code = static_cast<int>(ErrorKind::cfl);
      r.message = "time step " + detail::fmt(ic.tau) + " exceeds the stable bound " + detail::fmt(cfl.tau_max);
      return r;
    }

    const std::string dir = opt.out_dir.empty() ? c.output.out_dir : opt.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir + "': " + ec.message());
    EnergyLog log;
    if (!c.output.energy_log.empty()) log = EnergyLog((std::filesystem::path(dir) / c.output.energy_log).string());

    auto snapshot = [&](const State& s) {
      Snapshot snap;
      snap.dim = static_cast<std::uint32_t>(c.grid.dim);
      for (const auto& f : c.output.snapshot_fields) {
        if (f == "u") snap.fields.emplace_back("u", s.u);
        if (f == "v") snap.fields.emplace_back("v", s.v);
        if (f == "sigma") snap.fields.emplace_back("sigma", s.started ? synchronized_sigma(s, d, load, ic.tau) : s.sigma);
        if (f == "z") snap.fields.emplace_back("z", s.z);
      }
      char name[64];
      std::snprintf(name, sizeof name, "snap_%06ld.stgd", s.k);
      write_snapshot((std::filesystem::path(dir) / name).string(), snap);
    };

    State s = initial_state(c, d, *m);
    if (c.output.snapshot_every > 0) snapshot(s);
    s = bootstrap(s, d, *m, load, ic);
    r.energy0 = s.energy0;
    r.energy_final = s.energy0;
    const long steps = std::lround(std::ceil(ic.t_end / ic.tau - 1e-9));
    double budget = plain_energy(d, *m, s);
    for (long k = 0; k < steps; ++k) {
      StepOutcome out = advance(s, d, *m, load, ic);
      s = std::move(out.state);
      const EnergyLedger& L = out.ledger;
      r.steps = s.k;
      r.energy_final = L.energy;
      r.max_residual = std::fmax(r.max_residual, L.residual);
      r.min_a = std::fmin(r.min_a, L.stability_coeff);
      r.dissipated += L.dissipated_step;
      r.external_work += L.external_work_step;
      log.write(L);
      budget += std::fabs(L.external_work_step);
      const double plain = plain_energy(d, *m, s);
      if (!std::isfinite(plain) || (budget > 0.0 && plain > instability_factor * budget)) {
        r.exit_code = static_cast<int>(ErrorKind::cfl);
        r.message = "instability guard: energy " + detail::fmt(plain) + " at step " + std::to_string(s.k);
        return r;
      }
      if (c.output.snapshot_every > 0 && s.k % c.output.snapshot_every == 0) snapshot(s);
      if (ic.cfl_recheck_every > 0 && s.k % ic.cfl_recheck_every == 0 && !ic.cfl_override) {
        const CflEstimate now = max_stable_timestep(d, *m, s.z, ic.eta);
        if (ic.tau > now.tau_max) {
          r.exit_code = static_cast<int>(ErrorKind::cfl);
          r.message = "time step exceeds the stable bound " + detail::fmt(now.tau_max) + " at step " + std::to_string(s.k);
          return r;
        }
      }
    }
    r.message = "completed";
  } catch (const Error& e) {
    r.exit_code = e.exit_code();
    r.message = e.what();
  }
  return r;
}

inline std::string format_summary(const RunSummary& r) {
  std::ostringstream os;
  os << "status: " << r.message << " (exit " << r.exit_code << ")\n";
  os << "steps: " << r.steps << "\ntau: " << detail::fmt(r.tau) << "\ntau_max: " << detail::fmt(r.tau_max)
     << "\nlambda: " << detail::fmt(r.lambda) << "\nenergy_initial: " << detail::fmt(r.energy0)
     << "\nenergy_final: " << detail::fmt(r.energy_final) << "\ndissipated: " << detail::fmt(r.dissipated)
     << "\nexternal_work: " << detail::fmt(r.external_work) << "\n";
  if (r.steps > 0)
    os << "max_residual: " << detail::fmt(r.max_residual) << "\nmin_a_coeff: " << detail::fmt(r.min_a) << "\n";
  return os.str();
}

// Oracle comparison for small linear problems, otherwise differences to the finest level.
inline ConvergenceReport converge(const SimConfig& c, int levels) {
  if (levels < 2) throw Error(ErrorKind::config, "--levels: at least 2 levels are required");
  const Discretization d = make_discretization(c);
  const auto m = make_material(c.material);
  const Loading load = make_loading(c, d);
  const CflEstimate cfl = estimate_cfl(d, *m, c.integrator.eta);
  const double tau0 = c.integrator.tau.value_or(cfl.tau_max);
  const State s0 = initial_state(c, d, *m);
  const std::size_t unknowns = d.nv() + d.ns() + m->z_size(d);
  if (m->linear_flow() && unknowns <= ImplicitReference::max_unknowns)
    return oracle_convergence(d, *m, load, s0, tau0, c.integrator.t_end, levels);

  ConvergenceReport rep;
  rep.reference = "finest level";
  if (!m->linear_flow()) rep.notes.push_back("nonlinear flow rule: no implicit oracle");
  else rep.notes.push_back("problem too large for the dense oracle");
  std::vector<State> runs;
  std::vector<double> taus;
  for (int l = 0; l <= levels; ++l) {
    const double tau = tau0 / std::pow(2.0, l);
    if (tau > cfl.tau_max) {
      rep.notes.push_back("level " + std::to_string(l) + " violates the time-step bound and is excluded");
      continue;
    }
    runs.push_back(run_explicit(d, *m, load, s0, tau, c.integrator.t_end));
    taus.push_back(tau);
  }
  if (runs.size() < 3) throw Error(ErrorKind::cfl, "too few stable levels for a convergence study");
  const State& ref = runs.back();
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    rep.resolutions.push_back(taus[i]);
    rep.errors.push_back(state_distance(d, runs[i].v, runs[i].sigma, ref.v, ref.sigma));
  }
  rep.order = fit_order(rep.resolutions, rep.errors);
  return rep;
}

inline std::string convergence_rows(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "level,resolution,error\n";
  for (std::size_t i = 0; i < rep.errors.size(); ++i)
    os << i << "," << detail::fmt(rep.resolutions[i]) << "," << detail::fmt(rep.errors[i]) << "\n";
  return os.str();
}

} // namespace stagger
