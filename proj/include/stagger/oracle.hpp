// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "stagger/cfl.hpp"

namespace stagger {

// Exhaustive scan followed by golden-section refinement of a convex scalar function.
// Infinite values mark points outside the domain; an edge of the domain is a valid minimizer.
inline double brute_force_prox(const std::function<double(double)>& f, double lo, double hi, int points = 2001,
                               double tol = 1e-11) {
  for (int attempt = 0; attempt < 6; ++attempt) {
    int best = 0;
    double fbest = f(lo);
    const double dx = (hi - lo) / (points - 1);
    for (int i = 1; i < points; ++i) {
      const double v = f(lo + i * dx);
      if (v < fbest) {
        fbest = v;
        best = i;
      }
    }
    if (!std::isfinite(fbest)) throw Error(ErrorKind::solver, "brute-force scan: no finite value in the interval");
    const double xbest = lo + best * dx;
    const bool at_edge = best == 0 || best == points - 1;
    if (at_edge && std::isfinite(f(best == 0 ? lo - dx : hi + dx))) {
      const double w = hi - lo;
      lo -= w;
      hi += w;
      continue;
    }
    double a = xbest - dx, b = xbest + dx;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double xb = xbest, fb = fbest;
    auto eval = [&](double x) {
      const double v = f(x);
      if (v < fb) {
        fb = v;
        xb = x;
      }
      return v;
    };
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = eval(c), fe = eval(e);
    while (b - a > tol) {
      if (!std::isfinite(fc) && !std::isfinite(fe)) break;
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - g * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + g * (b - a);
        fe = eval(e);
      }
    }
    eval(0.5 * (a + b));
    return xb;
  }
  throw Error(ErrorKind::solver, "brute-force scan: minimizer stays at the interval edge");
}

// Objective whose minimizer is the internal-variable step: tau Psi((z - z_k)/tau) + 2 Phi(S, (z + z_k)/2).
inline std::function<double(const Field&)> incremental_objective(const Discretization& d, const Material& m,
                                                                 const Field& s_next, const Field& z_k, double tau) {
  return [&d, &m, s_next, z_k, tau](const Field& z) {
    const Field rate = scaled(add(z, z_k, -1.0), 1.0 / tau);
    const double psi = m.dissipation_potential(d, rate);
    if (!std::isfinite(psi)) return std::numeric_limits<double>::infinity();
    return tau * psi + 2.0 * m.phi(d, s_next, scaled(add(z, z_k), 0.5));
  };
}

// Brute-force minimizer of the incremental objective on the line z_star + t dir, as an offset t.
inline double prox_line_offset(const Discretization& d, const Material& m, const Field& s_next, const Field& z_k,
                               double tau, const Field& z_star, const Field& dir, double half_width = 1.0) {
  const auto J = incremental_objective(d, m, s_next, z_k, tau);
  const double j0 = J(z_star);
  return brute_force_prox([&](double t) { return J(add(z_star, dir, t)) - j0; }, -half_width, half_width);
}

// Monolithic Crank-Nicolson integrator of the undivided system with linear flow rules,
// assembled densely. The state carries the proto-stress at the velocity's time level.
class ImplicitReference {
public:
  static constexpr std::size_t max_unknowns = 500;

  ImplicitReference(const Discretization& d, const Material& m, const Loading& load, double tau)
      : d_(d), m_(m), load_(load), tau_(tau) {
    if (!m.linear_flow()) throw Error(ErrorKind::config, m.name() + ": implicit reference needs a linear flow rule");
    nv_ = d.nv();
    ns_ = d.ns();
    nz_ = m.z_size(d);
    const std::size_t n = nv_ + ns_ + nz_;
    if (n > max_unknowns) throw Error(ErrorKind::config, "implicit reference: at most 500 unknowns");
    const Eigen::VectorXd c = rhs(Eigen::VectorXd::Zero(n));
    Eigen::MatrixXd A(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(i) = 1.0;
      A.col(i) = rhs(e) - c;
    }
    c_ = c;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    explicit_part_ = I + 0.5 * tau * A;
    lu_ = (I - 0.5 * tau * A).partialPivLu();
  }

  // Advances (v, sigma, z) from time t to t + tau.
  void step(Field& v, Field& sigma, Field& z, double t) const {
    Eigen::VectorXd x = pack(v, sigma, z);
    Eigen::VectorXd b = explicit_part_ * x + tau_ * c_;
    const Field fm = scaled(add(load_.force(t, nv_), load_.force(t + tau_, nv_)), 0.5 * tau_);
    const Field dv = mass_solve(d_, fm);
    for (std::size_t i = 0; i < nv_; ++i) b(i) += dv[i];
    if (load_.offset) {
      const Field dg = add(load_.offset(t + tau_), load_.offset(t), -1.0);
      for (std::size_t j = 0; j < ns_; ++j) b(nv_ + j) += dg[j];
    }
    x = lu_.solve(b);
    unpack(x, v, sigma, z);
  }

private:
  const Discretization& d_;
  const Material& m_;
  const Loading& load_;
  double tau_;
  std::size_t nv_ = 0, ns_ = 0, nz_ = 0;
  Eigen::VectorXd c_;
  Eigen::MatrixXd explicit_part_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;

  Eigen::VectorXd pack(const Field& v, const Field& s, const Field& z) const {
    Eigen::VectorXd x(nv_ + ns_ + nz_);
    for (std::size_t i = 0; i < nv_; ++i) x(i) = v[i];
    for (std::size_t i = 0; i < ns_; ++i) x(nv_ + i) = s[i];
    for (std::size_t i = 0; i < nz_; ++i) x(nv_ + ns_ + i) = z[i];
    return x;
  }
  void unpack(const Eigen::VectorXd& x, Field& v, Field& s, Field& z) const {
    v.assign(nv_, 0.0);
    s.assign(ns_, 0.0);
    z.assign(nz_, 0.0);
    for (std::size_t i = 0; i < nv_; ++i) v[i] = x(i);
    for (std::size_t i = 0; i < ns_; ++i) s[i] = x(nv_ + i);
    for (std::size_t i = 0; i < nz_; ++i) z[i] = x(nv_ + ns_ + i);
  }
  Eigen::VectorXd rhs(const Eigen::VectorXd& x) const {
    Field v, s, z;
    unpack(x, v, s, z);
    const Field S = m_.true_stress(d_, s, z);
    const Field vdot = mass_solve(d_, scaled(d_.apply_E_adjoint(S), -1.0));
    const Field sdot = d_.apply_C(d_.apply_E(v));
    const Field zdot = nz_ ? m_.z_rate(d_, s, z) : Field{};
    return pack(vdot, sdot, zdot);
  }
};

// One Crank-Nicolson step from a synchronized state.
inline State implicit_reference_step(const Discretization& d, const Material& m, const Loading& load,
                                     const State& s, double tau) {
  ImplicitReference ref(d, m, load, tau);
  State n = s;
  ref.step(n.v, n.sigma, n.z, s.k * tau);
  n.k = s.k + 1;
  return n;
}

struct GradientReport {
  double sigma_defect = 0.0;
  double z_defect = 0.0;
};

// Central finite differences of phi against the analytic derivatives along random directions.
inline GradientReport gradient_check(const Discretization& d, const Material& m, int samples, unsigned seed,
                                     double z_center = 0.0, double z_spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto rnd = [&](std::size_t n, double c, double s) {
    Field f(n);
    for (double& x : f) x = c + s * nd(rng);
    return f;
  };
  const Field& w = d.stress_weights();
  const double steps[] = {1e-3, 1e-4, 1e-5, 1e-6};
  GradientReport rep;
  for (int k = 0; k < samples; ++k) {
    const Field s = rnd(d.ns(), 0.0, 1.0);
    const Field z = rnd(m.z_size(d), z_center, z_spread);
    const Field ds = rnd(d.ns(), 0.0, 1.0);
    const Field dz = rnd(m.z_size(d), 0.0, 1.0);
    const double an_s = wdot(w, m.dphi_dsigma(d, s, z), ds);
    double best = std::numeric_limits<double>::infinity();
    for (double h : steps) {
      const double fd = (m.phi(d, add(s, ds, h), z) - m.phi(d, add(s, ds, -h), z)) / (2.0 * h);
      best = std::fmin(best, std::fabs(fd - an_s) / std::fmax(std::fabs(an_s), 1e-300));
    }
    rep.sigma_defect = std::fmax(rep.sigma_defect, an_s == 0.0 ? 0.0 : best);
    if (m.z_size(d) == 0) continue;
    const double an_z = dot(m.dphi_dz(d, s, z), dz);
    best = std::numeric_limits<double>::infinity();
    for (double h : steps) {
      const double fd = (m.phi(d, s, add(z, dz, h)) - m.phi(d, s, add(z, dz, -h))) / (2.0 * h);
      best = std::fmin(best, std::fabs(fd - an_z) / std::fmax(std::fabs(an_z), 1e-300));
    }
    rep.z_defect = std::fmax(rep.z_defect, an_z == 0.0 ? 0.0 : best);
  }
  return rep;
}

struct ConvergenceReport {
  std::vector<double> resolutions;
  std::vector<double> errors;
  double order = 0.0;
  std::string reference = "oracle";
  std::vector<std::string> notes;

  std::string table() const {
    std::ostringstream os;
    os.precision(6);
    os << "reference: " << reference << "\n";
    os << "level  resolution      error           rate\n";
    for (std::size_t i = 0; i < errors.size(); ++i) {
      os << i << "      " << std::scientific << resolutions[i] << "  " << errors[i];
      if (i > 0) os << "  " << std::fixed << std::log(errors[i - 1] / errors[i]) / std::log(resolutions[i - 1] / resolutions[i]);
      os << std::scientific << "\n";
    }
    os << std::fixed << "fitted order: " << order << "\n";
    for (const auto& n : notes) os << "note: " << n << "\n";
    return os.str();
  }
};

// Least-squares slope of log(error) against log(resolution).
inline double fit_order(const std::vector<double>& res, const std::vector<double>& err) {
  const std::size_t n = res.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(res[i]);
    my += std::log(err[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(res[i]) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Mass-weighted discrete L2 distance on (v, Sigma).
inline double state_distance(const Discretization& d, const Field& v1, const Field& s1, const Field& v2,
                             const Field& s2) {
  const Field dv = add(v1, v2, -1.0), ds = add(s1, s2, -1.0);
  return std::sqrt(wdot(d.mass(), dv, dv) + wdot(d.stress_weights(), d.apply_C_inv(ds), ds));
}

// Runs the staggered scheme to t_end and returns the final state with the proto-stress
// moved to the velocity's level.
inline State run_explicit(const Discretization& d, const Material& m, const Loading& load, State s, double tau,
                          double t_end) {
  IntegratorConfig cfg;
  cfg.tau = tau;
  cfg.t_end = t_end;
  const long steps = std::lround(t_end / tau);
  for (long k = 0; k < steps; ++k) s = advance(s, d, m, load, cfg).state;
  s.sigma = synchronized_sigma(s, d, load, tau);
  return s;
}

// Self-convergence of the staggered scheme against the Crank-Nicolson oracle at matched time
// steps tau0, tau0/2, ...
inline ConvergenceReport oracle_convergence(const Discretization& d, const Material& m, const Loading& load,
                                            const State& initial, double tau0, double t_end, int levels) {
  ConvergenceReport rep;
  rep.reference = "oracle";
  const CflEstimate cfl = max_stable_timestep(d, m, m.cfl_probe(d), 0.0);
  for (int l = 0; l < levels; ++l) {
    const double tau = tau0 / std::pow(2.0, l);
    if (tau > cfl.tau_max) {
      rep.notes.push_back("level " + std::to_string(l) + " violates the time-step bound and is excluded");
      continue;
    }
    const State ex = run_explicit(d, m, load, initial, tau, t_end);
    State im = initial;
    if (im.z.empty()) im.z.assign(m.z_size(d), 0.0);
    ImplicitReference ref(d, m, load, tau);
    const long steps = std::lround(t_end / tau);
    for (long k = 0; k < steps; ++k) ref.step(im.v, im.sigma, im.z, k * tau);
    rep.resolutions.push_back(tau);
    rep.errors.push_back(state_distance(d, ex.v, ex.sigma, im.v, im.sigma));
  }
  if (rep.errors.size() >= 2) rep.order = fit_order(rep.resolutions, rep.errors);
  return rep;
}

// Standing wave u = sin(pi x) cos(pi c t) on the unit interval with fixed ends.
struct StandingWave {
  double K = 1.0;
  double rho = 1.0;
  double speed() const { return std::sqrt(K / rho); }
  double velocity(double x, double t) const {
    const double c = speed();
    return -M_PI * c * std::sin(M_PI * x) * std::sin(M_PI * c * t);
  }
  double stress(double x, double t) const { return K * M_PI * std::cos(M_PI * x) * std::cos(M_PI * speed() * t); }
};

// Joint refinement of cells and time step against the exact standing wave.
inline ConvergenceReport standing_wave_convergence(int n0, int levels, double courant = 0.5, double t_end = 1.0,
                                                   StandingWave w = {}) {
  ConvergenceReport rep;
  rep.reference = "exact standing wave";
  Elastic m;
  Loading load;
  for (int l = 0; l < levels; ++l) {
    const int n = n0 << l;
    const double h = 1.0 / n;
    Grid g{1, n, 1, h, {Boundary::dirichlet, Boundary::dirichlet, Boundary::neumann, Boundary::neumann}};
    const Discretization d = Discretization::build(g, Moduli{w.K, 0.0}, w.rho);
    const long steps = std::lround(std::ceil(t_end * w.speed() / (courant * h)));
    const double tau = t_end / steps;
    State s;
    s.u.assign(d.nv(), 0.0);
    s.v.assign(d.nv(), 0.0);
    s.sigma.resize(d.ns());
    for (std::size_t j = 0; j < d.ns(); ++j) s.sigma[j] = w.stress(d.stress_position(j)[0], 0.0);
    s = run_explicit(d, m, load, s, tau, steps * tau);
    Field ve(d.nv()), se(d.ns());
    for (std::size_t i = 0; i < d.nv(); ++i) ve[i] = w.velocity(d.velocity_position(i)[0], t_end);
    for (std::size_t j = 0; j < d.ns(); ++j) se[j] = w.stress(d.stress_position(j)[0], t_end);
    rep.resolutions.push_back(h);
    rep.errors.push_back(state_distance(d, s.v, s.sigma, ve, se));
  }
  if (rep.errors.size() >= 2) rep.order = fit_order(rep.resolutions, rep.errors);
  return rep;
}

} // namespace stagger
