// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <memory>
#include <string>

#include "stagger/grid.hpp"
#include "stagger/solvers.hpp"

namespace stagger {

// Stored energy Phi(Sigma, z), dissipation Psi and the implicit internal step.
//
// Conventions: dphi_dsigma is the strain-like field e with dPhi = <e, dSigma>_W, where
// W are the stress quadrature weights; dphi_dz is the plain covector dPhi/dz.
class Material {
public:
  virtual ~Material() = default;
  virtual std::string name() const = 0;
  virtual std::size_t z_size(const Discretization& d) const = 0;
  virtual double phi(const Discretization& d, const Field& s, const Field& z) const = 0;
  virtual Field dphi_dsigma(const Discretization& d, const Field& s, const Field& z) const = 0;
  virtual Field dphi_dz(const Discretization& d, const Field& s, const Field& z) const = 0;
  virtual Field internal_step(const Discretization& d, const Field& s_next, const Field& z_k, double tau) const = 0;
  virtual double dissipation_rate(const Discretization& d, const Field& zdot) const = 0;
  // Psi(zdot), the convex potential whose subdifferential is the flow rule.
  virtual double dissipation_potential(const Discretization& d, const Field& zdot) const = 0;
  // Worst-case internal state for the time-step bound.
  virtual Field cfl_probe(const Discretization& d) const { return Field(z_size(d), 0.0); }
  // Linear flow rules expose dz/dt = rate(Sigma, z) for the implicit reference integrator.
  // True when the time-step bound must range over the internal variable as well.
  virtual bool cfl_joint() const { return false; }
  virtual bool linear_flow() const { return false; }
  virtual Field z_rate(const Discretization&, const Field&, const Field&) const {
    throw Error(ErrorKind::config, name() + ": flow rule is not linear");
  }

  Field true_stress(const Discretization& d, const Field& s, const Field& z) const {
    return d.apply_C_adjoint(d.apply_I(dphi_dsigma(d, s, z)));
  }
};

inline double elastic_energy(const Discretization& d, const Field& s) {
  return 0.5 * wdot(d.stress_weights(), d.apply_C_inv(s), s);
}

class Elastic final : public Material {
public:
  std::string name() const override { return "elastic"; }
  std::size_t z_size(const Discretization&) const override { return 0; }
  double phi(const Discretization& d, const Field& s, const Field&) const override { return elastic_energy(d, s); }
  Field dphi_dsigma(const Discretization& d, const Field& s, const Field&) const override { return d.apply_C_inv(s); }
  Field dphi_dz(const Discretization&, const Field&, const Field&) const override { return {}; }
  Field internal_step(const Discretization&, const Field&, const Field& z_k, double) const override { return z_k; }
  double dissipation_rate(const Discretization&, const Field&) const override { return 0.0; }
  double dissipation_potential(const Discretization&, const Field&) const override { return 0.0; }
  bool linear_flow() const override { return true; }
  Field z_rate(const Discretization&, const Field&, const Field&) const override { return {}; }
};

struct PlasticCreepParams {
  Moduli hardening{0.0, 0.0}; // second moduli tensor; zero for Maxwell
  double sigma_y = 0.0;
  double viscosity = 1.0;
  bool operator==(const PlasticCreepParams&) const = default;
};

// Creep, Zener and viscoplastic models; the internal variable is the plastic strain on
// the stress layout. In 2D with a yield stress the plastic strain is kept trace-free.
class PlasticCreep final : public Material {
public:
  explicit PlasticCreep(PlasticCreepParams p) : p_(p) {
    if (p_.sigma_y < 0.0) throw Error(ErrorKind::config, "material.sigma_y: must be nonnegative");
    if (!(p_.viscosity > 0.0)) throw Error(ErrorKind::config, "material.viscosity: must be positive");
    if (p_.hardening.K < 0.0 || p_.hardening.G < 0.0)
      throw Error(ErrorKind::config, "material.K2: hardening moduli must be nonnegative");
  }
  const PlasticCreepParams& params() const { return p_; }

  std::string name() const override { return "plastic_creep"; }
  std::size_t z_size(const Discretization& d) const override { return d.ns(); }

  bool deviatoric_flow(const Discretization& d) const { return d.dim() == 2 && p_.sigma_y > 0.0; }
  double c_sph_total(const Discretization& d) const {
    return d.c_sph() + (d.dim() == 1 ? p_.hardening.K : d.dim() * p_.hardening.K);
  }
  double c_dev_total(const Discretization& d) const { return d.c_dev() + 2.0 * p_.hardening.G; }
  Field apply_C_total(const Discretization& d, const Field& x) const {
    return d.iso_apply(x, c_sph_total(d), c_dev_total(d));
  }

  double phi(const Discretization& d, const Field& s, const Field& z) const override {
    require_size(z, d.ns(), "plastic strain");
    const Field& w = d.stress_weights();
    const Field ci = d.apply_C_inv(s);
    const Field cz = apply_C_total(d, z);
    double e = 0.0;
    for (std::size_t j = 0; j < d.ns(); ++j) e += w[j] * (0.5 * ci[j] * s[j] - s[j] * z[j] + 0.5 * cz[j] * z[j]);
    return e;
  }
  Field dphi_dsigma(const Discretization& d, const Field& s, const Field& z) const override {
    return add(d.apply_C_inv(s), z, -1.0);
  }
  Field dphi_dz(const Discretization& d, const Field& s, const Field& z) const override {
    return hadamard(d.stress_weights(), add(apply_C_total(d, z), s, -1.0));
  }

  Field internal_step(const Discretization& d, const Field& s_next, const Field& z_k, double tau) const override {
    require_size(z_k, d.ns(), "plastic strain");
    const double visc = p_.viscosity / tau;
    Field q = add(s_next, apply_C_total(d, z_k), -1.0);
    Field z = z_k;
    if (p_.sigma_y == 0.0) {
      const Field dz = d.iso_apply(q, 1.0 / (visc + 0.5 * c_sph_total(d)),
                                   d.dim() == 1 ? 0.0 : 1.0 / (visc + 0.5 * c_dev_total(d)));
      axpy(1.0, dz, z);
      return z;
    }
    double factor = visc + 0.5 * c_sph_total(d);
    if (deviatoric_flow(d)) {
      q = d.dev(q);
      factor = visc + 0.5 * c_dev_total(d);
    }
    for (const auto& g : d.groups()) {
      const double s = radial_return_scale(std::sqrt(d.group_norm2(g, q)), p_.sigma_y, factor);
      for (int k = 0; k < g.size; ++k) z[g.dof[k]] += s * q[g.dof[k]];
    }
    return z;
  }

  double dissipation_rate(const Discretization& d, const Field& zdot) const override {
    double x = 0.0;
    for (const auto& g : d.groups()) {
      const double n2 = d.group_norm2(g, zdot);
      x += g.area * (p_.sigma_y * std::sqrt(n2) + p_.viscosity * n2);
    }
    return x;
  }
  double dissipation_potential(const Discretization& d, const Field& zdot) const override {
    double x = 0.0;
    for (const auto& g : d.groups()) {
      const double n2 = d.group_norm2(g, zdot);
      x += g.area * (p_.sigma_y * std::sqrt(n2) + 0.5 * p_.viscosity * n2);
    }
    return x;
  }

  bool linear_flow() const override { return p_.sigma_y == 0.0; }
  Field z_rate(const Discretization& d, const Field& s, const Field& z) const override {
    if (!linear_flow()) return Material::z_rate(d, s, z);
    return scaled(add(s, apply_C_total(d, z), -1.0), 1.0 / p_.viscosity);
  }

private:
  PlasticCreepParams p_;
};

struct BiotParams {
  double M = 1.0;
  double beta = 1.0;
  double L = 0.0;
  double zeta_eq = 0.0;
  double kappa = 0.0;
  double mobility = 1.0;
  double solver_tol = 1e-12;
  bool operator==(const BiotParams&) const = default;
};

// Poroelastic diffusant content on the scalar points; the flow rule is the implicit
// Cahn-Hilliard-type diffusion with no-flux boundaries.
class Biot final : public Material {
public:
  explicit Biot(BiotParams p) : p_(p) {
    if (!(p_.M > 0.0)) throw Error(ErrorKind::config, "material.M: must be positive");
    if (p_.beta < 0.0) throw Error(ErrorKind::config, "material.beta: must be nonnegative");
    if (p_.L < 0.0) throw Error(ErrorKind::config, "material.L: must be nonnegative");
    if (p_.kappa < 0.0) throw Error(ErrorKind::config, "material.kappa: must be nonnegative");
    if (!(p_.mobility > 0.0)) throw Error(ErrorKind::config, "material.mobility: must be positive");
  }
  const BiotParams& params() const { return p_; }

  std::string name() const override { return "biot"; }
  std::size_t z_size(const Discretization& d) const override { return d.npoints(); }

  // Volumetric strain tr(C^-1 sigma) per point.
  Field volumetric_strain(const Discretization& d, const Field& s) const { return d.point_trace(d.apply_C_inv(s)); }

  double phi(const Discretization& d, const Field& s, const Field& z) const override {
    require_size(z, d.npoints(), "content");
    const Field te = volumetric_strain(d, s);
    const Field& pw = d.point_weights();
    double e = elastic_energy(d, s);
    for (std::size_t p = 0; p < d.npoints(); ++p) {
      const double q = p_.beta * te[p] - z[p];
      const double r = z[p] - p_.zeta_eq;
      e += pw[p] * (0.5 * p_.M * q * q + 0.5 * p_.L * r * r);
    }
    return e + 0.5 * p_.kappa * d.point_gradient_form(z, z);
  }
  Field dphi_dsigma(const Discretization& d, const Field& s, const Field& z) const override {
    const Field te = volumetric_strain(d, s);
    Field c(d.npoints());
    for (std::size_t p = 0; p < c.size(); ++p) c[p] = p_.M * p_.beta * (p_.beta * te[p] - z[p]);
    return add(d.apply_C_inv(s), d.apply_C_inv(d.point_identity(c)));
  }
  Field dphi_dz(const Discretization& d, const Field& s, const Field& z) const override {
    const Field te = volumetric_strain(d, s);
    const Field& pw = d.point_weights();
    Field g = d.point_stiffness(z);
    for (std::size_t p = 0; p < g.size(); ++p)
      g[p] = p_.kappa * g[p] + pw[p] * (-p_.M * (p_.beta * te[p] - z[p]) + p_.L * (z[p] - p_.zeta_eq));
    return g;
  }
  // Chemical potential: the point density of dphi_dz.
  Field chemical_potential(const Discretization& d, const Field& s, const Field& z) const {
    return divided(dphi_dz(d, s, z), d.point_weights());
  }

  Field internal_step(const Discretization& d, const Field& s_next, const Field& z_k, double tau) const override {
    const Field& pw = d.point_weights();
    const Field mu_k = chemical_potential(d, s_next, z_k);
    const double tm = tau * p_.mobility;
    const Field rhs = scaled(d.point_stiffness(mu_k), -tm);
    LinearOp A = [&](const Field& x) {
      const Field kx = d.point_stiffness(x);
      const Field kkx = d.point_stiffness(divided(kx, pw));
      Field r(x.size());
      for (std::size_t p = 0; p < x.size(); ++p)
        r[p] = pw[p] * x[p] + 0.5 * tm * ((p_.M + p_.L) * kx[p] + p_.kappa * kkx[p]);
      return r;
    };
    Field dz = solve_linear_spd(A, rhs, {}, {p_.solver_tol, 20000}).x;
    // The exact increment carries no net content; remove the solver residual's share.
    double net = 0.0, total = 0.0;
    for (std::size_t p = 0; p < dz.size(); ++p) {
      net += pw[p] * dz[p];
      total += pw[p];
    }
    for (double& x : dz) x -= net / total;
    return add(z_k, dz);
  }

  // Xi = <M grad mu, grad mu> for the potential mu realizing zdot = div(M grad mu).
  double dissipation_rate(const Discretization& d, const Field& zdot) const override {
    Field rhs = scaled(hadamard(d.point_weights(), zdot), -1.0 / p_.mobility);
    double mean = 0.0;
    for (double x : rhs) mean += x;
    mean /= static_cast<double>(rhs.size());
    for (double& x : rhs) x -= mean;
    if (norm_inf(rhs) == 0.0) return 0.0;
    LinearOp K = [&](const Field& x) { return d.point_stiffness(x); };
    const Field mu = solve_linear_spd(K, rhs, {}, {1e-13, 20000}).x;
    return p_.mobility * d.point_gradient_form(mu, mu);
  }
  // Infinite off the mass-conserving subspace.
  double dissipation_potential(const Discretization& d, const Field& zdot) const override {
    const Field& pw = d.point_weights();
    double net = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < zdot.size(); ++p) {
      net += pw[p] * zdot[p];
      scale += pw[p] * std::fabs(zdot[p]);
    }
    if (std::fabs(net) > 1e-12 * scale) return std::numeric_limits<double>::infinity();
    return 0.5 * dissipation_rate(d, zdot);
  }

  bool cfl_joint() const override { return true; }
  bool linear_flow() const override { return true; }
  Field z_rate(const Discretization& d, const Field& s, const Field& z) const override {
    const Field mu = chemical_potential(d, s, z);
    return scaled(divided(d.point_stiffness(mu), d.point_weights()), -p_.mobility);
  }

private:
  BiotParams p_;
};

enum class DamageMode { unidirectional, healing };

struct DamageParams {
  double eps0 = 1.0;     // reference length in the residual stiffness
  double eps = 1.0;      // phase-field width
  double gc = 1.0;       // fracture energy
  double eps1 = 1.0;     // viscosity of the damage rate
  double eps_grad = 0.0; // strain-gradient coefficient
  DamageMode mode = DamageMode::unidirectional;
  double solver_tol = 1e-12;
  bool operator==(const DamageParams&) const = default;
};

// Phase-field damage with the Ambrosio-Tortorelli coefficients; alpha = 1 is intact.
class Damage final : public Material {
public:
  explicit Damage(DamageParams p) : p_(p) {
    if (!(p_.eps0 > 0.0)) throw Error(ErrorKind::config, "material.eps0: must be positive");
    if (!(p_.eps > 0.0)) throw Error(ErrorKind::config, "material.eps: must be positive");
    if (!(p_.gc > 0.0)) throw Error(ErrorKind::config, "material.gc: must be positive");
    if (!(p_.eps1 > 0.0)) throw Error(ErrorKind::config, "material.eps1: must be positive");
    if (p_.eps_grad < 0.0) throw Error(ErrorKind::config, "material.eps_grad: must be nonnegative");
  }
  const DamageParams& params() const { return p_; }

  std::string name() const override { return "damage"; }
  std::size_t z_size(const Discretization& d) const override { return d.npoints(); }

  double kappa() const { return p_.eps * p_.gc; }
  double gamma(double a) const { return p_.eps * p_.eps / (p_.eps0 * p_.eps0) + a * a; }
  double dgamma(double a) const { return 2.0 * a; }
  double phi_d(double a) const { return p_.gc * (1.0 - a) * (1.0 - a) / p_.eps; }
  double dphi_d(double a) const { return -2.0 * p_.gc * (1.0 - a) / p_.eps; }

  // Group-averaged stiffness factor.
  Field group_gamma(const Discretization& d, const Field& z) const {
    Field gg(d.groups().size());
    for (std::size_t g = 0; g < gg.size(); ++g) {
      const auto& cells = d.groups()[g].cells;
      double s = 0.0;
      for (int c : cells) s += gamma(z[c]);
      gg[g] = s / static_cast<double>(cells.size());
    }
    return gg;
  }
  // Weighted complementary energy density C^-1 sigma : sigma per group.
  Field group_energy(const Discretization& d, const Field& s) const {
    const Field ci = d.apply_C_inv(s);
    const Field& w = d.stress_weights();
    Field e(d.groups().size(), 0.0);
    for (std::size_t g = 0; g < e.size(); ++g)
      for (int k = 0; k < d.groups()[g].size; ++k) {
        const int j = d.groups()[g].dof[k];
        e[g] += w[j] * ci[j] * s[j];
      }
    return e;
  }

  double phi(const Discretization& d, const Field& s, const Field& z) const override {
    require_size(z, d.npoints(), "damage");
    const Field gg = group_gamma(d, z);
    const Field ge = group_energy(d, s);
    double e = 0.0;
    for (std::size_t g = 0; g < gg.size(); ++g) e += 0.5 * gg[g] * ge[g];
    if (p_.eps_grad > 0.0) e -= 0.5 * p_.eps_grad * wdot(d.stress_weights(), d.laplacian_stress(d.apply_C_inv(s)), s);
    const Field& pw = d.point_weights();
    for (std::size_t p = 0; p < z.size(); ++p) e += pw[p] * phi_d(z[p]);
    return e + 0.5 * kappa() * d.point_gradient_form(z, z);
  }
  Field dphi_dsigma(const Discretization& d, const Field& s, const Field& z) const override {
    const Field gg = group_gamma(d, z);
    Field e = d.apply_C_inv(s);
    const Field lap = p_.eps_grad > 0.0 ? d.laplacian_stress(e) : Field(d.ns(), 0.0);
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = gg[d.group_of()[j]] * e[j] - p_.eps_grad * lap[j];
    return e;
  }
  Field dphi_dz(const Discretization& d, const Field& s, const Field& z) const override {
    return quotient_impl(d, s, z, z, true);
  }
  // Difference quotient of Phi in z between two states; coincides with the midpoint
  // derivative for the quadratic coefficients used here.
  Field phi_quotient(const Discretization& d, const Field& s, const Field& a, const Field& b) const {
    return quotient_impl(d, s, a, b, false);
  }

  Field internal_step(const Discretization& d, const Field& s_next, const Field& z_k, double tau) const override {
    const std::size_t n = d.npoints();
    const Field& pw = d.point_weights();
    const Field zero(n, 0.0);
    const Field g0 = dphi_dz(d, s_next, zero);
    LinearOp half_q = [&](const Field& x) { return scaled(add(dphi_dz(d, s_next, x), g0, -1.0), 0.5); };
    const Field b = scaled(dphi_dz(d, s_next, z_k), -1.0);
    Field c_minus(n), c_plus(n);
    for (std::size_t p = 0; p < n; ++p) {
      c_minus[p] = 2.0 * pw[p] * p_.eps1 / tau;
      c_plus[p] = 2.0 * pw[p] / (p_.eps1 * tau);
    }
    Field dz;
    if (p_.mode == DamageMode::unidirectional) {
      LinearOp A = [&](const Field& x) {
        Field r = half_q(x);
        for (std::size_t p = 0; p < n; ++p) r[p] += c_minus[p] * x[p];
        return r;
      };
      dz = solve_bound_constrained(A, b, zero, zero, {p_.solver_tol, 20000}).x;
    } else {
      dz = solve_piecewise_quadratic(half_q, b, c_minus, c_plus, zero, {p_.solver_tol, 200}).x;
    }
    return add(z_k, dz);
  }

  double dissipation_rate(const Discretization& d, const Field& zdot) const override {
    const Field& pw = d.point_weights();
    double x = 0.0;
    for (std::size_t p = 0; p < zdot.size(); ++p) {
      const double r = zdot[p];
      if (r <= 0.0)
        x += pw[p] * 2.0 * p_.eps1 * r * r;
      else if (p_.mode == DamageMode::healing)
        x += pw[p] * 2.0 * r * r / p_.eps1;
      else
        return std::numeric_limits<double>::infinity();
    }
    return x;
  }
  double dissipation_potential(const Discretization& d, const Field& zdot) const override {
    return 0.5 * dissipation_rate(d, zdot);
  }

  Field cfl_probe(const Discretization& d) const override { return Field(d.npoints(), 1.0); }

private:
  DamageParams p_;

  Field quotient_impl(const Discretization& d, const Field& s, const Field& a, const Field& b, bool tangent) const {
    require_size(a, d.npoints(), "damage");
    const std::size_t n = d.npoints();
    const Field ge = group_energy(d, s);
    Field qg(n), qp(n), mid(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double da = a[p] - b[p];
      const bool same = tangent || da == 0.0;
      qg[p] = same ? dgamma(a[p]) : (gamma(a[p]) - gamma(b[p])) / da;
      qp[p] = same ? dphi_d(a[p]) : (phi_d(a[p]) - phi_d(b[p])) / da;
      mid[p] = 0.5 * (a[p] + b[p]);
    }
    Field g = scaled(d.point_stiffness(mid), kappa());
    const Field& pw = d.point_weights();
    for (std::size_t p = 0; p < n; ++p) g[p] += pw[p] * qp[p];
    for (std::size_t k = 0; k < ge.size(); ++k) {
      const auto& cells = d.groups()[k].cells;
      const double share = 0.5 * ge[k] / static_cast<double>(cells.size());
      for (int c : cells) g[c] += share * qg[c];
    }
    return g;
  }
};

} // namespace stagger
