// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include <Eigen/Dense>

#include "stagger/integrator.hpp"

namespace stagger {

struct CflEstimate {
  double tau_max = 0.0;
  double lambda = 0.0; // sup <E*S, M^-1 E*S> / <Phi'' Sigma, Sigma>
  int iterations = 0;
};

// Linear part of Sigma -> dphi_dsigma(Sigma, z).
inline Field sigma_hessian(const Discretization& d, const Material& m, const Field& z, const Field& x) {
  return add(m.dphi_dsigma(d, x, z), m.dphi_dsigma(d, Field(d.ns(), 0.0), z), -1.0);
}

// Largest generalized eigenvalue of N x = lambda B x with B the Hessian of Phi and N the
// kinetic form of the induced force, by B-orthogonal Lanczos with full reorthogonalization.
// The Hessian is taken in the proto-stress at z_probe, or jointly in (Sigma, z) for materials
// whose internal variable can lower Phi at a fixed force.
inline CflEstimate max_stable_timestep(const Discretization& d, const Material& m, const Field& z_probe, double eta,
                                       double rel_tol = 1e-6, int max_iter = 2000) {
  if (!(eta >= 0.0 && eta < 4.0)) throw Error(ErrorKind::config, "integrator.eta: must lie in [0, 4)");
  const std::size_t ns = d.ns();
  const bool joint = m.cfl_joint();
  const std::size_t nz = joint ? m.z_size(d) : 0;
  const std::size_t n = ns + nz;
  const Field& w = d.stress_weights();
  // returns (B x, dphi_dsigma-linear part of x)
  auto apply_B = [&](const Field& x, Field* e) {
    const Field xs(x.begin(), x.begin() + ns);
    if (!joint) {
      *e = sigma_hessian(d, m, z_probe, xs);
      return hadamard(w, *e);
    }
    const Field xz(x.begin() + ns, x.end());
    const Field s0(ns, 0.0), z0(nz, 0.0);
    *e = add(m.dphi_dsigma(d, xs, xz), m.dphi_dsigma(d, s0, z0), -1.0);
    Field out = hadamard(w, *e);
    const Field gz = add(m.dphi_dz(d, xs, xz), m.dphi_dz(d, s0, z0), -1.0);
    out.insert(out.end(), gz.begin(), gz.end());
    return out;
  };
  auto K_of = [&](const Field& e) {
    const Field S = d.apply_C_adjoint(e);
    Field r = d.apply_C(d.apply_E(mass_solve(d, d.apply_E_adjoint(S))));
    r.resize(n, 0.0);
    return r;
  };
  auto bdot = [&](const Field& a, const Field& b) {
    Field e;
    return dot(apply_B(a, &e), b);
  };

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field q(n);
  for (double& x : q) x = uni(rng);
  double nq = std::sqrt(bdot(q, q));
  for (double& x : q) x /= nq;

  std::vector<Field> Q{q}, BQ, EQ;
  auto push_basis = [&](Field x) {
    Field e;
    BQ.push_back(apply_B(x, &e));
    EQ.push_back(std::move(e));
    Q.push_back(std::move(x));
  };
  Q.clear();
  push_basis(q);
  std::vector<double> alpha, beta;
  double theta = 0.0, theta_old = -1.0;
  CflEstimate est;
  const int mmax = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(max_iter)));
  for (int j = 0; j < mmax; ++j) {
    Field r = K_of(EQ[j]);
    const double a = dot(r, BQ[j]);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < Q.size(); ++i) axpy(-dot(r, BQ[i]), Q[i], r);
    const double b = std::sqrt(std::fmax(0.0, bdot(r, r)));

    const int m_ = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m_) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    theta = es.eigenvalues()(m_ - 1);
    const double resid = b * std::fabs(es.eigenvectors()(m_ - 1, m_ - 1));
    est.iterations = j + 1;
    const bool invariant = b <= 1e-14 * std::fmax(1.0, std::fabs(theta));
    if (theta > 0.0 && (invariant || (resid <= rel_tol * theta && std::fabs(theta - theta_old) <= rel_tol * theta)))
      break;
    theta_old = theta;
    if (j + 1 == mmax) {
      if (mmax < static_cast<int>(n))
        throw CflError("time-step bound: Lanczos iteration did not converge", theta);
      break;
    }
    beta.push_back(b);
    push_basis(scaled(r, 1.0 / b));
  }
  if (!(theta > 0.0)) throw CflError("time-step bound: eigenvalue estimate is not positive", theta);
  est.lambda = theta;
  est.tau_max = std::sqrt((4.0 - eta) / theta);
  return est;
}

} // namespace stagger
