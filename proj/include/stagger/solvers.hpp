// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "stagger/field.hpp"

namespace stagger {

using LinearOp = std::function<Field(const Field&)>;

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

struct SolveResult {
  Field x;
  int iterations = 0;
  double residual = 0.0;          // relative residual (or KKT residual)
  std::vector<double> history;    // residual per iteration
  Field multiplier;               // bound-constrained solves only
};

// Conjugate gradients for a Euclidean-symmetric positive definite operator.
inline SolveResult solve_linear_spd(const LinearOp& A, const Field& b, Field x0, SolveOptions opt = {}) {
  SolveResult res;
  Field x = x0.empty() ? Field(b.size(), 0.0) : std::move(x0);
  require_size(x, b.size(), "initial guess");
  const double bn = norm2(b);
  if (bn == 0.0) {
    res.x.assign(b.size(), 0.0);
    return res;
  }
  Field r = add(b, A(x), -1.0);
  Field p = r;
  double rr = dot(r, r);
  res.history.push_back(std::sqrt(rr) / bn);
  int it = 0;
  while (std::sqrt(rr) > opt.tol * bn) {
    if (it >= opt.max_iter)
      throw SolverError("conjugate gradients: iteration budget exceeded", x, std::sqrt(rr) / bn);
    const Field Ap = A(p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) throw SolverError("conjugate gradients: operator not positive definite", x, std::sqrt(rr) / bn);
    const double alpha = rr / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    const double rr_new = dot(r, r);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + (rr_new / rr) * p[i];
    rr = rr_new;
    ++it;
    res.history.push_back(std::sqrt(rr) / bn);
  }
  res.x = std::move(x);
  res.iterations = it;
  res.residual = std::sqrt(rr) / bn;
  return res;
}

// KKT residual of  min 1/2 x'Ax - b'x  s.t.  x <= u ; gradient g = Ax - b.
inline double kkt_residual(const Field& x, const Field& g, const Field& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (x[i] < u[i]) ? std::fabs(g[i]) : std::fmax(0.0, g[i]);
    m = std::fmax(m, r);
  }
  return m;
}

// Projected conjugate directions with active-set refresh for
//   min 1/2 x'Ax - b'x  subject to  x <= upper.
// Returns x and the multipliers lambda = -(Ax - b) on the active set.
inline SolveResult solve_bound_constrained(const LinearOp& A, const Field& b, const Field& upper, Field x0,
                                           SolveOptions opt = {}) {
  const std::size_t n = b.size();
  require_size(upper, n, "upper bound");
  SolveResult res;
  Field x = x0.empty() ? upper : std::move(x0);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::fmin(x[i], upper[i]);
  const double scale = std::fmax(1.0, norm_inf(b));
  Field g = add(A(x), b, -1.0);
  int it = 0;
  double kkt = kkt_residual(x, g, upper) / scale;
  res.history.push_back(kkt);
  while (kkt > opt.tol) {
    if (it >= opt.max_iter) throw SolverError("bound-constrained solve: iteration budget exceeded", x, kkt);
    // free set: interior points plus bound points whose gradient pushes inward
    std::vector<char> free(n);
    for (std::size_t i = 0; i < n; ++i) free[i] = (x[i] < upper[i]) || (g[i] > 0.0);
    Field r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (free[i]) r[i] = -g[i];
    Field p = r;
    double rr = dot(r, r);
    // conjugate directions on the current face until it converges or a bound is hit
    while (true) {
      ++it;
      Field Ap = A(p);
      for (std::size_t i = 0; i < n; ++i)
        if (!free[i]) Ap[i] = 0.0;
      const double pAp = dot(p, Ap);
      if (!(pAp > 0.0)) break;
      double alpha = rr / pAp;
      double alpha_max = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i)
        if (free[i] && p[i] > 0.0) alpha_max = std::fmin(alpha_max, (upper[i] - x[i]) / p[i]);
      if (alpha_max < alpha) {
        axpy(alpha_max, p, x);
        for (std::size_t i = 0; i < n; ++i)
          if (free[i] && p[i] > 0.0 && x[i] >= upper[i] - 1e-15 * std::fmax(1.0, std::fabs(upper[i])))
            x[i] = upper[i];
        for (std::size_t i = 0; i < n; ++i) x[i] = std::fmin(x[i], upper[i]);
        break;
      }
      axpy(alpha, p, x);
      axpy(-alpha, Ap, r);
      const double rr_new = dot(r, r);
      if (std::sqrt(rr_new) <= 0.1 * opt.tol * scale || it >= opt.max_iter) break;
      for (std::size_t i = 0; i < n; ++i) p[i] = free[i] ? r[i] + (rr_new / rr) * p[i] : 0.0;
      rr = rr_new;
    }
    g = add(A(x), b, -1.0);
    kkt = kkt_residual(x, g, upper) / scale;
    res.history.push_back(kkt);
  }
  res.x = x;
  res.iterations = it;
  res.residual = kkt;
  res.multiplier.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] >= upper[i]) res.multiplier[i] = std::fmax(0.0, -g[i]);
  return res;
}

// Newton iteration with backtracking for the C^1 piecewise quadratic problem
//   min 1/2 x'Ax - b'x + sum_i 1/2 c_i(x_i) x_i^2,  c_i = c_minus[i] for x_i <= 0 else c_plus[i].
inline SolveResult solve_piecewise_quadratic(const LinearOp& A, const Field& b, const Field& c_minus,
                                             const Field& c_plus, Field x0, SolveOptions opt = {}) {
  const std::size_t n = b.size();
  SolveResult res;
  Field x = x0.empty() ? Field(n, 0.0) : std::move(x0);
  auto coef = [&](std::size_t i, double xi) { return xi <= 0.0 ? c_minus[i] : c_plus[i]; };
  auto objective = [&](const Field& y) {
    const Field Ay = A(y);
    double f = 0.5 * dot(y, Ay) - dot(b, y);
    for (std::size_t i = 0; i < n; ++i) f += 0.5 * coef(i, y[i]) * y[i] * y[i];
    return f;
  };
  auto gradient = [&](const Field& y) {
    Field g = add(A(y), b, -1.0);
    for (std::size_t i = 0; i < n; ++i) g[i] += coef(i, y[i]) * y[i];
    return g;
  };
  const double scale = std::fmax(1.0, norm_inf(b));
  Field g = gradient(x);
  double gr = norm_inf(g) / scale;
  res.history.push_back(gr);
  int it = 0;
  while (gr > opt.tol) {
    if (it++ >= opt.max_iter) throw SolverError("piecewise quadratic solve: iteration budget exceeded", x, gr);
    Field c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = coef(i, x[i]);
    LinearOp H = [&](const Field& y) {
      Field r = A(y);
      for (std::size_t i = 0; i < n; ++i) r[i] += c[i] * y[i];
      return r;
    };
    const double inner = std::clamp(0.1 * opt.tol * scale / norm2(g), 1e-13, 0.1);
    const Field d = solve_linear_spd(H, scaled(g, -1.0), {}, {inner, 20 * static_cast<int>(n) + 100}).x;
    const double f0 = objective(x);
    const double slope = dot(g, d);
    double t = 1.0;
    Field xn;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x;
      axpy(t, d, xn);
      if (objective(xn) <= f0 + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    x = xn;
    g = gradient(x);
    gr = norm_inf(g) / scale;
    res.history.push_back(gr);
  }
  res.x = x;
  res.iterations = it;
  res.residual = gr;
  return res;
}

// Per-point solution of  factor*d + sigma_y * d/|d| = trial  (subdifferential at d=0).
inline double prox_radial_return(double trial, double sigma_y, double factor) {
  const double m = std::fabs(trial);
  if (m <= sigma_y) return 0.0;
  return (m - sigma_y) / factor * (trial > 0.0 ? 1.0 : -1.0);
}

// Scale applied to a trial tensor of norm `norm` by the same radial return.
inline double radial_return_scale(double norm, double sigma_y, double factor) {
  if (norm <= sigma_y) return 0.0;
  return (norm - sigma_y) / (factor * norm);
}

} // namespace stagger
