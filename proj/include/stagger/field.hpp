// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagger {

using Field = std::vector<double>;

// Exit-code bearing error hierarchy shared by the library and the CLI.
enum class ErrorKind { config = 64, cfl = 2, solver = 3, energy = 4, io = 5, layout = 70 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

class SolverError : public Error {
public:
  SolverError(const std::string& what, Field last_iterate, double residual)
      : Error(ErrorKind::solver, what), last_iterate(std::move(last_iterate)), residual(residual) {}
  Field last_iterate;
  double residual;
};

class CflError : public Error {
public:
  CflError(const std::string& what, double quotient) : Error(ErrorKind::cfl, what), quotient(quotient) {}
  double quotient;
};

inline void require_size(const Field& f, std::size_t n, const char* what) {
  if (f.size() != n)
    throw Error(ErrorKind::layout, std::string("layout mismatch for ") + what + ": expected " +
                                       std::to_string(n) + ", got " + std::to_string(f.size()));
}

// All reductions run in index order so results are bit-reproducible.
inline double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double wdot(const Field& w, const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

inline double norm2(const Field& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Field& a) {
  double m = 0.0;
  for (double x : a) m = std::fmax(m, std::fabs(x));
  return m;
}

inline void axpy(double alpha, const Field& x, Field& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Field add(const Field& a, const Field& b, double beta = 1.0) {
  Field r(a);
  axpy(beta, b, r);
  return r;
}

inline Field scaled(const Field& a, double s) {
  Field r(a);
  for (double& x : r) x *= s;
  return r;
}

inline Field hadamard(const Field& a, const Field& b) {
  Field r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}

inline Field divided(const Field& a, const Field& b) {
  Field r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] / b[i];
  return r;
}

inline bool all_finite(const Field& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

} // namespace stagger
