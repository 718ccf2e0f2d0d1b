// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "stagger/stagger.hpp"

namespace testing {

using stagger::Boundary;
using stagger::Discretization;
using stagger::Field;
using stagger::Grid;

inline constexpr Boundary D = Boundary::dirichlet;
inline constexpr Boundary N = Boundary::neumann;
inline constexpr Boundary T = Boundary::traction;

inline Discretization line(int n, double h, Boundary left = D, Boundary right = D, double K = 1.0, double rho = 1.0) {
  return Discretization::build(Grid{1, n, 1, h, {left, right, N, N}}, {K, 0.0}, rho);
}

inline Discretization square(int n, std::array<Boundary, 4> sides = {D, N, D, N}, double K = 1.0, double G = 1.0) {
  return Discretization::build(Grid{2, n, n, 1.0 / n, sides}, {K, G}, 1.0);
}

struct Random {
  std::mt19937_64 rng;
  explicit Random(unsigned long seed = 7) : rng(seed) {}
  Field normal(std::size_t n, double mean = 0.0, double spread = 1.0) {
    std::normal_distribution<double> nd(mean, spread);
    Field f(n);
    for (double& x : f) x = nd(rng);
    return f;
  }
  Field uniform(std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Field f(n);
    for (double& x : f) x = ud(rng);
    return f;
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

// Weighted-mean-free copy, for fields that must carry no net content.
inline Field without_mean(const Field& f, const Field& w) {
  double net = 0.0, total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    net += w[i] * f[i];
    total += w[i];
  }
  Field r = f;
  for (double& x : r) x -= net / total;
  return r;
}

} // namespace testing
