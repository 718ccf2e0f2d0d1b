// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace stagger;
using namespace testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Largest eigenvalue of C E M^-1 E*, assembled densely.
double dense_lambda(const Discretization& d) {
  const std::size_t n = d.ns();
  Eigen::MatrixXd T(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Field e(n, 0.0);
    e[i] = 1.0;
    const Field c = d.apply_C(d.apply_E(mass_solve(d, d.apply_E_adjoint(e))));
    for (std::size_t j = 0; j < n; ++j) T(j, i) = c[j];
  }
  return T.eigenvalues().real().maxCoeff();
}

} // namespace

TEST_CASE("elastic bound in 1D approaches h sqrt(rho / C)") {
  const Discretization d = line(100, 0.1, D, D, 4.0);
  const CflEstimate e = max_stable_timestep(d, Elastic{}, {}, 0.0);
  CHECK_THAT(e.tau_max, WithinRel(0.05, 1e-3));
  CHECK_THAT(e.lambda, WithinRel(dense_lambda(d), 1e-6));
}

TEST_CASE("Lanczos estimate matches the dense spectrum in 2D") {
  for (auto sides : {std::array<Boundary, 4>{D, N, D, N}, std::array<Boundary, 4>{D, D, D, D},
                     std::array<Boundary, 4>{T, N, D, N}}) {
    const Discretization d = square(5, sides, 1.3, 0.7);
    CHECK_THAT(max_stable_timestep(d, Elastic{}, {}, 0.1).lambda, WithinRel(dense_lambda(d), 1e-6));
  }
}

TEST_CASE("stiffer moduli shrink the step") {
  const double t1 = max_stable_timestep(line(40, 0.05, D, D, 1.0), Elastic{}, {}, 0.1).tau_max;
  const double t4 = max_stable_timestep(line(40, 0.05, D, D, 4.0), Elastic{}, {}, 0.1).tau_max;
  CHECK_THAT(t4, WithinRel(0.5 * t1, 1e-6));
  const double eta0 = max_stable_timestep(line(40, 0.05), Elastic{}, {}, 0.0).tau_max;
  CHECK_THAT(t1, WithinRel(eta0 * std::sqrt(3.9 / 4.0), 1e-6));
}

TEST_CASE("strain gradient stiffening lowers the damage bound") {
  const Discretization d = line(32, 1.0 / 32);
  auto bound = [&](double eg) {
    const Damage m(DamageParams{1.0, 0.1, 0.05, 0.5, eg, DamageMode::unidirectional});
    return max_stable_timestep(d, m, m.cfl_probe(d), 0.1).tau_max;
  };
  const double plain = bound(0.0), grad = bound(0.01);
  CHECK(grad < plain);
  const double h = 1.0 / 32;
  CHECK_THAT(grad / plain, WithinRel(1.0 / std::sqrt(1.0 + 4.0 * 0.01 / (h * h)), 0.1));
}

TEST_CASE("invalid stability margin is rejected") {
  const Discretization d = line(4, 0.25);
  CHECK_THROWS_AS(max_stable_timestep(d, Elastic{}, {}, 4.0), Error);
  CHECK_THROWS_AS(max_stable_timestep(d, Elastic{}, {}, -0.1), Error);
}
