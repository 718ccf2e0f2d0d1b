// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace stagger;
using namespace testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("brute-force minimizer on known functions") {
  CHECK_THAT(brute_force_prox([](double x) { return (x - 0.3) * (x - 0.3); }, -1.0, 1.0), WithinAbs(0.3, 1e-8));
  CHECK_THAT(brute_force_prox([](double x) { return std::fabs(x + 0.25) + 0.1 * x * x; }, -1.0, 1.0),
             WithinAbs(-0.25, 1e-8));
  // minimizer outside the starting interval
  CHECK_THAT(brute_force_prox([](double x) { return (x - 5.0) * (x - 5.0); }, -1.0, 1.0), WithinAbs(5.0, 1e-8));
}

TEST_CASE("brute-force minimizer on a restricted domain") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THAT(brute_force_prox([&](double x) { return x < 0.2 ? inf : x; }, -1.0, 1.0), WithinAbs(0.2, 1e-8));
  CHECK_THAT(brute_force_prox([&](double x) { return x > 0.0 ? inf : -x; }, -1.0, 1.0), WithinAbs(0.0, 1e-8));
  CHECK_THROWS_AS(brute_force_prox([&](double) { return inf; }, -1.0, 1.0), Error);
}

TEST_CASE("implicit reference agrees with the staggered scheme for elastic waves") {
  const Discretization d = line(8, 0.125);
  const Elastic m;
  State s;
  s.u.assign(d.nv(), 0.0);
  s.v = Random(1).normal(d.nv());
  s.sigma.assign(d.ns(), 0.0);
  const ConvergenceReport rep = oracle_convergence(d, m, {}, s, 0.05, 1.0, 4);
  REQUIRE(rep.errors.size() == 4);
  for (std::size_t i = 1; i < rep.errors.size(); ++i) CHECK(rep.errors[i] < rep.errors[i - 1]);
  CHECK(rep.order > 1.8);
}

TEST_CASE("implicit reference conserves elastic energy") {
  const Discretization d = square(4);
  const Elastic m;
  Field v = Random(2).normal(d.nv()), sigma = Random(3).normal(d.ns()), z;
  auto energy = [&] { return 0.5 * wdot(d.mass(), v, v) + elastic_energy(d, sigma); };
  const double e0 = energy();
  ImplicitReference ref(d, m, {}, 0.05);
  for (int k = 0; k < 50; ++k) ref.step(v, sigma, z, k * 0.05);
  CHECK_THAT(energy(), WithinRel(e0, 1e-11));
}

TEST_CASE("standing wave converges at second order") {
  const ConvergenceReport rep = standing_wave_convergence(8, 3, 0.5, 1.0);
  CHECK(rep.order >= 1.8);
  CHECK(rep.order <= 2.2);
}

TEST_CASE("gradient check is exact for the elastic energy") {
  const GradientReport r = gradient_check(square(3), Elastic{}, 5, 4);
  CHECK(r.sigma_defect <= 1e-8);
  CHECK(r.z_defect == 0.0);
}

TEST_CASE("fitted order ignores the error scale") {
  const std::vector<double> res{0.1, 0.05, 0.025};
  const std::vector<double> err{3e-2, 7.5e-3, 1.875e-3};
  CHECK_THAT(fit_order(res, err), WithinAbs(2.0, 1e-12));
  std::vector<double> big = err;
  for (double& e : big) e *= 1e6;
  CHECK_THAT(fit_order(res, big), WithinAbs(2.0, 1e-12));
}

TEST_CASE("levels above the time-step bound are excluded with a note") {
  const Discretization d = line(8, 0.125);
  State s;
  s.u.assign(d.nv(), 0.0);
  s.v = Random(5).normal(d.nv());
  s.sigma.assign(d.ns(), 0.0);
  const double tmax = max_stable_timestep(d, Elastic{}, {}, 0.0).tau_max;
  const ConvergenceReport rep = oracle_convergence(d, Elastic{}, {}, s, 1.5 * tmax, 1.0, 3);
  CHECK(rep.errors.size() == 2);
  REQUIRE(rep.notes.size() == 1);
  CHECK(rep.notes[0].find("level 0") != std::string::npos);
  CHECK(rep.table().find("note: level 0") != std::string::npos);
}
