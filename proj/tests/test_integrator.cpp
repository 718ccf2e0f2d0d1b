// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace stagger;
using namespace testing;
using Catch::Matchers::WithinAbs;

namespace {

State started(const Discretization& d, const Material& m, Field v, Field sigma) {
  State s;
  s.u.assign(d.nv(), 0.0);
  s.v = std::move(v);
  s.v_prev = s.v;
  s.sigma = std::move(sigma);
  s.z.assign(m.z_size(d), 0.0);
  s.started = true;
  return s;
}

} // namespace

TEST_CASE("step_sigma: zero rate keeps the proto-stress") {
  const Discretization d = line(4, 0.25);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.1;
  const Field sigma = Random(1).normal(d.ns());
  const State s = started(d, m, Field(d.nv(), 0.0), sigma);
  CHECK(step_sigma(s, d, Loading{}, cfg) == sigma);
}

TEST_CASE("step_sigma: two-cell hand evaluation") {
  const Discretization d = line(2, 1.0);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.1;
  const State s = started(d, m, {1.0, 1.0}, Field(3, 0.0));
  const Field next = step_sigma(s, d, Loading{}, cfg);
  CHECK_THAT(next[0], WithinAbs(0.2, 1e-15));
  CHECK_THAT(next[1], WithinAbs(0.0, 1e-15));
  CHECK_THAT(next[2], WithinAbs(-0.2, 1e-15));
}

TEST_CASE("step_sigma rejects non-finite input") {
  const Discretization d = line(2, 1.0);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.1;
  const State s = started(d, m, {std::nan(""), 1.0}, Field(3, 0.0));
  CHECK_THROWS_AS(step_sigma(s, d, Loading{}, cfg), Error);
}

TEST_CASE("elastic true stress equals the proto-stress") {
  const Discretization d = square(3);
  Elastic m;
  const Field sigma = Random(2).normal(d.ns());
  CHECK(norm_inf(add(m.true_stress(d, sigma, {}), sigma, -1.0)) < 1e-12);
}

TEST_CASE("step_velocity: two-cell hand evaluation and force balance") {
  const Discretization d = line(2, 1.0);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.1;
  const State s = started(d, m, {0.0, 0.0}, Field(3, 0.0));
  const VelocityUpdate vu = step_velocity(s, {0.0, 1.0, 0.0}, {}, d, m, Loading{}, cfg);
  CHECK_THAT(vu.v[0], WithinAbs(0.1, 1e-15));
  CHECK_THAT(vu.v[1], WithinAbs(-0.1, 1e-15));
  CHECK(vu.S == Field{0.0, 1.0, 0.0});
  CHECK(norm_inf(add(vu.u, scaled(vu.v, cfg.tau), -1.0)) < 1e-16);

  Loading balanced;
  balanced.body_force = d.apply_E_adjoint({0.0, 1.0, 0.0});
  const VelocityUpdate still = step_velocity(s, {0.0, 1.0, 0.0}, {}, d, m, balanced, cfg);
  CHECK(norm_inf(still.v) < 1e-15);
}

TEST_CASE("null dynamics: a zero state only advances its counter") {
  const Discretization d = square(3);
  const PlasticCreep m(PlasticCreepParams{{0.5, 0.5}, 0.2, 1.0});
  IntegratorConfig cfg;
  cfg.tau = 0.01;
  State s;
  s = bootstrap(s, d, m, Loading{}, cfg);
  const StepOutcome o = advance(s, d, m, Loading{}, cfg);
  CHECK(o.state.k == 1);
  CHECK(norm_inf(o.state.v) == 0.0);
  CHECK(norm_inf(o.state.sigma) == 0.0);
  CHECK(norm_inf(o.state.z) == 0.0);
  CHECK(o.ledger.residual == 0.0);
}

TEST_CASE("elastic ledger is conserved and Maxwell dissipates") {
  const Discretization d = line(40, 0.025);
  Random rnd(4);
  SECTION("elastic") {
    Elastic m;
    IntegratorConfig cfg;
    cfg.tau = 0.9 * max_stable_timestep(d, m, {}, 0.1).tau_max;
    State s;
    s.v = rnd.normal(d.nv());
    s = bootstrap(s, d, m, Loading{}, cfg);
    for (int k = 0; k < 500; ++k) {
      const StepOutcome o = advance(s, d, m, Loading{}, cfg);
      CHECK(std::fabs(o.ledger.energy - s.energy0) <= 1e-12 * std::max(1.0, std::fabs(s.energy0)));
      CHECK(std::fabs(o.ledger.residual) <= 1e-12);
      s = o.state;
    }
  }
  SECTION("maxwell") {
    const PlasticCreep m(PlasticCreepParams{{0.0, 0.0}, 0.0, 1.0});
    IntegratorConfig cfg;
    cfg.tau = 0.9 * max_stable_timestep(d, m, m.cfl_probe(d), 0.1).tau_max;
    State s;
    s.v = rnd.normal(d.nv());
    s = bootstrap(s, d, m, Loading{}, cfg);
    for (int k = 0; k < 500; ++k) {
      const StepOutcome o = advance(s, d, m, Loading{}, cfg);
      CHECK(std::fabs(o.ledger.residual) <= 1e-9 * std::max(1.0, std::fabs(s.energy0)));
      CHECK(o.ledger.dissipated_step >= 0.0);
      s = o.state;
    }
  }
}

TEST_CASE("stability coefficient stays above a quarter of eta under the time-step bound") {
  // With the sharp bound tau_max = sqrt((4 - eta)/lambda) the guaranteed margin is eta/4.
  Random rnd(8);
  for (double eta : {0.1, 0.5, 2.0}) {
    const Discretization d = square(5);
    const Elastic m;
    const double tau = max_stable_timestep(d, m, {}, eta).tau_max;
    for (int k = 0; k < 50; ++k) {
      const Field sigma = rnd.normal(d.ns());
      const double a = stability_coefficient(d, m.true_stress(d, sigma, {}), m.phi(d, sigma, {}), tau);
      CHECK(a >= eta / 4.0 - 1e-12);
    }
  }
}

TEST_CASE("substep order: the internal variable sees the updated proto-stress") {
  const Discretization d = line(10, 0.1);
  const PlasticCreep m(PlasticCreepParams{{0.2, 0.2}, 0.3, 0.1});
  IntegratorConfig cfg;
  cfg.tau = 0.05;
  State s;
  s.v = Random(12).normal(d.nv(), 0.0, 3.0);
  s = bootstrap(s, d, m, Loading{}, cfg);
  const StepOutcome o = advance(s, d, m, Loading{}, cfg);
  const Field in_order = step_internal(s, step_sigma(s, d, Loading{}, cfg), d, m, cfg);
  const Field swapped = step_internal(s, s.sigma, d, m, cfg);
  CHECK(o.state.z == in_order);
  CHECK(norm_inf(add(swapped, in_order, -1.0)) > 1e-6);
}

TEST_CASE("bootstrap shifts the proto-stress half a step back") {
  const Discretization d = line(8, 0.125);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.05;
  State s;
  s.v = Random(6).normal(d.nv());
  s.sigma = Random(7).normal(d.ns());
  const State b = bootstrap(s, d, m, Loading{}, cfg);
  const Field expect = add(s.sigma, d.apply_C(d.apply_E(s.v)), -0.5 * cfg.tau);
  CHECK(norm_inf(add(b.sigma, expect, -1.0)) < 1e-14);
  CHECK(norm_inf(add(synchronized_sigma(b, d, Loading{}, cfg.tau), s.sigma, -1.0)) < 1e-14);
}

TEST_CASE("energy inequality enforcement raises on a violated ledger") {
  const Discretization d = line(8, 0.125);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.05;
  cfg.enforce_energy_inequality = true;
  // A negative tolerance flags every step, whatever the sign of the round-off residual.
  cfg.energy_tol = -1.0;
  State s;
  s.v = Random(6).normal(d.nv());
  CHECK_THROWS_AS(advance(s, d, m, Loading{}, cfg), Error);
}

TEST_CASE("traction loading enters the ledger as external work") {
  const Discretization d = line(20, 0.05, D, T);
  Elastic m;
  IntegratorConfig cfg;
  cfg.tau = 0.5 * max_stable_timestep(d, m, {}, 0.1).tau_max;
  Loading load;
  const Field unit = d.traction_covector({0.0, 1.0, 0.0, 0.0});
  load.boundary_force = [&](double t) { return scaled(unit, std::min(t, 0.2)); };
  State s;
  s = bootstrap(s, d, m, load, cfg);
  double work = 0.0;
  for (int k = 0; k < 400; ++k) {
    const StepOutcome o = advance(s, d, m, load, cfg);
    CHECK(std::fabs(o.ledger.residual) <= 1e-12);
    work += o.ledger.external_work_step;
    s = o.state;
  }
  CHECK(work > 0.0);
  CHECK_THAT(total_energy(d, m, s) - s.energy0, WithinAbs(work, 1e-10));
}
