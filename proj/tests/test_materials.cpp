// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace stagger;
using namespace testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::pair<std::string, std::shared_ptr<Material>>> dissipative() {
  return {
      {"maxwell", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.0, 0.0}, 0.0, 1.0})},
      {"zener", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.6, 0.4}, 0.0, 0.7})},
      {"viscoplastic", std::make_shared<PlasticCreep>(PlasticCreepParams{{0.3, 0.2}, 0.4, 0.2})},
      {"biot", std::make_shared<Biot>(BiotParams{1.2, 0.7, 0.3, 0.1, 0.02, 0.4})},
      {"damage", std::make_shared<Damage>(DamageParams{1.0, 0.2, 0.5, 0.7, 0.01, DamageMode::unidirectional})},
      {"healing", std::make_shared<Damage>(DamageParams{1.0, 0.2, 0.5, 0.7, 0.01, DamageMode::healing})},
  };
}

Field random_z(Random& rnd, const Discretization& d, const Material& m) {
  if (m.name() == "damage") return rnd.uniform(m.z_size(d), 0.2, 1.0);
  return rnd.normal(m.z_size(d), 0.0, 0.5);
}

} // namespace

TEST_CASE("plasticity derivatives and true stress") {
  const Discretization d = line(2, 0.5, D, D, 2.0);
  const PlasticCreep m(PlasticCreepParams{{0.0, 0.0}, 0.3, 1.0});
  const Field s(d.ns(), 4.0), z(d.ns(), 1.0);
  for (double e : m.dphi_dsigma(d, s, z)) CHECK_THAT(e, WithinAbs(1.0, 1e-15));
  for (double t : m.true_stress(d, s, z)) CHECK_THAT(t, WithinAbs(2.0, 1e-15));
}

TEST_CASE("undamaged limit with eps = eps0 leaves the stress unchanged") {
  const Discretization d = square(3);
  const Damage m(DamageParams{0.3, 0.3, 1.0, 1.0, 0.0, DamageMode::unidirectional});
  const Field s = Random(1).normal(d.ns());
  CHECK(norm_inf(add(m.true_stress(d, s, Field(d.npoints(), 0.0)), s, -1.0)) < 1e-12);
}

TEST_CASE("decoupled Biot: chemical potential is M times content") {
  const Discretization d = line(5, 0.2);
  const Biot m(BiotParams{2.5, 0.0, 0.0, 0.0, 0.0, 1.0});
  const Field s = Random(2).normal(d.ns()), z = Random(3).normal(d.npoints());
  const Field mu = m.chemical_potential(d, s, z);
  for (std::size_t p = 0; p < z.size(); ++p) CHECK_THAT(mu[p], WithinRel(2.5 * z[p], 1e-13));
}

TEST_CASE("Maxwell midpoint step") {
  const Discretization d = line(2, 0.5);
  const PlasticCreep m(PlasticCreepParams{{0.0, 0.0}, 0.0, 1.0});
  const Field z = m.internal_step(d, Field(d.ns(), 1.0), Field(d.ns(), 0.0), 0.5);
  for (double x : z) CHECK_THAT(x, WithinAbs(0.4, 1e-15));
  const Field s(d.ns(), 1.0), zk(d.ns(), 0.0);
  const Field dir(d.ns(), 1.0);
  CHECK_THAT(prox_line_offset(d, m, s, zk, 0.5, z, dir), WithinAbs(0.0, 1e-8));
}

TEST_CASE("below yield there is no flow") {
  const Discretization d = line(2, 0.5);
  const PlasticCreep m(PlasticCreepParams{{0.0, 0.0}, 0.5, 1.0});
  const Field zk(d.ns(), 0.0);
  const Field z = m.internal_step(d, Field(d.ns(), 0.3), zk, 0.5);
  CHECK(z == zk);
  CHECK_THAT(prox_line_offset(d, m, Field(d.ns(), 0.3), zk, 0.5, z, Field(d.ns(), 1.0)), WithinAbs(0.0, 1e-8));
}

TEST_CASE("Zener relaxes to the stationary plastic strain") {
  const Discretization d = line(2, 0.5);
  const PlasticCreep m(PlasticCreepParams{{1.0, 0.0}, 0.0, 1.0});
  Field z(d.ns(), 0.0);
  for (int k = 0; k < 400; ++k) z = m.internal_step(d, Field(d.ns(), 1.0), z, 0.1);
  for (double x : z) CHECK_THAT(x, WithinAbs(0.5, 1e-12));
}

TEST_CASE("viscoplastic dissipation rate") {
  const Discretization d = line(4, 0.25);
  const PlasticCreep m(PlasticCreepParams{{0.0, 0.0}, 0.5, 1.0});
  CHECK_THAT(m.dissipation_rate(d, Field(d.ns(), 2.0)), WithinRel(5.0, 1e-14));
  CHECK(m.dissipation_rate(d, Field(d.ns(), 0.0)) == 0.0);
  const PlasticCreep v(PlasticCreepParams{{0.0, 0.0}, 0.0, 1.0});
  const Field r = Random(4).normal(d.ns());
  CHECK_THAT(v.dissipation_rate(d, scaled(r, 2.0)), WithinRel(4.0 * v.dissipation_rate(d, r), 1e-13));
}

TEST_CASE("dissipation rates are nonnegative") {
  Random rnd(5);
  for (const auto& [name, m] : dissipative())
    for (const Discretization& d : {line(6, 0.2), square(3)})
      for (int k = 0; k < 10; ++k) {
        Field zdot = rnd.normal(m->z_size(d));
        if (name == "biot") zdot = without_mean(zdot, d.point_weights());
        if (name == "damage") for (double& x : zdot) x = -std::fabs(x);
        CHECK(m->dissipation_rate(d, zdot) >= 0.0);
      }
}

TEST_CASE("derivatives match finite differences for every material") {
  for (const Discretization& d : {line(6, 0.25, D, T), square(4, {D, T, N, D})}) {
    CHECK(gradient_check(d, Elastic{}, 10, 1).sigma_defect <= 1e-6);
    for (const auto& [name, m] : dissipative()) {
      const bool damage = name == "damage" || name == "healing";
      const GradientReport r = gradient_check(d, *m, 10, 2, damage ? 0.6 : 0.0, damage ? 0.3 : 1.0);
      INFO(name << " " << d.dim() << "D");
      CHECK(r.sigma_defect <= 1e-6);
      CHECK(r.z_defect <= 1e-6);
    }
  }
}

TEST_CASE("energies are quadratic in each argument") {
  Random rnd(6);
  for (const Discretization& d : {line(6, 0.2), square(3)})
    for (const auto& [name, m] : dissipative()) {
      const Field ds = rnd.normal(d.ns()), dz = rnd.normal(m->z_size(d));
      auto second_s = [&](const Field& s, const Field& z) {
        return m->phi(d, add(s, ds, 2.0), z) - 2.0 * m->phi(d, add(s, ds), z) + m->phi(d, s, z);
      };
      auto second_z = [&](const Field& s, const Field& z) {
        return m->phi(d, s, add(z, dz, 2.0)) - 2.0 * m->phi(d, s, add(z, dz)) + m->phi(d, s, z);
      };
      const Field s0 = rnd.normal(d.ns()), z0 = random_z(rnd, d, *m);
      const double a_s = second_s(s0, z0), a_z = second_z(s0, z0);
      for (int k = 0; k < 5; ++k) {
        const Field s = rnd.normal(d.ns());
        const Field z = random_z(rnd, d, *m);
        INFO(name);
        CHECK_THAT(second_s(s, z0), WithinRel(a_s, 1e-8));
        CHECK_THAT(second_z(s0, z), WithinRel(a_z, 1e-8));
      }
    }
}

TEST_CASE("internal steps satisfy the variational inequality") {
  Random rnd(7);
  for (const Discretization& d : {line(5, 0.2, D, N), square(3)})
    for (const auto& [name, m] : dissipative()) {
      const bool biot = name == "biot";
      const double tau = 0.05;
      const Field s = rnd.normal(d.ns(), 0.0, 2.0);
      const Field zk = random_z(rnd, d, *m);
      const Field z = m->internal_step(d, s, zk, tau);
      const Field rate = scaled(add(z, zk, -1.0), 1.0 / tau);
      const Field g = m->dphi_dz(d, s, scaled(add(z, zk), 0.5));
      const double psi = m->dissipation_potential(d, rate);
      REQUIRE(std::isfinite(psi));
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        Field w = add(rate, rnd.normal(rate.size()), rnd.uniform(0.0, 2.0));
        if (biot) w = without_mean(w, d.point_weights());
        if (name == "viscoplastic" && d.dim() == 2) w = d.dev(w);
        const double pw = m->dissipation_potential(d, w);
        if (!std::isfinite(pw)) continue;
        const double slack = pw - psi + dot(g, add(w, rate, -1.0));
        worst = std::min(worst, slack / std::max(1.0, std::fabs(pw)));
      }
      INFO(name << " " << d.dim() << "D");
      CHECK(worst >= -1e-9);
    }
}

TEST_CASE("Biot step conserves content and matches a dense solve") {
  const Discretization d = line(4, 0.25);
  const Biot m(BiotParams{1.2, 0.7, 0.3, 0.1, 0.02, 0.4});
  Random rnd(8);
  const Field s = rnd.normal(d.ns()), zk = rnd.normal(d.npoints());
  const double tau = 0.1;
  const Field z = m.internal_step(d, s, zk, tau);
  const Field& pw = d.point_weights();
  double before = 0.0, after = 0.0;
  for (std::size_t p = 0; p < z.size(); ++p) {
    before += pw[p] * zk[p];
    after += pw[p] * z[p];
  }
  CHECK_THAT(after, WithinAbs(before, 1e-12));

  // Residual of  pw (z - zk)/tau + mobility K mu((z + zk)/2) = 0, assembled column by column.
  const std::size_t n = d.npoints();
  auto residual = [&](const Field& x) {
    const Field mu = m.chemical_potential(d, s, scaled(add(x, zk), 0.5));
    Field r = hadamard(pw, scaled(add(x, zk, -1.0), 1.0 / tau));
    axpy(0.4, d.point_stiffness(mu), r);
    return r;
  };
  const Field r0 = residual(Field(n, 0.0));
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    Field e(n, 0.0);
    e[i] = 1.0;
    const Field c = add(residual(e), r0, -1.0);
    for (std::size_t j = 0; j < n; ++j) J(j, i) = c[j];
    b[i] = -r0[i];
  }
  const Eigen::VectorXd x = J.fullPivLu().solve(b);
  for (std::size_t i = 0; i < n; ++i) CHECK_THAT(z[i], WithinAbs(x[i], 1e-10));
}

TEST_CASE("Biot: equilibrium content is a fixed point") {
  const Discretization d = square(3);
  const Biot m(BiotParams{1.0, 0.0, 0.5, 0.3, 0.1, 1.0});
  const Field zk(d.npoints(), 0.3);
  const Field z = m.internal_step(d, Random(9).normal(d.ns()), zk, 0.1);
  CHECK(norm_inf(add(z, zk, -1.0)) < 1e-12);
}

TEST_CASE("unidirectional damage: healing drive is blocked by the constraint") {
  const Discretization d = line(6, 0.2);
  const Damage m(DamageParams{1.0, 0.2, 0.5, 0.7, 0.0, DamageMode::unidirectional});
  const Field zk(d.npoints(), 0.6);
  CHECK(m.internal_step(d, Field(d.ns(), 0.0), zk, 0.1) == zk);
}

TEST_CASE("pointwise damage step matches a golden-section scan") {
  Damage m(DamageParams{1.0, 0.2, 0.5, 0.7, 0.0, DamageMode::healing});
  const Discretization d = line(5, 0.2);
  Random rnd(10);
  for (int k = 0; k < 20; ++k) {
    const Field s = rnd.normal(d.ns(), 0.0, 2.0);
    const Field zk = rnd.uniform(d.npoints(), 0.1, 1.0);
    const Field z = m.internal_step(d, s, zk, 0.1);
    for (std::size_t p = 0; p < z.size(); ++p) {
      Field e(z.size(), 0.0);
      e[p] = 1.0;
      // golden-section resolution is about sqrt(machine epsilon)
      CHECK_THAT(prox_line_offset(d, m, s, zk, 0.1, z, e), WithinAbs(0.0, 1e-7));
    }
  }
}

TEST_CASE("damage difference quotient equals the midpoint derivative") {
  const Discretization d = square(3);
  const Damage m(DamageParams{1.0, 0.2, 0.5, 0.7, 0.01, DamageMode::unidirectional});
  Random rnd(11);
  const Field s = rnd.normal(d.ns()), a = rnd.uniform(d.npoints(), 0.0, 1.0), b = rnd.uniform(d.npoints(), 0.0, 1.0);
  const Field q = m.phi_quotient(d, s, a, b);
  const Field mid = m.dphi_dz(d, s, scaled(add(a, b), 0.5));
  CHECK(norm_inf(add(q, mid, -1.0)) <= 1e-12 * std::max(1.0, norm_inf(mid)));
}

TEST_CASE("plastic strain stays trace-free with a yield stress in 2D") {
  const Discretization d = square(4);
  const PlasticCreep m(PlasticCreepParams{{0.2, 0.2}, 0.3, 0.1});
  Random rnd(12);
  Field z(d.ns(), 0.0);
  for (int k = 0; k < 20; ++k) z = m.internal_step(d, rnd.normal(d.ns(), 0.0, 2.0), z, 0.05);
  CHECK(norm_inf(z) > 0.0);
  CHECK(norm_inf(d.point_trace(z)) < 1e-14);
}

TEST_CASE("material parameters are validated") {
  CHECK_THROWS_AS(Biot(BiotParams{0.0, 1.0, 0.0, 0.0, 0.0, 1.0}), Error);
  CHECK_THROWS_AS(Damage(DamageParams{1.0, 0.0, 1.0, 1.0, 0.0, DamageMode::unidirectional}), Error);
  CHECK_THROWS_AS(PlasticCreep(PlasticCreepParams{{0.0, 0.0}, -1.0, 1.0}), Error);
}
