#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "yamabe/functional.hpp"

using namespace yamabe;

namespace {
constexpr double kPi = M_PI;
constexpr double kVolS3 = 19.739208802178717238;  // 2 pi^2
// 6 (2 pi^2)^{2/3}, the Y_{1,0} value of the round 3-sphere.
constexpr double kYSphere3 = 43.823232716250654989;

Field random_field(const Mesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.05, 2.0);
  Field u{std::vector<double>(mesh.dofs())};
  for (auto& x : u.v) x = d(rng);
  return u;
}
}  // namespace

TEST_CASE("constant field on the round sphere reproduces the closed-form energy") {
  auto m = models::round_sphere(3);
  Mesh mesh(m, 256);
  const double p = exponent_p(3);
  Field u = Field::constant(mesh, std::pow(kVolS3, -1.0 / p));
  CHECK(constraint(mesh, u, 1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  auto e = energy(mesh, u);
  CHECK(e.gradient_term == doctest::Approx(0.0));
  CHECK(e.boundary_term == doctest::Approx(0.0));
  CHECK(e.total == doctest::Approx(kYSphere3).epsilon(1e-12));
}

TEST_CASE("zero field has zero energy and masses") {
  auto m = models::hemisphere(3);
  Mesh mesh(m, 64);
  Field u = Field::constant(mesh, 0.0);
  auto e = energy(mesh, u);
  CHECK(e.total == 0.0);
  CHECK(e.interior_mass == 0.0);
  CHECK(e.boundary_mass == 0.0);
}

TEST_CASE("hemisphere boundary term vanishes for any field") {
  auto m = models::hemisphere(3);
  Mesh mesh(m, 64);
  Field u = random_field(mesh, 7);
  auto e = energy(mesh, u);
  CHECK(std::abs(e.boundary_term) <= 1e-12 * std::abs(e.total));
  CHECK(e.boundary_mass > 0);  // the equator still carries q-mass
}

TEST_CASE("energy is a quadratic form and masses are homogeneous") {
  auto m = models::glued_neck(models::sphere_minus_cap(3, kPi / 2),
                              models::sphere_minus_cap(3, kPi / 2), 3.0);
  Mesh mesh(m, 32);
  Field u = random_field(mesh, 11);
  auto e1 = energy(mesh, u);
  const double p = exponent_p(3), q = exponent_q(3);
  for (double c : {0.25, 1.7, 3.0}) {
    Field cu = u;
    for (auto& x : cu.v) x *= c;
    auto ec = energy(mesh, cu);
    CHECK(ec.total == doctest::Approx(c * c * e1.total).epsilon(1e-12));
    CHECK(ec.interior_mass ==
          doctest::Approx(std::pow(c, p) * e1.interior_mass).epsilon(1e-12));
    CHECK(ec.boundary_mass ==
          doctest::Approx(std::pow(c, q) * e1.boundary_mass).epsilon(1e-12));
  }
}

TEST_CASE("normalize hits the constraint exactly") {
  auto m = models::hemisphere(3);
  Mesh mesh(m, 64);
  Field u = random_field(mesh, 3);

  SUBCASE("closed forms at pure weights") {
    auto e = energy(mesh, u);
    const double p = exponent_p(3), q = exponent_q(3);
    CHECK(normalization_constant(mesh, u, 1, 0) ==
          doctest::Approx(std::pow(e.interior_mass, -1.0 / p)).epsilon(1e-13));
    CHECK(normalization_constant(mesh, u, 0, 1) ==
          doctest::Approx(std::pow(e.boundary_mass, -1.0 / q)).epsilon(1e-13));
  }
  SUBCASE("mixed weights solve the scalar root to 1e-12") {
    for (double lam : {0.1, 0.5, 0.93}) {
      Field nu = normalize(mesh, u, lam, 1 - lam);
      CHECK(constraint(mesh, nu, lam, 1 - lam) == doctest::Approx(1.0).epsilon(1e-11));
    }
  }
  SUBCASE("an already-normalized field gets scale 1") {
    Field nu = normalize(mesh, u, 0.5, 0.5);
    CHECK(normalization_constant(mesh, nu, 0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-11));
  }
  SUBCASE("zero field is rejected") {
    Field z = Field::constant(mesh, 0.0);
    CHECK_THROWS_AS(normalize(mesh, z, 1, 0), ConstraintUnreachable);
  }
}

TEST_CASE("constraint weight preconditions") {
  auto closed = models::round_sphere(3);
  Mesh mesh(closed, 32);
  Field u = Field::constant(mesh, 1.0);
  CHECK_THROWS_AS(constraint(mesh, u, 0, 0), std::invalid_argument);
  // a = 0 on a closed model: the lambda = 0 degeneracy is a hard error.
  CHECK_THROWS_AS(constraint(mesh, u, 0, 1), ConstraintUnreachable);
  // With boundary present it is fine.
  Mesh hm(models::hemisphere(3), 32);
  Field v = Field::constant(hm, 1.0);
  CHECK(constraint(hm, v, 0, 1) > 0);
}

TEST_CASE("Hoelder mass bound") {
  auto s3 = models::round_sphere(3);
  // lambda = 1: Vol^{2/3} = (2 pi^2)^{2/3}.
  CHECK(holder_mass_bound(s3, 1.0) == doctest::Approx(7.3038721193751092).epsilon(1e-12));
  CHECK(holder_mass_bound(s3, 0.5) ==
        doctest::Approx(std::pow(2.0, 1.0 / 3) * std::pow(kVolS3, 2.0 / 3)).epsilon(1e-12));
  CHECK_THROWS_AS(holder_mass_bound(s3, 0.0), std::invalid_argument);

  // Normalized fields respect the bound on the quadrature.
  Mesh mesh(s3, 128);
  for (std::uint64_t s : {1u, 2u, 3u}) {
    Field u = normalize(mesh, random_field(mesh, s), 0.5, 0.5);
    CHECK(l2_mass(mesh, u) <= holder_mass_bound(s3, 0.5) * (1 + 1e-9));
  }
}

TEST_CASE("reflection energy identity: hemisphere doubles to the sphere") {
  // Mirror the hemisphere grid onto [pi/2, pi] by hand and compare.
  auto hemi = models::hemisphere(3);
  Mesh hm(hemi, 129);
  Field u = random_field(hm, 21);

  auto sphere = models::round_sphere(3);
  std::vector<double> nodes;
  for (double t : hm.node_t()) nodes.push_back(t);
  for (int i = hm.dofs() - 2; i >= 0; --i) nodes.push_back(kPi - hm.node_t()[i]);
  Mesh sm(sphere, std::vector<std::vector<double>>{nodes});
  Field v{std::vector<double>(sm.dofs())};
  for (int i = 0; i < hm.dofs(); ++i) v[i] = u[i];
  for (int i = 0; i < hm.dofs() - 1; ++i) v[hm.dofs() + i] = u[hm.dofs() - 2 - i];

  auto eh = energy(hm, u);
  auto es = energy(sm, v);
  CHECK(eh.total == doctest::Approx(es.total / 2).epsilon(1e-10));
  CHECK(es.interior_mass == doctest::Approx(2 * eh.interior_mass).epsilon(1e-10));
}

TEST_CASE("conformal covariance of energy and masses") {
  // g -> phi^2 g with u -> phi^{-(n-2)/2} u leaves E and the masses
  // invariant; this exercises measures, curvature, and gradient terms
  // together through the spline warp path.
  auto s3 = models::round_sphere(3);
  const double lo = 0.8, hi = 2.3;
  auto phi = [&](double t) {
    if (t <= lo || t >= hi) return 1.0;
    const double x = (t - lo) / (hi - lo);
    return 1.0 + 0.25 * std::exp(1.0 - 1.0 / (4.0 * x * (1.0 - x)));
  };
  auto rep = conformal_rescale(s3, phi, lo, hi, 257);

  Mesh mesh0(s3, 400);
  Mesh mesh1(rep, {130, 170, 130});

  // Smooth test function of the original coordinate.
  auto f = [](double t) { return 1.0 + 0.5 * std::cos(t); };
  Field u0{std::vector<double>(mesh0.dofs())};
  for (int i = 0; i < mesh0.dofs(); ++i) u0[i] = f(mesh0.node_t()[i]);

  // Invert tau(t) numerically to express the transformed field.
  auto tau_of = [&](double t) {
    const int N = 4000;
    if (t <= lo) return t;
    double acc = lo;
    const double hi2 = std::min(t, hi);
    for (int i = 0; i < N; ++i) {
      const double a = lo + (hi2 - lo) * i / N, b = lo + (hi2 - lo) * (i + 1) / N;
      acc += 0.5 * (phi(a) + phi(b)) * (b - a);
    }
    if (t > hi) acc += t - hi;
    return acc;
  };
  auto t_of_tau = [&](double tau) {
    double a = 0, b = kPi;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      (tau_of(m) < tau ? a : b) = m;
    }
    return 0.5 * (a + b);
  };
  Field u1{std::vector<double>(mesh1.dofs())};
  for (int i = 0; i < mesh1.dofs(); ++i) {
    const double t = t_of_tau(mesh1.node_t()[i]);
    u1[i] = std::pow(phi(t), -0.5) * f(t);  // (n-2)/2 = 1/2 at n = 3
  }

  auto e0 = energy(mesh0, u0);
  auto e1 = energy(mesh1, u1);
  CHECK(e1.total == doctest::Approx(e0.total).epsilon(2e-4));
  CHECK(e1.interior_mass == doctest::Approx(e0.interior_mass).epsilon(2e-4));
}
