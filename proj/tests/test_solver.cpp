#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#include "yamabe/solver.hpp"

using namespace yamabe;

namespace {
constexpr double kPi = M_PI;
// 6 (2 pi^2)^{2/3} and its hemisphere counterpart 6 pi^{4/3}.
constexpr double kYSphere3 = 43.823232716250654989;
constexpr double kYHemi3 = 27.606906686822939766;

// Independent oracle for the mixed problem on the round-hemisphere class:
// the extremal metrics are spherical caps (with the flat ball as the
// degenerate endpoint); each cap of angle theta, rescaled to meet the
// constraint, has energy s * E(theta) where
//   V = 2 pi (theta - sin cos), A = 4 pi sin^2, E = 12 pi theta + 2 pi sin(2 theta)
// and s solves lambda V s^3 + (1-lambda) A s^2 = 1. Pure closed-form
// geometry; entirely independent of the solver path.
double cap_family_min(double lambda) {
  double best = std::numeric_limits<double>::infinity();
  const int K = 4000;
  for (int i = 1; i <= K; ++i) {
    const double th = (kPi / 2) * i / K;
    const double V = 2 * kPi * (th - std::sin(th) * std::cos(th));
    const double A = 4 * kPi * std::sin(th) * std::sin(th);
    const double E = 12 * kPi * th + 2 * kPi * std::sin(2 * th);
    double lo = 0, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double s = 0.5 * (lo + hi);
      (lambda * V * s * s * s + (1 - lambda) * A * s * s < 1.0 ? lo : hi) = s;
    }
    best = std::min(best, 0.5 * (lo + hi) * E);
  }
  return best;
}

SolverOptions quick_opts(int nodes = 256) {
  SolverOptions o;
  o.mesh_nodes = nodes;
  o.seed = 20240901;
  return o;
}
}  // namespace

TEST_CASE("cap-family oracle reproduces its frozen values") {
  // Frozen from a high-precision evaluation of the same closed forms.
  CHECK(cap_family_min(0.0) == doctest::Approx(14.179630807244128).epsilon(1e-7));
  CHECK(cap_family_min(0.25) == doctest::Approx(16.085331929910891).epsilon(1e-7));
  CHECK(cap_family_min(0.5) == doctest::Approx(18.850738784884598).epsilon(1e-7));
  CHECK(cap_family_min(0.75) == doctest::Approx(22.936783007187232).epsilon(1e-7));
  CHECK(cap_family_min(1.0) == doctest::Approx(kYHemi3).epsilon(1e-9));
}

TEST_CASE("closed forms") {
  CHECK(closed_form_sphere(3) == doctest::Approx(kYSphere3).epsilon(1e-12));
  CHECK(closed_form_sphere(4) == doctest::Approx(61.562391847769477).epsilon(1e-12));

  auto cf1 = closed_form_hemisphere(3, 1.0);
  CHECK(cf1.paper_value == doctest::Approx(3.4508633358528675).epsilon(1e-12));
  CHECK(cf1.energy_scale_value == doctest::Approx(kYHemi3).epsilon(1e-12));
  auto cf0 = closed_form_hemisphere(3, 0.0);
  CHECK(cf0.paper_value == doctest::Approx(2.0881229988118904).epsilon(1e-12));

  // Continuity of the closed form in lambda.
  double prev = closed_form_hemisphere(3, 0.0).paper_value;
  for (int i = 1; i <= 50; ++i) {
    const double cur = closed_form_hemisphere(3, i / 50.0).paper_value;
    CHECK(std::abs(cur - prev) < 0.05);
    prev = cur;
  }

  // Consistency: 2^{-2/n} sphere value equals the lambda=1 hemisphere value.
  for (int n : {3, 4}) {
    CHECK(std::pow(2.0, -2.0 / n) * closed_form_sphere(n) ==
          doctest::Approx(closed_form_hemisphere(n, 1.0).energy_scale_value)
              .epsilon(1e-12));
  }
}

TEST_CASE("sphere at (1,0): solver matches the closed form within 1%") {
  auto est = minimize_energy(models::round_sphere(3), 1, 0, quick_opts(512));
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(kYSphere3).epsilon(0.01));
  CHECK(est.euler_lagrange_residual < 1e-8);
  CHECK(std::abs(constraint(*est.mesh, est.minimizer, 1, 0) - 1.0) < 1e-10);
}

TEST_CASE("hemisphere at (1,0): reflection value within 1%") {
  auto est = minimize_energy(models::hemisphere(3), 1, 0, quick_opts(512));
  CHECK(est.value == doctest::Approx(kYHemi3).epsilon(0.01));
}

TEST_CASE("short cylinder: constant field is the minimizer") {
  const double L = 0.5;
  auto est = minimize_energy(models::cylinder(3, L), 1, 0, quick_opts(64));
  const double expected = 2 * std::pow(4 * kPi * L, 2.0 / 3);
  CHECK(est.value == doctest::Approx(expected).epsilon(1e-3));
  CHECK(est.value <= expected * (1 + 1e-9));
}

TEST_CASE("hemisphere mixed-lambda values match the cap-family oracle") {
  auto m = models::hemisphere(3);
  for (double lam : {0.0, 0.25, 0.5, 0.75}) {
    auto est = minimize_energy(m, lam, 1 - lam, quick_opts(512));
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(cap_family_min(lam)).epsilon(0.01));
  }
}

TEST_CASE("refinement study extrapolates the sphere to 0.1%") {
  SolverOptions o = quick_opts(128);
  o.refinement_levels = 3;
  auto est = refine_and_extrapolate(models::round_sphere(3), 1, 0, o);
  CHECK(est.level_values.size() == 3);
  CHECK(est.extrapolated_value == doctest::Approx(kYSphere3).epsilon(1e-3));
  CHECK(est.monotone_levels);
}

TEST_CASE("refinement levels are non-increasing on the cylinder") {
  SolverOptions o = quick_opts(64);
  o.refinement_levels = 3;
  auto est = refine_and_extrapolate(models::cylinder(3, 10), 1, 0, o);
  for (size_t i = 1; i < est.level_values.size(); ++i)
    CHECK(est.level_values[i] <=
          est.level_values[i - 1] + 1e-9 * std::abs(est.level_values[i - 1]));
}

TEST_CASE("monotonicity in the constraint weights") {
  auto m = models::hemisphere(3);
  SolverOptions o = quick_opts(192);
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    auto est = minimize_on_mesh(std::make_shared<const Mesh>(m, o.mesh_nodes), a, 1.0, o);
    CHECK(est.value <= prev * (1 + 1e-6) + 1e-12);
    prev = est.value;
  }
}

TEST_CASE("lambda sweep warm-starts and stays finite and ordered") {
  auto m = models::hemisphere(3);
  auto sweep = lambda_sweep(m, {0.0, 0.25, 0.5, 0.75, 1.0}, quick_opts(128));
  CHECK(sweep.size() == 5);
  double lam_prev = -1;
  for (const auto& [lam, est] : sweep) {
    CHECK(lam > lam_prev);
    CHECK(std::isfinite(est.value));
    CHECK(est.converged);
    lam_prev = lam;
  }
  // Continuous trend: adjacent values differ by a bounded factor.
  for (size_t i = 1; i < sweep.size(); ++i)
    CHECK(std::abs(sweep[i].second.value - sweep[i - 1].second.value) <
          0.35 * sweep[i].second.value);
}

TEST_CASE("lambda = 0 on a closed model is a hard error") {
  CHECK_THROWS_AS(minimize_energy(models::round_sphere(3), 0, 1, quick_opts(64)),
                  ConstraintUnreachable);
}

TEST_CASE("quotient and full product are related by exactly 2^{-2/3}") {
  const double L = 6.0;
  auto q = minimize_energy(models::quotient_product(3, L), 1, 0, quick_opts(192));
  auto s = minimize_energy(models::schoen_product(3, L), 1, 0, quick_opts(192));
  CHECK(q.value == doctest::Approx(s.value * std::pow(2.0, -2.0 / 3)).epsilon(1e-6));
}

TEST_CASE("long product column approaches the sphere value from below") {
  auto est = minimize_energy(models::schoen_product(3, 30), 1, 0, quick_opts(768));
  CHECK(est.value <= kYSphere3 * 1.01);
  CHECK(est.value >= 0.9 * kYSphere3);
}

TEST_CASE("upper-bound property: admissible fields never beat the estimate") {
  auto m = models::hemisphere(3);
  auto mesh = std::make_shared<const Mesh>(m, 128);
  SolverOptions o = quick_opts(128);
  auto est = minimize_on_mesh(mesh, 0.5, 0.5, o);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Field u{std::vector<double>(mesh->dofs())};
    for (auto& x : u.v) x = d(rng);
    u = normalize(*mesh, u, 0.5, 0.5);
    CHECK(energy(*mesh, u).total >= est.value - 1e-8 * std::abs(est.value));
  }
}

TEST_CASE("determinism: identical options give bit-identical results") {
  auto run = [&] {
    return minimize_energy(models::hemisphere(3), 0.3, 0.7, quick_opts(96));
  };
  auto e1 = run();
  auto e2 = run();
  CHECK(std::memcmp(&e1.value, &e2.value, sizeof(double)) == 0);
  REQUIRE(e1.minimizer.size() == e2.minimizer.size());
  CHECK(std::memcmp(e1.minimizer.v.data(), e2.minimizer.v.data(),
                    sizeof(double) * e1.minimizer.size()) == 0);
}

TEST_CASE("conformal representative changes the estimate by < 0.5%") {
  auto s3 = models::round_sphere(3);
  auto phi = [](double t) {
    const double lo = 0.8, hi = 2.3;
    if (t <= lo || t >= hi) return 1.0;
    const double x = (t - lo) / (hi - lo);
    return 1.0 + 0.25 * std::exp(1.0 - 1.0 / (4.0 * x * (1.0 - x)));
  };
  auto rep = conformal_rescale(s3, phi, 0.8, 2.3, 201);
  auto base = minimize_energy(s3, 1, 0, quick_opts(384));
  SolverOptions o = quick_opts(384);
  auto mesh = std::make_shared<const Mesh>(rep, std::vector<int>{128, 192, 128});
  auto morphed = minimize_on_mesh(mesh, 1, 0, o);
  CHECK(morphed.value == doctest::Approx(base.value).epsilon(5e-3));
}
