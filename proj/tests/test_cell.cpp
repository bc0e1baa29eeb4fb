#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gyrodiff/cell.hpp"
#include "gyrodiff/errors.hpp"
#include "oracles.hpp"

using namespace gyrodiff;

namespace {

Distribution vm(const GridPtr& g, int c) {
  return hadamard(Distribution::from_function(g, [c](const Vec3& v) { return v[c]; }), maxwellian(g));
}

}  // namespace

TEST_CASE("relaxation cell problem has the hand-derived solution") {
  const auto g = VelocityGrid::build({6, 9, 8, 6.0, 6.0});
  for (double tau : {0.5, 2.0}) {
    CollisionKernel k(g, CrossSection::constant(tau));
    const double nu = g->maxwellian_mass() / tau;
    for (double eta : {0.3, 1.5}) {
      const double a = 1.0 / (eta * eta) / (nu + 1.0 / (nu * std::pow(eta, 4))), b = -a / (nu * eta * eta);
      for (auto method : {SolveMethod::direct, SolveMethod::fixed_point}) {
        const auto c = solve_chi_eta(k, eta, method);
        CHECK(weighted_norm(c.x_z - (1.0 / nu) * vm(g, 2)) < 1e-12);
        CHECK(weighted_norm(c.x_perp[0] - (a * vm(g, 0) + b * vm(g, 1))) < 1e-10);
        CHECK(weighted_norm(c.x_perp[1] - (a * vm(g, 1) - b * vm(g, 0))) < 1e-10);
        CHECK(c.mass_defect < 1e-12);
        CHECK(c.bound_ok);
      }
    }
  }
}

TEST_CASE("Q^eta solver: residual, mass constraint and solvability") {
  const auto g = VelocityGrid::build({4, 7, 6, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_tilted(1.0, 0.5, 1.0, 0.5));
  std::mt19937_64 rng(9);
  auto data = oracle::random_distribution(g, rng);
  data = data - (mass(data) / g->maxwellian_mass()) * maxwellian(g);
  for (bool adj : {false, true}) {
    const QetaSolver solver(k, 0.5, SolveMethod::direct, {}, adj);
    SolveInfo info;
    const auto f = solver.solve(data, &info);
    const auto back = adj ? apply_Qeta_adjoint(k, f, 0.5) : apply_Qeta(k, f, 0.5);
    CHECK(weighted_norm(back + data) < 1e-11);
    CHECK(std::abs(mass(f)) < 1e-13);
  }
  CHECK_THROWS_AS(solve_qeta_cell(k, maxwellian(g), 0.5), SolvabilityError);
}

TEST_CASE("fixed point reports non-convergence with a contraction estimate") {
  const auto g = VelocityGrid::build({4, 7, 6, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_mix(1.0, 0.5));
  CellOptions opts;
  opts.max_iter = 2;
  try {
    solve_qeta_cell(k, vm(g, 2), 0.5, SolveMethod::fixed_point, opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.contraction() > 0.0);
    CHECK(e.contraction() < 1.0);
  }
}

TEST_CASE("A1 inverts G on zero-average data with A(nu A1 g) = 0") {
  const auto g = VelocityGrid::build({4, 9, 6, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_tilted(1.0, 0.5, 1.0));
  std::mt19937_64 rng(12);
  auto f = oracle::random_distribution(g, rng);
  f = f - cyl_average(f);
  const auto a1 = average_A1(k, f);
  CHECK(weighted_norm(gyration(a1) - f) < 1e-12);
  CHECK(weighted_norm(cyl_average(hadamard(k.nu(), a1))) < 1e-12);
  CHECK_THROWS_AS(average_A1(k, maxwellian(g)), SolvabilityError);
}

TEST_CASE("A1 refuses a Nyquist component on even angular grids") {
  const auto g = VelocityGrid::build({3, 8, 3, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_tilted(1.0, 0.5, 1.0));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g->size()));
  for (std::size_t i = 0; i < g->size(); ++i) v(static_cast<Eigen::Index>(i)) = (i % 2 == 0 ? 1.0 : -1.0);
  CHECK_THROWS_AS(average_A1(k, Distribution(g, v)), SolvabilityError);
}

TEST_CASE("averaged solves: input checks") {
  const auto g = VelocityGrid::build({4, 9, 6, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_mix(1.0, 0.5));
  CHECK_THROWS_AS(solve_qbarbar(k, vm(g, 0)), ValidationError);       // not cylindrically symmetric
  CHECK_THROWS_AS(solve_qbarbar(k, maxwellian(g)), SolvabilityError);  // nonzero mass
  const auto f = solve_qbarbar(k, -1.0 * vm(g, 2));
  CHECK(weighted_norm(apply_Qbarbar(k, f) + vm(g, 2)) < 1e-11);
}

TEST_CASE("expansion terms satisfy their defining identities") {
  const auto g = VelocityGrid::build({6, 9, 8, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_tilted(1.0, 0.5, 1.0, 0.5));
  const auto t = compute_expansion(k);
  CHECK(weighted_norm(cyl_average(t.xz0) - t.xz0) < 1e-12);
  for (const auto* x : {&t.xz0, &t.xz1, &t.xperp0[0], &t.xperp0[1], &t.xperp1[0], &t.xperp1[1]})
    CHECK(std::abs(mass(*x)) < 1e-12);
  // xperp0 - A(xperp0) = -I (v_perp M), I = ((0, 1), (-1, 0))
  CHECK(weighted_norm(t.xperp0[0] - cyl_average(t.xperp0[0]) + vm(g, 1)) < 1e-10);
  CHECK(weighted_norm(t.xperp0[1] - cyl_average(t.xperp0[1]) - vm(g, 0)) < 1e-10);
}

TEST_CASE("polynomial envelope bounds the solution") {
  const auto g = VelocityGrid::build({6, 9, 8, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_mix(1.0, 0.5));
  const auto c = solve_chi_eta(k, 0.5);
  const auto env = polynomial_envelope(c.x_z);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto& v = g->node(i);
    const double bound = (env.intercept + env.slope * std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])) *
                         g->maxwellian_values()(static_cast<Eigen::Index>(i));
    CHECK(std::abs(c.x_z[i]) <= bound * (1.0 + 1e-12));
  }
}
