#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "gyrodiff/errors.hpp"
#include "gyrodiff/grid.hpp"
#include "oracles.hpp"

using namespace gyrodiff;

TEST_CASE("Maxwellian mass equals the truncated-domain integral") {
  for (double vmax : {4.0, 6.0}) {
    const auto g = VelocityGrid::build({8, 16, 16, vmax, vmax});
    const double exact = oracle::maxwellian_mass(vmax, vmax);
    CHECK(g->maxwellian_mass() == doctest::Approx(exact).epsilon(1e-13));
    CHECK(g->deficit() >= 0.0);
    CHECK(g->deficit() <= g->tol_mass());
  }
}

TEST_CASE("second moments match the truncated Gaussian oracle") {
  const auto g = VelocityGrid::build({8, 16, 16, 6.0, 6.0});
  const auto m = maxwellian(g);
  const auto vz = Distribution::from_function(g, [](const Vec3& v) { return v[2]; });
  const auto vx = Distribution::from_function(g, [](const Vec3& v) { return v[0]; });
  CHECK(flux(hadamard(vz, m))[2] == doctest::Approx(oracle::vz2_moment(6.0, 6.0)).epsilon(1e-12));
  CHECK(flux(hadamard(vx, m))[0] == doctest::Approx(oracle::vx2_moment(6.0, 6.0)).epsilon(1e-12));
  CHECK(std::abs(mass(hadamard(vz, m))) < 1e-15);
}

TEST_CASE("rotation by a quarter turn maps v_x M to v_y M") {
  const auto g = VelocityGrid::build({4, 8, 4, 6.0, 6.0});
  const auto m = maxwellian(g);
  const auto vx = hadamard(Distribution::from_function(g, [](const Vec3& v) { return v[0]; }), m);
  const auto vy = hadamard(Distribution::from_function(g, [](const Vec3& v) { return v[1]; }), m);
  const auto r = rotate(vx, std::numbers::pi / 2);
  // f(R(tau) v) samples f at theta - tau: r cos(theta - pi/2) = v_y
  CHECK(weighted_norm(r - vy) < 1e-13);
  CHECK(weighted_norm(rotate(vx, -std::numbers::pi / 2) + vy) < 1e-13);
  // an isometry of the weighted norm, also off the grid angles
  CHECK(weighted_norm(rotate(vx, 0.3)) == doctest::Approx(weighted_norm(vx)).epsilon(1e-13));
}

TEST_CASE("cylindrical average is a projection and kills first harmonics") {
  const auto g = VelocityGrid::build({4, 9, 4, 6.0, 6.0});
  std::mt19937_64 rng(7);
  const auto f = oracle::random_distribution(g, rng);
  const auto a = cyl_average(f);
  CHECK(weighted_norm(cyl_average(a) - a) < 1e-14);
  const auto vx = Distribution::from_function(g, [](const Vec3& v) { return v[0] * std::exp(-v[2]); });
  CHECK(weighted_norm(cyl_average(vx)) < 1e-13 * weighted_norm(vx));
  CHECK(weighted_norm(partial_average(f, 2.0 * std::numbers::pi) - a) < 1e-13);
  CHECK(std::abs(weighted_inner(gyration(f), f)) < 1e-14);
}

TEST_CASE("CSV round trip and coordinate check") {
  const auto g = VelocityGrid::build({3, 4, 3, 5.0, 5.0});
  std::mt19937_64 rng(11);
  const auto f = oracle::random_distribution(g, rng);
  const std::string dir = oracle::scratch_dir("grid_csv");
  write_csv(dir + "/f.csv", f);
  CHECK(weighted_norm(read_csv(dir + "/f.csv", g) - f) < 1e-15);
  const auto other = VelocityGrid::build({3, 4, 3, 4.0, 5.0});
  CHECK_THROWS_AS(read_csv(dir + "/f.csv", other), ValidationError);
}

TEST_CASE("invalid parameters and mixed grids are rejected") {
  CHECK_THROWS_AS(VelocityGrid::build({1, 4, 4, 6.0, 6.0}), ValidationError);
  CHECK_THROWS_AS(VelocityGrid::build({4, 4, 4, -1.0, 6.0}), ValidationError);
  const auto a = VelocityGrid::build({3, 4, 3, 6.0, 6.0});
  const auto b = VelocityGrid::build({3, 4, 3, 6.0, 6.0});
  CHECK_THROWS_AS(maxwellian(a) + maxwellian(b), GridMismatch);
  CHECK_THROWS_AS(partial_average(maxwellian(a), 7.0), ValidationError);
}
