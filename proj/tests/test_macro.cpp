#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "gyrodiff/errors.hpp"
#include "gyrodiff/macro.hpp"
#include "oracles.hpp"

using namespace gyrodiff;
constexpr double kPi = std::numbers::pi;

TEST_CASE("heat equation: Fourier mode decays by the scheme's symbol") {
  const int n = 32;
  const double len = 4.0, d = 0.8, h = len / n, dt = 0.2 * h * h / d;
  const SpaceGrid s = SpaceGrid::make(Geometry::slab_z, n, len);
  MacroField f = MacroField::from_density(s, DensityProfile{"cosine", 0.0, 1.0, 1.0, 2});
  Eigen::Matrix3d dm = Eigen::Matrix3d::Zero();
  dm(2, 2) = d;
  const double k = 2.0 * kPi * 2 / len;
  const double g = 1.0 - dt * d * 4.0 / (h * h) * std::pow(std::sin(0.5 * k * h), 2);
  const Eigen::VectorXd before = f.rho;
  f = step_drift_diffusion(f, dm, FieldSpec::zero(), dt);
  CHECK((f.rho - g * before).norm() < 1e-13);
  // and the continuous rate is recovered to second order in h
  CHECK(std::log(g) / dt == doctest::Approx(-d * k * k).epsilon(2.0 * k * k * h * h / 12.0));
}

TEST_CASE("e^{-V} is a fixed point of the drift-diffusion stepper") {
  for (auto geo : {Geometry::slab_z, Geometry::perp_xy}) {
    const SpaceGrid s = SpaceGrid::make(geo, 16, 4.0);
    const std::array<int, 3> mode = geo == Geometry::slab_z ? std::array<int, 3>{0, 0, 1} : std::array<int, 3>{1, 1, 0};
    const FieldSpec v = FieldSpec::cosine(0.7, mode, s);
    MacroField f{s, Eigen::VectorXd(s.cells()), 0.0};
    for (int c = 0; c < s.cells(); ++c) f.rho(c) = std::exp(-v.potential(0.0, s.center(c), s));
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity() * 0.6;
    const MacroStepper step(s, d, v, 0.5 * MacroStepper(s, d, v, 1.0).stable_dt(0.0));
    MacroField g = f;
    for (int n = 0; n < 10; ++n) step.step(g);
    CHECK((g.rho - f.rho).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("guiding center: uniform drift translates with E x e_z and conserves mass") {
  // wide enough that nothing reaches the periodic seam
  const SpaceGrid s = SpaceGrid::make(Geometry::perp_xy, 24, 12.0);
  const FieldSpec e = FieldSpec::uniform({0.3, -0.2, 0.0});
  MacroField f = MacroField::from_density(s, DensityProfile{"gaussian", 0.0, 1.0, 0.5, 1});
  const double m0 = f.total_mass(), max0 = f.rho.maxCoeff(), min0 = f.rho.minCoeff();
  auto com = [&](const MacroField& m) {
    double x = 0, y = 0;
    for (int c = 0; c < s.cells(); ++c) {
      x += m.rho(c) * s.center(c)[0];
      y += m.rho(c) * s.center(c)[1];
    }
    return std::array<double, 2>{x / m.rho.sum(), y / m.rho.sum()};
  };
  const auto c0 = com(f);
  const double dt = 0.01;
  for (int n = 0; n < 20; ++n) f = step_guiding_center(f, 0.0, e, dt);
  const auto c1 = com(f);
  CHECK(std::abs(f.total_mass() - m0) < 1e-12 * m0);
  CHECK((c1[0] - c0[0]) / 0.2 == doctest::Approx(-0.2).epsilon(1e-10));
  CHECK((c1[1] - c0[1]) / 0.2 == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(f.rho.maxCoeff() <= max0);
  CHECK(f.rho.minCoeff() >= min0);
}

TEST_CASE("rotating drift from a cosine potential is monotone and conservative") {
  const SpaceGrid s = SpaceGrid::make(Geometry::perp_xy, 16, 4.0);
  const FieldSpec v = FieldSpec::cosine(0.5, {1, 1, 0}, s);
  MacroField f = MacroField::from_density(s, DensityProfile{"gaussian", 0.1, 1.0, 0.5, 1});
  const double m0 = f.total_mass(), max0 = f.rho.maxCoeff(), min0 = f.rho.minCoeff();
  const MacroStepper step(s, guiding_center_tensor(0.0), v, 0.9 * MacroStepper(s, guiding_center_tensor(0.0), v, 1.0).stable_dt(0.0));
  for (int n = 0; n < 50; ++n) step.step(f);
  CHECK(std::abs(f.total_mass() - m0) < 1e-12 * m0);
  CHECK(f.rho.maxCoeff() <= max0 * (1 + 1e-14));
  CHECK(f.rho.minCoeff() >= min0 * (1 - 1e-14));
}

TEST_CASE("pure antisymmetric tensor without field leaves rho unchanged") {
  const SpaceGrid s = SpaceGrid::make(Geometry::perp_xy, 8, 4.0);
  MacroField f = MacroField::from_density(s, DensityProfile{"gaussian", 0.0, 1.0, 0.5, 1});
  const auto g = step_drift_diffusion(f, guiding_center_tensor(0.0), FieldSpec::zero(), 0.1);
  CHECK((g.rho - f.rho).norm() < 1e-15);
}

TEST_CASE("Gaussian variance grows as 2 D_z t") {
  MacroRunSpec spec;
  spec.space = SpaceGrid::make(Geometry::slab_z, 128, 12.0);
  spec.initial = DensityProfile{"gaussian", 0.0, 1.0, 0.5, 1};
  spec.equation = MacroEquation::guiding_center;
  spec.d_z = 0.8;
  spec.t_end = 1.0;
  const auto r = run_macro(spec);
  auto var = [&](const Eigen::VectorXd& rho) {
    double v = 0;
    for (int c = 0; c < spec.space.cells(); ++c) v += rho(c) * std::pow(spec.space.center(c)[2] - 6.0, 2);
    return v / rho.sum();
  };
  const double growth = var(r.snapshots.back()) - var(r.snapshots.front());
  CHECK(growth == doctest::Approx(2.0 * 0.8 * 1.0).epsilon(0.02));
  CHECK(r.positive);
}

TEST_CASE("explicit bound is enforced; implicit z lifts it") {
  const SpaceGrid s = SpaceGrid::make(Geometry::slab_z, 32, 4.0);
  MacroField f = MacroField::from_density(s, DensityProfile{"gaussian", 0.0, 1.0, 0.5, 1});
  CHECK_THROWS_AS(step_guiding_center(f, 1.0, FieldSpec::zero(), 0.1), StabilityError);
  MacroOptions o;
  o.implicit_z = true;
  const auto g = step_guiding_center(f, 1.0, FieldSpec::zero(), 0.1, o);
  CHECK(g.rho.minCoeff() >= 0.0);
  CHECK(g.total_mass() == doctest::Approx(f.total_mass()).epsilon(1e-13));
  // backward Euler against many small explicit steps
  MacroField a = f, b = f;
  const double t = 0.05;
  a = step_guiding_center(a, 1.0, FieldSpec::zero(), t, o);
  for (int n = 0; n < 100; ++n) b = step_guiding_center(b, 1.0, FieldSpec::zero(), t / 100);
  CHECK((a.rho - b.rho).norm() < 0.05 * b.rho.norm());
}

TEST_CASE("contracts: geometry, zero data") {
  MacroRunSpec spec;
  spec.space = SpaceGrid{};
  CHECK_THROWS_AS(run_macro(spec), ValidationError);
  spec.space = SpaceGrid::make(Geometry::slab_z, 16, 4.0);
  spec.initial.kind = "zero";
  spec.t_end = 0.1;
  const auto r = run_macro(spec);
  CHECK(r.final_field.rho.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(parse_equation("poisson"), ValidationError);
}
