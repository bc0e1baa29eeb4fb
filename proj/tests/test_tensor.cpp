#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gyrodiff/tensor.hpp"
#include "oracles.hpp"

using namespace gyrodiff;

TEST_CASE("relaxation D^eta against the closed form on the default grid") {
  const auto g = VelocityGrid::build(GridParams{});
  for (double tau : {0.5, 1.0, 2.0}) {
    CollisionKernel k(g, CrossSection::constant(tau));
    for (double eta : {0.5, 1.0, 2.0}) {
      const auto d = assemble_D_eta(solve_chi_eta(k, eta));
      const Eigen::Matrix3d ref = oracle::relaxation_matrix(tau, eta);
      CHECK((d.d - ref).cwiseAbs().maxCoeff() <= 1e-3 * ref.cwiseAbs().maxCoeff());
      CHECK((relaxation_reference(tau, eta).d - ref).norm() < 1e-14);
    }
  }
}

TEST_CASE("tensor decomposition and drift vector") {
  Eigen::Matrix3d m;
  m << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  const auto t = make_tensor(m, 0.5, Provenance::direct);
  CHECK((t.sym + t.antisym - m).norm() < 1e-15);
  CHECK((t.antisym + t.antisym.transpose()).norm() < 1e-15);
  // A v = v x u
  const Eigen::Vector3d v(0.3, -1.0, 2.0);
  CHECK((t.antisym * v - v.cross(t.u_drift)).norm() < 1e-14);
}

TEST_CASE("primal and adjoint assembly agree; symmetric part is positive") {
  const auto g = VelocityGrid::build({6, 9, 8, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_tilted(1.0, 0.5, 1.0, 0.5));
  const auto p = assemble_D_eta(solve_chi_eta(k, 0.7));
  const auto a = assemble_D_eta(solve_chi_eta(k, 0.7, SolveMethod::direct, {}, true));
  CHECK((p.d - a.d).norm() < 1e-10 * p.d.norm());
  CHECK(a.provenance == Provenance::adjoint);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(p.sym).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("expansion tensor approaches D^eta as eta shrinks") {
  const auto g = VelocityGrid::build({6, 9, 8, 6.0, 6.0});
  CollisionKernel k(g, CrossSection::gauss_tilted(1.0, 0.5, 1.0, 0.5));
  const auto terms = compute_expansion(k);
  double prev = 1e300;
  for (double eta : {0.4, 0.2, 0.1}) {
    const double diff = (assemble_D_eta(solve_chi_eta(k, eta)).d - expansion_tensor(terms, eta).d).norm();
    CHECK(diff < prev / 8.0);
    prev = diff;
  }
  const auto j = to_json(expansion_tensor(terms, 0.1));
  CHECK(j["provenance"] == "expansion");
  CHECK(j["matrix"].size() == 3);
}
