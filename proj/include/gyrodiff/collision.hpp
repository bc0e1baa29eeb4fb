#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gyrodiff/cross_section.hpp"
#include "gyrodiff/grid.hpp"

namespace gyrodiff {

enum class KernelStorage { constant, dense, matrix_free };

struct KernelOptions {
  // Largest node-pair count stored densely; above it sigma is re-evaluated
  // on every gain apply.
  std::size_t dense_budget = std::size_t{1} << 24;
};

// sigma on a velocity grid together with nu, nu_bar and the gyro-averaged
// kernels. sigma_bar depends on its first argument only through the ring
// (radius, v_z), so it is stored as n_rings x N; sigma_barbar as
// n_rings x n_rings.
class CollisionKernel {
 public:
  CollisionKernel(GridPtr grid, CrossSection sigma, KernelOptions options = {});

  const VelocityGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const CrossSection& cross_section() const { return sigma_; }
  KernelStorage storage() const { return storage_; }
  double alpha1() const { return sigma_.alpha1(); }
  double alpha2() const { return sigma_.alpha2(); }

  double sigma(std::size_t i, std::size_t j) const;
  double sigma_bar(std::size_t i, std::size_t j) const;
  double sigma_barbar(std::size_t i, std::size_t j) const;
  const Eigen::MatrixXd& sigma_bar_rings() const { return sigma_bar_; }
  const Eigen::MatrixXd& sigma_barbar_rings() const { return sigma_barbar_; }

  const Distribution& nu() const { return nu_; }
  const Distribution& nu_bar() const { return nu_bar_; }
  // nu_bar per ring.
  const Eigen::VectorXd& nu_bar_rings() const { return nu_bar_rings_; }
  // True when nu is constant on every ring (rotation-invariant sigma).
  bool nu_ring_constant() const { return nu_ring_constant_; }

  // s_i = sum_j w_j sigma_ij f_j.
  Eigen::VectorXd integrate(const Eigen::VectorXd& f) const;
  // Same with sigma_bar; one value per ring.
  Eigen::VectorXd integrate_bar(const Eigen::VectorXd& f) const;

  // Dense N x N sigma (built on demand for matrix-free storage).
  Eigen::MatrixXd dense_sigma() const;

 private:
  void build_dense();
  void build_streaming();
  void finish_averages(const Eigen::MatrixXd& sigma_bar_partial);

  GridPtr grid_;
  CrossSection sigma_;
  KernelStorage storage_;
  Eigen::MatrixXd dense_;
  Eigen::MatrixXd sigma_bar_;
  Eigen::MatrixXd sigma_barbar_;
  Distribution nu_;
  Distribution nu_bar_;
  Eigen::VectorXd nu_bar_rings_;
  bool nu_ring_constant_ = false;
};

Distribution collision_frequency(const CollisionKernel& k);
Distribution apply_gain(const CollisionKernel& k, const Distribution& f);
Distribution apply_Q(const CollisionKernel& k, const Distribution& f);
// Gain with sigma_bar, and the averaged operators.
Distribution apply_gain_bar(const CollisionKernel& k, const Distribution& f);
Distribution apply_Qbar(const CollisionKernel& k, const Distribution& f);
Distribution apply_Qbarbar(const CollisionKernel& k, const Distribution& f);

// Q - G/eta^2 and its L2_M adjoint Q + G/eta^2.
Distribution apply_Qeta(const CollisionKernel& k, const Distribution& f, double eta);
Distribution apply_Qeta_adjoint(const CollisionKernel& k, const Distribution& f, double eta);
// S = G/eta^2 + nu (sign of G flipped for the adjoint).
Distribution apply_S_eta(const CollisionKernel& k, const Distribution& f, double eta, bool adjoint = false);
Distribution apply_L_eta(const CollisionKernel& k, const Distribution& f, double eta, bool adjoint = false);

// Matrix of Q^eta (or its adjoint) acting on node values.
Eigen::MatrixXd qeta_matrix(const CollisionKernel& k, double eta, bool adjoint = false);
// Matrix of Q alone.
Eigen::MatrixXd q_matrix(const CollisionKernel& k);

// Inverse of S^eta, factored once per (kernel, eta). Ring by ring: the
// integrating-factor integral along each gyration orbit is evaluated in
// closed form for ring-constant nu (Fourier multiplier 1 / (nu - i m / eta^2))
// and by an LU solve of the ring block otherwise; both are the exact
// inverse of the discrete S^eta.
class CharacteristicsInverse {
 public:
  CharacteristicsInverse(const CollisionKernel& k, double eta, bool adjoint = false);
  Distribution apply(const Distribution& f) const;
  double eta() const { return eta_; }

 private:
  GridPtr grid_;
  double eta_;
  std::vector<Eigen::MatrixXd> ring_inverse_;
};

void require_positive_eta(double eta);

}  // namespace gyrodiff
