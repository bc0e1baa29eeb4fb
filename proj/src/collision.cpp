#include "gyrodiff/collision.hpp"

#include <cmath>

#include "gyrodiff/angular.hpp"
#include "gyrodiff/errors.hpp"
#include "gyrodiff/parallel.hpp"

namespace gyrodiff {

namespace {

// Sum of w_j f_j over each ring.
Eigen::VectorXd ring_sums(const VelocityGrid& g, const Eigen::VectorXd& wf) {
  return Eigen::Map<const Eigen::MatrixXd>(wf.data(), g.n_angle(), g.n_rings()).colwise().sum().transpose();
}

Eigen::VectorXd expand_rings(const VelocityGrid& g, const Eigen::VectorXd& per_ring) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(g.size()));
  Eigen::Map<Eigen::MatrixXd>(out.data(), g.n_angle(), g.n_rings()) =
      per_ring.transpose().replicate(g.n_angle(), 1);
  return out;
}

void require_kernel_grid(const CollisionKernel& k, const Distribution& f) {
  if (k.grid_ptr() != f.grid_ptr()) throw GridMismatch();
}

}  // namespace

void require_positive_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be > 0");
}

CollisionKernel::CollisionKernel(GridPtr grid, CrossSection sigma, KernelOptions options)
    : grid_(std::move(grid)),
      sigma_(std::move(sigma)),
      nu_(Distribution::zeros(grid_)),
      nu_bar_(Distribution::zeros(grid_)) {
  const auto& g = *grid_;
  const std::size_t n = g.size();
  if (sigma_.is_tabulated() && sigma_.table_size() != n)
    throw ValidationError("cross_section: table has " + std::to_string(sigma_.table_size()) +
                          " nodes, grid has " + std::to_string(n));
  if (sigma_.is_constant()) {
    storage_ = KernelStorage::constant;
    const double s = sigma_.constant_value();
    sigma_barbar_ = Eigen::MatrixXd::Constant(g.n_rings(), g.n_rings(), s);
    nu_ = Distribution(grid_, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), s * g.maxwellian_mass()));
    nu_bar_ = nu_;
    nu_bar_rings_ = Eigen::VectorXd::Constant(g.n_rings(), s * g.maxwellian_mass());
    nu_ring_constant_ = true;
    return;
  }
  if (sigma_.is_tabulated() || n * n <= options.dense_budget) {
    storage_ = KernelStorage::dense;
    build_dense();
  } else {
    storage_ = KernelStorage::matrix_free;
    build_streaming();
  }
}

void CollisionKernel::build_dense() {
  const auto& g = *grid_;
  const auto n = static_cast<Eigen::Index>(g.size());
  dense_.resize(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
    for (std::size_t i = 0; i <= j; ++i)
      dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sigma_.between(g, i, j);
  });
  dense_.triangularView<Eigen::StrictlyLower>() = dense_.transpose();

  const Eigen::VectorXd wm = g.weights().cwiseProduct(g.maxwellian_values());
  nu_ = Distribution(grid_, dense_ * wm);

  const int na = g.n_angle();
  Eigen::MatrixXd sb(g.n_rings(), n);
  for (Eigen::Index j = 0; j < n; ++j)
    sb.col(j) = Eigen::Map<const Eigen::MatrixXd>(dense_.col(j).data(), na, g.n_rings()).colwise().mean().transpose();
  finish_averages(sb);
}

void CollisionKernel::build_streaming() {
  const auto& g = *grid_;
  const std::size_t n = g.size();
  const int na = g.n_angle();
  const Eigen::VectorXd wm = g.weights().cwiseProduct(g.maxwellian_values());
  Eigen::VectorXd nu(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(g.n_rings(), static_cast<Eigen::Index>(n));
  parallel_for(static_cast<std::size_t>(g.n_rings()), [&](std::size_t p) {
    for (int a = 0; a < na; ++a) {
      const std::size_t i = p * na + a;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double s = sigma_.between(g, i, j);
        acc += wm(static_cast<Eigen::Index>(j)) * s;
        sb(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) += s / na;
      }
      nu(static_cast<Eigen::Index>(i)) = acc;
    }
  });
  nu_ = Distribution(grid_, std::move(nu));
  finish_averages(sb);
}

void CollisionKernel::finish_averages(const Eigen::MatrixXd& sb) {
  const auto& g = *grid_;
  const int na = g.n_angle();
  sigma_bar_ = sb;
  sigma_barbar_.resize(g.n_rings(), g.n_rings());
  for (int p = 0; p < g.n_rings(); ++p)
    sigma_barbar_.row(p) =
        Eigen::Map<const Eigen::MatrixXd>(sb.row(p).eval().data(), na, g.n_rings()).colwise().mean();
  // symmetric by construction up to summation order
  sigma_barbar_ = 0.5 * (sigma_barbar_ + sigma_barbar_.transpose()).eval();

  const Eigen::VectorXd wm = g.weights().cwiseProduct(g.maxwellian_values());
  nu_bar_rings_ = sigma_bar_ * wm;
  nu_bar_ = Distribution(grid_, expand_rings(g, nu_bar_rings_));

  nu_ring_constant_ = true;
  const Eigen::Map<const Eigen::MatrixXd> rings(nu_.values().data(), na, g.n_rings());
  for (int p = 0; p < g.n_rings(); ++p) {
    const double spread = rings.col(p).maxCoeff() - rings.col(p).minCoeff();
    if (spread > 1e-13 * rings.col(p).cwiseAbs().maxCoeff()) {
      nu_ring_constant_ = false;
      break;
    }
  }
}

double CollisionKernel::sigma(std::size_t i, std::size_t j) const {
  switch (storage_) {
    case KernelStorage::constant: return sigma_.constant_value();
    case KernelStorage::dense: return dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    default: return sigma_.between(*grid_, i, j);
  }
}

double CollisionKernel::sigma_bar(std::size_t i, std::size_t j) const {
  if (storage_ == KernelStorage::constant) return sigma_.constant_value();
  return sigma_bar_(grid_->ring_of(i), static_cast<Eigen::Index>(j));
}

double CollisionKernel::sigma_barbar(std::size_t i, std::size_t j) const {
  return sigma_barbar_(grid_->ring_of(i), grid_->ring_of(j));
}

Eigen::VectorXd CollisionKernel::integrate(const Eigen::VectorXd& f) const {
  const auto& g = *grid_;
  const Eigen::VectorXd wf = g.weights().cwiseProduct(f);
  const auto n = static_cast<Eigen::Index>(g.size());
  switch (storage_) {
    case KernelStorage::constant:
      return Eigen::VectorXd::Constant(n, sigma_.constant_value() * wf.sum());
    case KernelStorage::dense:
      // dense_ is symmetric; the transposed product walks memory contiguously
      return dense_.transpose() * wf;
    default: {
      Eigen::VectorXd out(n);
      parallel_for(g.size(), [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) acc += sigma_.between(g, i, j) * wf(static_cast<Eigen::Index>(j));
        out(static_cast<Eigen::Index>(i)) = acc;
      });
      return out;
    }
  }
}

Eigen::VectorXd CollisionKernel::integrate_bar(const Eigen::VectorXd& f) const {
  const auto& g = *grid_;
  const Eigen::VectorXd wf = g.weights().cwiseProduct(f);
  if (storage_ == KernelStorage::constant)
    return Eigen::VectorXd::Constant(g.n_rings(), sigma_.constant_value() * wf.sum());
  return sigma_bar_ * wf;
}

Eigen::MatrixXd CollisionKernel::dense_sigma() const {
  const auto n = static_cast<Eigen::Index>(grid_->size());
  if (storage_ == KernelStorage::dense) return dense_;
  if (storage_ == KernelStorage::constant) return Eigen::MatrixXd::Constant(n, n, sigma_.constant_value());
  Eigen::MatrixXd out(n, n);
  parallel_for(grid_->size(), [&](std::size_t j) {
    for (std::size_t i = 0; i < grid_->size(); ++i)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sigma_.between(*grid_, i, j);
  });
  return out;
}

Distribution collision_frequency(const CollisionKernel& k) { return k.nu(); }

Distribution apply_gain(const CollisionKernel& k, const Distribution& f) {
  require_kernel_grid(k, f);
  return {f.grid_ptr(), k.grid().maxwellian_values().cwiseProduct(k.integrate(f.values()))};
}

Distribution apply_Q(const CollisionKernel& k, const Distribution& f) {
  require_kernel_grid(k, f);
  Eigen::VectorXd out = k.grid().maxwellian_values().cwiseProduct(k.integrate(f.values()));
  out -= k.nu().values().cwiseProduct(f.values());
  return {f.grid_ptr(), std::move(out)};
}

Distribution apply_gain_bar(const CollisionKernel& k, const Distribution& f) {
  require_kernel_grid(k, f);
  const auto& g = k.grid();
  return {f.grid_ptr(), g.maxwellian_values().cwiseProduct(expand_rings(g, k.integrate_bar(f.values())))};
}

Distribution apply_Qbar(const CollisionKernel& k, const Distribution& f) {
  Distribution out = apply_gain_bar(k, f);
  out -= hadamard(k.nu_bar(), f);
  return out;
}

Distribution apply_Qbarbar(const CollisionKernel& k, const Distribution& f) {
  require_kernel_grid(k, f);
  const auto& g = k.grid();
  const Eigen::VectorXd s = ring_sums(g, g.weights().cwiseProduct(f.values()));
  Eigen::VectorXd out = g.maxwellian_values().cwiseProduct(expand_rings(g, k.sigma_barbar_rings() * s));
  out -= k.nu_bar().values().cwiseProduct(f.values());
  return {f.grid_ptr(), std::move(out)};
}

Distribution apply_Qeta(const CollisionKernel& k, const Distribution& f, double eta) {
  require_positive_eta(eta);
  Distribution out = apply_Q(k, f);
  out -= (1.0 / (eta * eta)) * gyration(f);
  return out;
}

Distribution apply_Qeta_adjoint(const CollisionKernel& k, const Distribution& f, double eta) {
  require_positive_eta(eta);
  Distribution out = apply_Q(k, f);
  out += (1.0 / (eta * eta)) * gyration(f);
  return out;
}

Distribution apply_S_eta(const CollisionKernel& k, const Distribution& f, double eta, bool adjoint) {
  require_positive_eta(eta);
  require_kernel_grid(k, f);
  const double s = (adjoint ? -1.0 : 1.0) / (eta * eta);
  Distribution out = s * gyration(f);
  out += hadamard(k.nu(), f);
  return out;
}

Distribution apply_L_eta(const CollisionKernel& k, const Distribution& f, double eta, bool adjoint) {
  require_kernel_grid(k, f);
  return CharacteristicsInverse(k, eta, adjoint).apply(f);
}

Eigen::MatrixXd q_matrix(const CollisionKernel& k) {
  const auto& g = k.grid();
  Eigen::MatrixXd q = g.maxwellian_values().asDiagonal() * k.dense_sigma() * g.weights().asDiagonal();
  q.diagonal() -= k.nu().values();
  return q;
}

Eigen::MatrixXd qeta_matrix(const CollisionKernel& k, double eta, bool adjoint) {
  require_positive_eta(eta);
  const auto& g = k.grid();
  Eigen::MatrixXd q = q_matrix(k);
  const double s = (adjoint ? 1.0 : -1.0) / (eta * eta);
  const int na = g.n_angle();
  for (int p = 0; p < g.n_rings(); ++p) q.block(p * na, p * na, na, na) += s * g.ring_gyration();
  return q;
}

CharacteristicsInverse::CharacteristicsInverse(const CollisionKernel& k, double eta, bool adjoint)
    : grid_(k.grid_ptr()), eta_(eta) {
  require_positive_eta(eta);
  const auto& g = k.grid();
  const int na = g.n_angle();
  const double s = (adjoint ? -1.0 : 1.0) / (eta * eta);
  const Eigen::Map<const Eigen::MatrixXd> nu(k.nu().values().data(), na, g.n_rings());
  ring_inverse_.reserve(g.n_rings());
  for (int p = 0; p < g.n_rings(); ++p) {
    if (k.nu_ring_constant()) {
      Eigen::MatrixXd inv = angular::characteristics_inverse(na, nu.col(p).mean(), eta);
      // (nu - G/eta^2)^{-1} is the transpose since G is skew
      if (adjoint) inv.transposeInPlace();
      ring_inverse_.push_back(std::move(inv));
    } else {
      Eigen::MatrixXd block = s * g.ring_gyration();
      block.diagonal() += nu.col(p);
      ring_inverse_.push_back(block.partialPivLu().inverse());
    }
  }
}

Distribution CharacteristicsInverse::apply(const Distribution& f) const {
  if (f.grid_ptr() != grid_) throw GridMismatch();
  const auto& g = *grid_;
  const int na = g.n_angle();
  Eigen::VectorXd out(f.values().size());
  for (int p = 0; p < g.n_rings(); ++p)
    out.segment(p * na, na).noalias() = ring_inverse_[p] * f.values().segment(p * na, na);
  return {grid_, std::move(out)};
}

}  // namespace gyrodiff
