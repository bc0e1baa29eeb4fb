#include "gyrodiff/cell.hpp"

#include <cmath>

#include "gyrodiff/errors.hpp"
#include "gyrodiff/parallel.hpp"

namespace gyrodiff {

namespace {

Distribution divide(const Distribution& f, const Distribution& d) {
  return {f.grid_ptr(), f.values().cwiseQuotient(d.values())};
}

Distribution remove_mass(Distribution f) {
  const auto& g = f.grid();
  return f - (mass(f) / g.maxwellian_mass()) * maxwellian(f.grid_ptr());
}

Distribution v_times_maxwellian(const GridPtr& grid, int c) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid->size()));
  for (std::size_t i = 0; i < grid->size(); ++i)
    out(static_cast<Eigen::Index>(i)) = grid->node(i)[c] * grid->maxwellian_values()(static_cast<Eigen::Index>(i));
  return {grid, std::move(out)};
}

void require_same(const CollisionKernel& k, const Distribution& f) {
  if (k.grid_ptr() != f.grid_ptr()) throw GridMismatch();
}

// Q-bar-bar f = g on rings, mass(f) = 0, without precondition checks.
// Unknowns are scaled as f_q = sqrt(M_q / W_q) y_q (W_q the ring weight), which
// makes the bordered matrix symmetric and O(1) despite M spanning many
// decades across the rings.
Distribution ring_solve(const CollisionKernel& k, const Distribution& g) {
  const auto& grid = k.grid();
  const int nr = grid.n_rings();
  const int na = grid.n_angle();
  const Eigen::Map<const Eigen::MatrixXd> gv(g.values().data(), na, nr);
  const Eigen::Map<const Eigen::MatrixXd> mv(grid.maxwellian_values().data(), na, nr);
  const Eigen::Map<const Eigen::MatrixXd> wv(grid.weights().data(), na, nr);
  const Eigen::ArrayXd mp = mv.row(0).transpose();
  const Eigen::ArrayXd wq = wv.colwise().sum().transpose();
  const Eigen::VectorXd root = (mp * wq).sqrt().matrix();
  const Eigen::ArrayXd scale = (mp / wq).sqrt();

  Eigen::MatrixXd a(nr + 1, nr + 1);
  a.topLeftCorner(nr, nr) = -(root.asDiagonal() * k.sigma_barbar_rings() * root.asDiagonal());
  a.topLeftCorner(nr, nr).diagonal() += k.nu_bar_rings();
  a.block(0, nr, nr, 1) = root;
  a.block(nr, 0, 1, nr) = root.transpose();
  a(nr, nr) = 0.0;
  Eigen::VectorXd rhs(nr + 1);
  rhs.head(nr) = -(gv.colwise().mean().transpose().array() / scale).matrix();
  rhs(nr) = 0.0;
  const Eigen::VectorXd y = a.partialPivLu().solve(rhs);

  const Eigen::VectorXd f = (y.head(nr).array() * scale).matrix();
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  Eigen::Map<Eigen::MatrixXd>(out.data(), na, nr) = f.transpose().replicate(na, 1);
  return {g.grid_ptr(), std::move(out)};
}

}  // namespace

SolveMethod parse_method(const std::string& name) {
  if (name == "direct") return SolveMethod::direct;
  if (name == "fixed_point") return SolveMethod::fixed_point;
  throw ValidationError("method: expected \"direct\" or \"fixed_point\", got \"" + name + "\"");
}

std::string to_string(SolveMethod m) { return m == SolveMethod::direct ? "direct" : "fixed_point"; }

Distribution average_A1(const CollisionKernel& k, const Distribution& g, const CellOptions& options) {
  require_same(k, g);
  const double tol = options.tol_zero;
  const double gn = weighted_norm(g);
  if (gn <= options.norm_floor) return Distribution::zeros(g.grid_ptr());
  const Distribution ag = cyl_average(g);
  if (weighted_norm(ag) > tol * gn)
    throw SolvabilityError("A1: datum has a nonzero cylindrical average (relative " +
                           std::to_string(weighted_norm(ag) / gn) + ")");
  const Distribution kg = apply_ring_operator(k.grid().ring_gyration_pinv(), g);
  const double miss = weighted_norm(gyration(kg) - (g - ag));
  if (miss > tol * gn)
    throw SolvabilityError("A1: datum carries the Nyquist angular mode, which is outside the range of G "
                           "(relative " + std::to_string(miss / gn) + "); use an odd n_angle");
  return kg - divide(cyl_average(hadamard(k.nu(), kg)), k.nu_bar());
}

struct QetaSolver::Impl {
  Eigen::PartialPivLU<Eigen::MatrixXd> bordered;
  Eigen::VectorXd scale;
  std::unique_ptr<CharacteristicsInverse> sinv;
  Eigen::VectorXd sinv_m;
  double w_sinv_m = 0.0;
  bool rank_one = false;
};

QetaSolver::QetaSolver(const CollisionKernel& k, double eta, SolveMethod method, CellOptions options,
                       bool adjoint)
    : kernel_(&k), eta_(eta), method_(method), options_(options), adjoint_(adjoint),
      impl_(std::make_unique<Impl>()) {
  require_positive_eta(eta);
  const auto& g = k.grid();
  if (method == SolveMethod::fixed_point || k.storage() == KernelStorage::constant) {
    impl_->sinv = std::make_unique<CharacteristicsInverse>(k, eta, adjoint);
    if (method == SolveMethod::direct) {
      impl_->rank_one = true;
      const Distribution sm = impl_->sinv->apply(maxwellian(k.grid_ptr()));
      impl_->sinv_m = sm.values();
      impl_->w_sinv_m = g.weights().dot(impl_->sinv_m);
    }
    return;
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n > 8192)
    throw ValidationError("direct cell solve: " + std::to_string(n) +
                          " nodes exceed the dense factorization limit (8192); use fixed_point");
  // same symmetric scaling as the ring solve: f = sqrt(M / w) y; the ring
  // gyration blocks commute with it since M and w are ring constants
  impl_->scale = g.maxwellian_values().cwiseQuotient(g.weights()).cwiseSqrt();
  const Eigen::VectorXd root = g.maxwellian_values().cwiseProduct(g.weights()).cwiseSqrt();
  Eigen::MatrixXd a(n + 1, n + 1);
  a.topLeftCorner(n, n) = -(impl_->scale.cwiseInverse().asDiagonal() * qeta_matrix(k, eta, adjoint) *
                           impl_->scale.asDiagonal());
  a.block(0, n, n, 1) = root;
  a.block(n, 0, 1, n) = root.transpose();
  a(n, n) = 0.0;
  impl_->bordered.compute(a);
}

QetaSolver::~QetaSolver() = default;
QetaSolver::QetaSolver(QetaSolver&&) noexcept = default;

Distribution QetaSolver::solve(const Distribution& g, SolveInfo* info) const {
  const auto& k = *kernel_;
  require_same(k, g);
  const auto& grid = k.grid();
  const double gn = weighted_norm(g);
  if (std::abs(mass(g)) > options_.tol_zero * gn)
    throw SolvabilityError("cell problem: right-hand side has nonzero mass (" + std::to_string(mass(g)) + ")");
  SolveInfo local;
  if (gn == 0.0) {
    if (info) *info = local;
    return Distribution::zeros(g.grid_ptr());
  }

  Distribution f = Distribution::zeros(g.grid_ptr());
  if (method_ == SolveMethod::direct && impl_->rank_one) {
    const Distribution y = impl_->sinv->apply(g);
    const double lambda = grid.weights().dot(y.values()) / impl_->w_sinv_m;
    f = Distribution(g.grid_ptr(), y.values() - lambda * impl_->sinv_m);
  } else if (method_ == SolveMethod::direct) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = g.values().cwiseQuotient(impl_->scale);
    rhs(n) = 0.0;
    const Eigen::VectorXd y = impl_->bordered.solve(rhs);
    f = Distribution(g.grid_ptr(), y.head(n).cwiseProduct(impl_->scale));
  } else {
    double prev = 0.0;
    for (int it = 1;; ++it) {
      Distribution next = remove_mass(impl_->sinv->apply(apply_gain(k, f) + g));
      const double upd = weighted_norm(next - f);
      const double size = weighted_norm(next);
      if (prev > 0.0) local.contraction = upd / prev;
      prev = upd;
      f = std::move(next);
      local.iterations = it;
      if (size == 0.0 || upd <= options_.fp_tol * size) break;
      if (it >= options_.max_iter)
        throw ConvergenceError("fixed-point cell solve did not converge in " + std::to_string(it) +
                                   " iterations (eta " + std::to_string(eta_) + ", contraction estimate " +
                                   std::to_string(local.contraction) + ")",
                               local.contraction);
    }
  }
  f = remove_mass(std::move(f));
  const Distribution op = adjoint_ ? apply_Qeta_adjoint(k, f, eta_) : apply_Qeta(k, f, eta_);
  local.residual = weighted_norm(op + g) / gn;
  local.stability = weighted_norm(f) / gn;
  if (info) *info = local;
  return f;
}

Distribution solve_qeta_cell(const CollisionKernel& k, const Distribution& g, double eta, SolveMethod method,
                             const CellOptions& options, SolveInfo* info) {
  return QetaSolver(k, eta, method, options).solve(g, info);
}

CellSolution solve_chi_eta(const CollisionKernel& k, double eta, SolveMethod method, const CellOptions& options,
                           bool adjoint) {
  require_positive_eta(eta);
  const QetaSolver solver(k, eta, method, options, adjoint);
  const auto& grid = k.grid_ptr();
  const double inv_eta2 = 1.0 / (eta * eta);
  std::array<Distribution, 3> rhs{inv_eta2 * v_times_maxwellian(grid, 0), inv_eta2 * v_times_maxwellian(grid, 1),
                                  v_times_maxwellian(grid, 2)};
  std::array<Distribution, 3> x{rhs[0], rhs[1], rhs[2]};
  std::array<SolveInfo, 3> info{};
  parallel_for(3, [&](std::size_t c) { x[c] = solver.solve(rhs[c], &info[c]); });

  CellSolution out{{x[0], x[1]}, x[2]};
  out.eta = eta;
  out.method = method;
  out.adjoint = adjoint;
  for (int c = 0; c < 3; ++c) {
    out.residual_norm = std::max(out.residual_norm, info[c].residual);
    const double xn = weighted_norm(x[c]);
    out.mass_defect = std::max(out.mass_defect, xn > 0.0 ? std::abs(mass(x[c])) / xn : std::abs(mass(x[c])));
  }
  const double e2 = eta * eta;
  const double xz = weighted_norm(x[2]);
  const double xp = e2 * std::hypot(weighted_norm(x[0]), weighted_norm(x[1]));
  double vm2 = 0.0;
  for (int c = 0; c < 3; ++c) vm2 += std::pow(weighted_norm(v_times_maxwellian(grid, c)), 2);
  out.bound_lhs = std::hypot(xz, xp);
  out.bound_rhs = std::sqrt(vm2) / (k.alpha1() * k.grid().maxwellian_mass());
  out.bound_ok = out.bound_lhs <= out.bound_rhs * (1.0 + 1e-12);
  return out;
}

Distribution solve_qbarbar(const CollisionKernel& k, const Distribution& g, const CellOptions& options,
                           SolveInfo* info) {
  require_same(k, g);
  const double gn = weighted_norm(g);
  if (gn <= options.norm_floor) return Distribution::zeros(g.grid_ptr());
  if (weighted_norm(g - cyl_average(g)) > options.tol_zero * gn)
    throw ValidationError("solve_qbarbar: datum is not cylindrically symmetric");
  if (std::abs(mass(g)) > options.tol_zero * gn)
    throw SolvabilityError("solve_qbarbar: datum has nonzero mass (" + std::to_string(mass(g)) + ")");
  if (gn == 0.0) return Distribution::zeros(g.grid_ptr());
  Distribution f = ring_solve(k, g);
  if (info) {
    info->residual = weighted_norm(apply_Qbarbar(k, f) - g) / gn;
    info->stability = weighted_norm(f) / gn;
  }
  return f;
}

Distribution solve_qbar(const CollisionKernel& k, const Distribution& g, const CellOptions& options,
                        SolveInfo* info) {
  require_same(k, g);
  const double gn = weighted_norm(g);
  if (gn <= options.norm_floor) return Distribution::zeros(g.grid_ptr());
  const double cond = k.grid().weights().dot(k.nu().values().cwiseProduct(g.values()).cwiseQuotient(k.nu_bar().values()));
  if (std::abs(cond) > options.tol_zero * gn)
    throw SolvabilityError("solve_qbar: int nu g / nu_bar = " + std::to_string(cond) +
                           " violates the solvability condition");
  if (gn == 0.0) return Distribution::zeros(g.grid_ptr());
  const Distribution gbar = cyl_average(g);
  const Distribution shift = divide(gbar - g, k.nu_bar());
  const Distribution fbar = ring_solve(k, gbar - apply_gain_bar(k, shift));
  Distribution f = remove_mass(fbar + shift);
  if (info) {
    info->residual = weighted_norm(apply_Qbar(k, f) - g) / gn;
    info->stability = weighted_norm(f) / gn;
  }
  return f;
}

Distribution solve_gyration_system(const CollisionKernel& k, const Distribution& g, const Distribution& h,
                                   const CellOptions& options) {
  require_same(k, g);
  require_same(k, h);
  const double hn = weighted_norm(h);
  const bool h_zero = hn <= options.norm_floor;
  if (!h_zero && weighted_norm(h - cyl_average(h)) > options.tol_zero * hn)
    throw ValidationError("gyration system: h is not cylindrically symmetric");
  if (!h_zero && std::abs(mass(h)) > options.tol_zero * hn)
    throw SolvabilityError("gyration system: h has nonzero mass");
  const Distribution a1 = average_A1(k, g, options);
  const Distribution rhs = h_zero ? -hadamard(k.nu_bar(), a1) : h - hadamard(k.nu_bar(), a1);
  return solve_qbar(k, rhs, options);
}

ExpansionTerms compute_expansion(const CollisionKernel& k, const CellOptions& opts) {
  const auto& grid = k.grid_ptr();
  const Distribution vz = v_times_maxwellian(grid, 2);
  // the order-1 data are differences of O(1) quantities; cancellation to
  // roundoff means the term vanishes
  CellOptions options = opts;
  options.norm_floor = std::max(options.norm_floor, 1e-12 * weighted_norm(vz));
  const Distribution zero = Distribution::zeros(grid);
  Distribution xz0 = solve_qbarbar(k, -vz, options);
  Distribution xz1 = solve_gyration_system(k, apply_Q(k, xz0) + vz, zero, options);
  std::array<Distribution, 2> p0{zero, zero}, p1{zero, zero};
  for (int c = 0; c < 2; ++c) {
    p0[c] = solve_gyration_system(k, v_times_maxwellian(grid, c), zero, options);
    p1[c] = solve_gyration_system(k, apply_Q(k, p0[c]), zero, options);
  }
  return {std::move(xz0), std::move(xz1), std::move(p0), std::move(p1)};
}

PolynomialEnvelope polynomial_envelope(const Distribution& x) {
  const auto& g = x.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd ratio(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = g.node(static_cast<std::size_t>(i));
    a(i, 0) = 1.0;
    a(i, 1) = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    ratio(i) = std::abs(x[static_cast<std::size_t>(i)]) / g.maxwellian_values()(i);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(ratio);
  const double lift = std::max(0.0, (ratio - a * c).maxCoeff());
  return {c(0) + lift, c(1)};
}

}  // namespace gyrodiff
