#include "gyrodiff/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "gyrodiff/angular.hpp"
#include "gyrodiff/errors.hpp"
#include "gyrodiff/quadrature.hpp"

namespace gyrodiff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kMaxwellNorm = std::pow(kTwoPi, -1.5);

void require_same_grid(const Distribution& a, const Distribution& b) {
  if (!a.same_grid(b)) throw GridMismatch();
}

Eigen::Map<const Eigen::MatrixXd> as_rings(const Distribution& f) {
  const auto& g = f.grid();
  return {f.values().data(), g.n_angle(), g.n_rings()};
}

}  // namespace

GridPtr VelocityGrid::build(const GridParams& p) {
  if (p.n_radial < 2 || p.n_angle < 2 || p.n_parallel < 2)
    throw ValidationError("build_grid: n_radial, n_angle and n_parallel must be >= 2");
  if (!(p.v_max_perp > 0.0) || !(p.v_max_par > 0.0))
    throw ValidationError("build_grid: v_max_perp and v_max_par must be > 0");

  auto grid = std::shared_ptr<VelocityGrid>(new VelocityGrid());
  grid->params_ = p;

  const double s_max = 0.5 * p.v_max_perp * p.v_max_perp;
  const auto radial = quadrature::truncated_exponential(p.n_radial, s_max);
  const auto axial = quadrature::truncated_gaussian(p.n_parallel, p.v_max_par);
  const double dtheta = kTwoPi / p.n_angle;

  grid->radii_.resize(p.n_radial);
  std::vector<double> radial_w(p.n_radial);
  for (int k = 0; k < p.n_radial; ++k) {
    const double s = radial.nodes[k];
    grid->radii_[k] = std::sqrt(2.0 * s);
    // r dr = ds, and the rule carries the factor exp(-s)
    radial_w[k] = radial.weights[k] * std::exp(s) * dtheta;
  }
  grid->parallels_ = axial.nodes;
  std::vector<double> axial_w(p.n_parallel);
  for (int l = 0; l < p.n_parallel; ++l) {
    const double z = axial.nodes[l];
    axial_w[l] = axial.weights[l] * std::exp(0.5 * z * z);
  }

  const std::size_t n = static_cast<std::size_t>(p.n_radial) * p.n_angle * p.n_parallel;
  grid->nodes_.resize(n);
  grid->weights_.resize(static_cast<Eigen::Index>(n));
  grid->maxwellian_.resize(static_cast<Eigen::Index>(n));
  for (int ir = 0; ir < p.n_radial; ++ir) {
    for (int iz = 0; iz < p.n_parallel; ++iz) {
      for (int ia = 0; ia < p.n_angle; ++ia) {
        const std::size_t i = grid->index(ir, iz, ia);
        const double r = grid->radii_[ir];
        const double th = ia * dtheta;
        const double z = grid->parallels_[iz];
        grid->nodes_[i] = {r * std::cos(th), r * std::sin(th), z};
        const auto ii = static_cast<Eigen::Index>(i);
        grid->weights_(ii) = radial_w[ir] * axial_w[iz];
        grid->maxwellian_(ii) = kMaxwellNorm * std::exp(-0.5 * (r * r + z * z));
        if (!(grid->weights_(ii) > 0.0))
          throw ValidationError("build_grid: non-positive quadrature weight");
        if (grid->maxwellian_(ii) < 1e-300)
          throw ValidationError("build_grid: Maxwellian underflows at the outer nodes; reduce v_max");
      }
    }
  }
  grid->maxwellian_mass_ = grid->weights_.dot(grid->maxwellian_);
  const double exact_mass =
      (1.0 - std::exp(-s_max)) * std::erf(p.v_max_par / std::numbers::sqrt2);
  grid->tol_mass_ = (1.0 - exact_mass) + 1e-12;

  grid->gyration_ = angular::gyration(p.n_angle);
  grid->gyration_pinv_ = angular::gyration_pseudo_inverse(p.n_angle);
  grid->radial_diff_ = quadrature::lagrange_differentiation(grid->radii_);
  grid->parallel_diff_ = quadrature::lagrange_differentiation(grid->parallels_);
  return grid;
}

double VelocityGrid::angle(int ia) const { return ia * angle_step(); }
double VelocityGrid::angle_step() const { return kTwoPi / params_.n_angle; }

GridPtr build_grid(int n_radial, int n_angle, int n_parallel, double v_max_perp, double v_max_par) {
  return VelocityGrid::build({n_radial, n_angle, n_parallel, v_max_perp, v_max_par});
}

Distribution::Distribution(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("Distribution: null grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw ValidationError("Distribution: value count does not match the grid");
  if (!values_.allFinite()) throw ValidationError("Distribution: non-finite values");
}

Distribution Distribution::zeros(const GridPtr& grid) {
  return {grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size()))};
}

Distribution Distribution::from_function(const GridPtr& grid,
                                         const std::function<double(const Vec3&)>& fn) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
  for (std::size_t i = 0; i < grid->size(); ++i) v(static_cast<Eigen::Index>(i)) = fn(grid->node(i));
  return {grid, std::move(v)};
}

Distribution& Distribution::operator+=(const Distribution& other) {
  require_same_grid(*this, other);
  values_ += other.values_;
  return *this;
}

Distribution& Distribution::operator-=(const Distribution& other) {
  require_same_grid(*this, other);
  values_ -= other.values_;
  return *this;
}

Distribution& Distribution::operator*=(double s) {
  values_ *= s;
  return *this;
}

Distribution operator+(Distribution a, const Distribution& b) { return a += b; }
Distribution operator-(Distribution a, const Distribution& b) { return a -= b; }
Distribution operator-(Distribution a) { return a *= -1.0; }
Distribution operator*(double s, Distribution a) { return a *= s; }
Distribution operator*(Distribution a, double s) { return a *= s; }

Distribution hadamard(const Distribution& a, const Distribution& b) {
  require_same_grid(a, b);
  return {a.grid_ptr(), a.values().cwiseProduct(b.values())};
}

Distribution maxwellian(const GridPtr& grid) { return {grid, grid->maxwellian_values()}; }

Distribution apply_ring_operator(const Eigen::MatrixXd& op, const Distribution& f) {
  const auto& g = f.grid();
  if (op.rows() != g.n_angle() || op.cols() != g.n_angle())
    throw ValidationError("apply_ring_operator: operator size does not match n_angle");
  Eigen::VectorXd out(f.values().size());
  Eigen::Map<Eigen::MatrixXd>(out.data(), g.n_angle(), g.n_rings()).noalias() = op * as_rings(f);
  return {f.grid_ptr(), std::move(out)};
}

Distribution rotate(const Distribution& f, double tau) {
  return apply_ring_operator(angular::rotation(f.grid().n_angle(), tau), f);
}

Distribution cyl_average(const Distribution& f) {
  const auto& g = f.grid();
  const auto rings = as_rings(f);
  Eigen::VectorXd out(f.values().size());
  Eigen::Map<Eigen::MatrixXd> dst(out.data(), g.n_angle(), g.n_rings());
  const Eigen::RowVectorXd means = rings.colwise().mean();
  dst = means.replicate(g.n_angle(), 1);
  return {f.grid_ptr(), std::move(out)};
}

Distribution partial_average(const Distribution& f, double tau) {
  if (!(tau >= 0.0 && tau <= kTwoPi))
    throw ValidationError("partial_average: tau must lie in [0, 2pi]");
  if (tau == kTwoPi) return cyl_average(f);
  return apply_ring_operator(angular::partial_average(f.grid().n_angle(), tau), f);
}

Distribution gyration(const Distribution& f) {
  return apply_ring_operator(f.grid().ring_gyration(), f);
}

double weighted_inner(const Distribution& f, const Distribution& g) {
  require_same_grid(f, g);
  const auto& grid = f.grid();
  return (grid.weights().array() * f.values().array() * g.values().array() /
          grid.maxwellian_values().array())
      .sum();
}

double weighted_norm(const Distribution& f) { return std::sqrt(weighted_inner(f, f)); }

double mass(const Distribution& f) { return f.grid().weights().dot(f.values()); }

Vec3 flux(const Distribution& f) {
  const auto& g = f.grid();
  Vec3 out{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double wf = g.weight(i) * f[i];
    const auto& v = g.node(i);
    out[0] += wf * v[0];
    out[1] += wf * v[1];
    out[2] += wf * v[2];
  }
  return out;
}

void write_csv(const std::string& path, const Distribution& f) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "v_x,v_y,v_z,weight,value\n";
  out << std::setprecision(17);
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& v = g.node(i);
    out << v[0] << ',' << v[1] << ',' << v[2] << ',' << g.weight(i) << ',' << f[i] << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

Distribution read_csv(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("v_x,v_y,v_z,weight,value", 0) != 0)
    throw ValidationError(path + ": missing header v_x,v_y,v_z,weight,value");
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid->size()));
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= grid->size()) throw ValidationError(path + ": more rows than grid nodes");
    std::stringstream ss(line);
    std::array<double, 5> cols{};
    for (auto& c : cols) {
      std::string cell;
      if (!std::getline(ss, cell, ',')) throw ValidationError(path + ": short row " + std::to_string(row));
      c = std::stod(cell);
    }
    const auto& v = grid->node(row);
    for (int k = 0; k < 3; ++k)
      if (std::abs(cols[k] - v[k]) > 1e-9 * (1.0 + std::abs(v[k])))
        throw ValidationError(path + ": node coordinates do not match the grid at row " +
                              std::to_string(row));
    values(static_cast<Eigen::Index>(row)) = cols[4];
    ++row;
  }
  if (row != grid->size()) throw ValidationError(path + ": fewer rows than grid nodes");
  return {grid, std::move(values)};
}

}  // namespace gyrodiff
