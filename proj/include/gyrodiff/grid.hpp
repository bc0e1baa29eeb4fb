#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gyrodiff {

using Vec3 = std::array<double, 3>;

struct GridParams {
  int n_radial = 8;
  int n_angle = 16;
  int n_parallel = 16;
  double v_max_perp = 6.0;
  double v_max_par = 6.0;
};

class VelocityGrid;
using GridPtr = std::shared_ptr<const VelocityGrid>;

// Cylindrical velocity mesh: Gauss radial nodes for the weight r exp(-r^2/2)
// on (0, v_max_perp), uniform angles theta_k = 2 pi k / n_angle, Gauss
// parallel nodes for exp(-v_z^2/2) on (-v_max_par, v_max_par). Nodes are
// ordered ring by ring; a ring is the set of n_angle nodes sharing (r, v_z),
// index = (ir * n_parallel + iz) * n_angle + ia.
class VelocityGrid {
 public:
  static GridPtr build(const GridParams& params);

  const GridParams& params() const { return params_; }
  int n_radial() const { return params_.n_radial; }
  int n_angle() const { return params_.n_angle; }
  int n_parallel() const { return params_.n_parallel; }
  int n_rings() const { return params_.n_radial * params_.n_parallel; }
  std::size_t size() const { return nodes_.size(); }

  std::size_t index(int ir, int iz, int ia) const {
    return (static_cast<std::size_t>(ir) * params_.n_parallel + iz) * params_.n_angle + ia;
  }
  int ring_of(std::size_t i) const { return static_cast<int>(i / params_.n_angle); }

  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& maxwellian_values() const { return maxwellian_; }

  double radius(int ir) const { return radii_[ir]; }
  double parallel(int iz) const { return parallels_[iz]; }
  double angle(int ia) const;
  double angle_step() const;

  // Sum of w * M over the grid, and 1 minus it.
  double maxwellian_mass() const { return maxwellian_mass_; }
  double deficit() const { return 1.0 - maxwellian_mass_; }
  // Declared bound on the deficit: the exact truncation loss of the domain
  // plus rounding slack.
  double tol_mass() const { return tol_mass_; }

  // Ring-level operators (n_angle x n_angle).
  const Eigen::MatrixXd& ring_gyration() const { return gyration_; }
  const Eigen::MatrixXd& ring_gyration_pinv() const { return gyration_pinv_; }

  // Lagrange differentiation in r along a ray and in v_z along a line
  // (row-major, n x n).
  const std::vector<double>& radial_derivative() const { return radial_diff_; }
  const std::vector<double>& parallel_derivative() const { return parallel_diff_; }

 private:
  VelocityGrid() = default;

  GridParams params_;
  std::vector<double> radii_;
  std::vector<double> parallels_;
  std::vector<Vec3> nodes_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd maxwellian_;
  double maxwellian_mass_ = 0.0;
  double tol_mass_ = 0.0;
  Eigen::MatrixXd gyration_;
  Eigen::MatrixXd gyration_pinv_;
  std::vector<double> radial_diff_;
  std::vector<double> parallel_diff_;
};

// A scalar field on a velocity grid (stores f itself, not f / M).
class Distribution {
 public:
  Distribution(GridPtr grid, Eigen::VectorXd values);

  static Distribution zeros(const GridPtr& grid);
  static Distribution from_function(const GridPtr& grid, const std::function<double(const Vec3&)>& fn);

  const VelocityGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  bool same_grid(const Distribution& other) const { return grid_ == other.grid_; }

  Distribution& operator+=(const Distribution& other);
  Distribution& operator-=(const Distribution& other);
  Distribution& operator*=(double s);

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

Distribution operator+(Distribution a, const Distribution& b);
Distribution operator-(Distribution a, const Distribution& b);
Distribution operator-(Distribution a);
Distribution operator*(double s, Distribution a);
Distribution operator*(Distribution a, double s);
// Pointwise product.
Distribution hadamard(const Distribution& a, const Distribution& b);

GridPtr build_grid(int n_radial, int n_angle, int n_parallel, double v_max_perp, double v_max_par);

// (2 pi)^(-3/2) exp(-|v|^2 / 2) at the nodes.
Distribution maxwellian(const GridPtr& grid);

// result(v) = f(R(tau) v). Grid-angle multiples are index permutations,
// other angles use trigonometric interpolation in theta.
Distribution rotate(const Distribution& f, double tau);
// Mean over the grid angles of each ring.
Distribution cyl_average(const Distribution& f);
// (1/2pi) int_0^tau f(R(s) v) ds, tau in [0, 2pi].
Distribution partial_average(const Distribution& f, double tau);
// (v x e_z) . grad_v f as a spectral theta-derivative.
Distribution gyration(const Distribution& f);
// Applies an n_angle x n_angle operator to every ring.
Distribution apply_ring_operator(const Eigen::MatrixXd& op, const Distribution& f);

double weighted_inner(const Distribution& f, const Distribution& g);
double weighted_norm(const Distribution& f);
double mass(const Distribution& f);
Vec3 flux(const Distribution& f);

// CSV with header v_x,v_y,v_z,weight,value in node order.
void write_csv(const std::string& path, const Distribution& f);
Distribution read_csv(const std::string& path, const GridPtr& grid);

}  // namespace gyrodiff
