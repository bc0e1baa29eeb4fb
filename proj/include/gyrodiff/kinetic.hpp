#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gyrodiff/collision.hpp"
#include "gyrodiff/grid.hpp"

namespace gyrodiff {

enum class Geometry { homogeneous, slab_z, perp_xy };
Geometry parse_geometry(const std::string& name);
std::string to_string(Geometry g);

// Periodic cell-centred spatial mesh. Inactive directions have one cell.
struct SpaceGrid {
  Geometry geometry = Geometry::homogeneous;
  int nx = 1, ny = 1, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;

  static SpaceGrid make(Geometry g, int n, double length);
  int cells() const { return nx * ny * nz; }
  int index(int ix, int iy, int iz) const { return (iz * ny + iy) * nx + ix; }
  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double dz() const { return lz / nz; }
  double cell_volume() const;
  Vec3 center(int c) const;
};

// Potential V(t, r) and E = -grad V. "uniform" keeps E constant (V = -E.r
// relative to the domain centre), "cosine" is V = a (1 + m sin(w t)) cos(k.r).
struct FieldSpec {
  std::string kind = "zero";
  Vec3 e{0.0, 0.0, 0.0};
  double amplitude = 0.0;
  Vec3 k{0.0, 0.0, 0.0};
  double omega = 0.0;
  double modulation = 0.0;

  static FieldSpec zero() { return {}; }
  static FieldSpec uniform(const Vec3& e);
  // k = 2 pi mode / L per active direction.
  static FieldSpec cosine(double amplitude, const std::array<int, 3>& mode, const SpaceGrid& space,
                          double omega = 0.0, double modulation = 0.0);

  double potential(double t, const Vec3& r, const SpaceGrid& space) const;
  Vec3 field(double t, const Vec3& r) const;
  bool time_dependent() const { return kind == "cosine" && modulation != 0.0 && omega != 0.0; }
  bool is_zero() const;
  // Throws when the field has components the geometry cannot carry.
  void check_geometry(const SpaceGrid& space) const;
};

// One velocity distribution per spatial cell, stored as an N x cells matrix.
struct PhaseField {
  GridPtr vgrid;
  SpaceGrid space;
  Eigen::MatrixXd f;
  double time = 0.0;

  static PhaseField from_density(const GridPtr& vgrid, const SpaceGrid& space,
                                 const std::function<double(const Vec3&)>& rho);
  Distribution cell(int c) const;
  double total_mass() const;
};

struct Moments {
  Eigen::VectorXd rho, jz, jx, jy;
};
Moments moments(const PhaseField& field, double eps, double eta);
// sum over cells of volume * int f^2 / (M exp(-V)) dv.
double entropy(const PhaseField& field, const FieldSpec& spec);

// Strang step V(dt/2) X(dt) V(dt/2). X shifts every velocity node exactly in
// space (trigonometric interpolation, periodic). V propagates
// f' = Q f / eps^2 - G f / (eps eta)^2 - E_perp . grad_vperp f / (eps eta)
//      - E_z d_vz f / eps
// exactly in time per cell: closed form for sigma = 1/tau with E = 0, a
// cached matrix exponential otherwise.
class KineticStepper {
 public:
  KineticStepper(const CollisionKernel& kernel, const SpaceGrid& space, FieldSpec spec, double eps, double eta,
                 double dt);
  ~KineticStepper();

  void step(PhaseField& field) const;
  double dt() const { return dt_; }
  // Default step 0.25 min(h eps / v_max, h eps eta / v_max) over the active
  // directions; the exact substeps do not require it for stability.
  static double advective_dt(const VelocityGrid& vgrid, const SpaceGrid& space, double eps, double eta);

 private:
  struct Cache;
  void velocity_half(PhaseField& field, double t) const;
  void transport(PhaseField& field) const;

  const CollisionKernel* kernel_;
  SpaceGrid space_;
  FieldSpec spec_;
  double eps_, eta_, dt_;
  std::unique_ptr<Cache> cache_;
};

PhaseField step(const PhaseField& field, const CollisionKernel& kernel, const FieldSpec& spec, double eps,
                double eta, double dt);

// d/dv_x, d/dv_y, d/dv_z of f on the velocity grid (written through f / M,
// polar chain rule, spectral in theta, Lagrange in r and v_z).
std::array<Eigen::MatrixXd, 3> velocity_gradient_matrices(const VelocityGrid& g);

struct DensityProfile {
  std::string kind = "gaussian";  // gaussian | cosine | uniform | zero
  double base = 0.0;
  double amplitude = 1.0;
  double width = 0.5;
  int mode = 1;
  double operator()(const Vec3& r, const SpaceGrid& space) const;
};

struct KineticRunSpec {
  SpaceGrid space;
  FieldSpec field;
  DensityProfile initial;
  double eps = 0.1;
  double eta = 0.3;
  double t_end = 0.5;
  double dt = 0.0;  // 0: advective default
  std::vector<double> snapshot_times;
  bool dump_full = false;
};

struct KineticResult {
  std::vector<double> times;
  std::vector<Moments> snapshots;
  std::vector<double> entropy;
  PhaseField final_field;
  int steps = 0;
  double dt = 0.0;
  double max_mass_drift = 0.0;
  // time series of total (J_x, J_y) / mass at every step
  std::vector<double> step_times;
  std::vector<std::array<double, 2>> mean_current;
};

// Writes snapshot_<k>.csv (and field_<k>.bin + .json) into out_dir unless it
// is empty.
KineticResult run_kinetic(const KineticRunSpec& spec, const CollisionKernel& kernel, const std::string& out_dir = "");

void write_snapshot_csv(const std::string& path, const SpaceGrid& space, const Moments& m);

}  // namespace gyrodiff
