#include "gyrodiff/macro.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "gyrodiff/errors.hpp"
#include "gyrodiff/parallel.hpp"

namespace gyrodiff {

namespace {

// active directions of a geometry: 0 = x, 1 = y, 2 = z
std::vector<int> active_dirs(const SpaceGrid& s) {
  if (s.geometry == Geometry::slab_z) return {2};
  if (s.geometry == Geometry::perp_xy) return {0, 1};
  return {};
}

double spacing(const SpaceGrid& s, int j) { return j == 0 ? s.dx() : j == 1 ? s.dy() : s.dz(); }

int neighbour(const SpaceGrid& s, int c, int j, int step) {
  int i[3] = {c % s.nx, (c / s.nx) % s.ny, c / (s.nx * s.ny)};
  const int n[3] = {s.nx, s.ny, s.nz};
  i[j] = ((i[j] + step) % n[j] + n[j]) % n[j];
  return s.index(i[0], i[1], i[2]);
}

void require_spatial(const SpaceGrid& s) {
  if (s.geometry == Geometry::homogeneous)
    throw ValidationError("macro: geometry must be slab_z or perp_xy (a homogeneous density does not evolve)");
}

}  // namespace

MacroField MacroField::from_density(const SpaceGrid& space, const DensityProfile& profile) {
  MacroField m{space, Eigen::VectorXd(space.cells()), 0.0};
  for (int c = 0; c < space.cells(); ++c) m.rho(c) = profile(space.center(c), space);
  if (!m.rho.allFinite()) throw ValidationError("initial density is not finite");
  return m;
}

double MacroField::total_mass() const { return rho.sum() * space.cell_volume(); }

MacroEquation parse_equation(const std::string& name) {
  if (name == "drift_diffusion") return MacroEquation::drift_diffusion;
  if (name == "guiding_center") return MacroEquation::guiding_center;
  throw ValidationError("equation: expected drift_diffusion or guiding_center, got \"" + name + "\"");
}

std::string to_string(MacroEquation e) {
  return e == MacroEquation::drift_diffusion ? "drift_diffusion" : "guiding_center";
}

// Per active direction j, quantities on the face between cell c and its +j
// neighbour.
struct MacroStepper::Faces {
  std::vector<int> dirs;
  std::array<Eigen::VectorXd, 3> dv;  // V(right) - V(left)
  std::array<Eigen::VectorXd, 3> u;   // advective velocity (D_as E)_j
  std::array<std::vector<Vec3>, 3> e;
};

MacroStepper::MacroStepper(const SpaceGrid& space, const Eigen::Matrix3d& d, FieldSpec spec, double dt,
                           MacroOptions options)
    : space_(space), d_(d), spec_(std::move(spec)), dt_(dt), options_(options) {
  require_spatial(space_);
  if (!d.allFinite()) throw ValidationError("macro: diffusion tensor is not finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  spec_.check_geometry(space_);
  for (int j : active_dirs(space_))
    if (d(j, j) < 0.0) throw ValidationError("macro: diffusion tensor has a negative diagonal entry");
}

MacroStepper::Faces MacroStepper::faces(double t) const {
  Faces f;
  f.dirs = active_dirs(space_);
  const int n = space_.cells();
  const Eigen::Matrix3d as = 0.5 * (d_ - d_.transpose());
  for (int j : f.dirs) {
    const double h = spacing(space_, j);
    f.dv[j].resize(n);
    f.u[j].resize(n);
    f.e[j].resize(n);
    for (int c = 0; c < n; ++c) {
      Vec3 r = space_.center(c);
      r[j] += 0.5 * h;
      const Vec3 e = spec_.field(t, r);
      f.e[j][c] = e;
      if (spec_.kind == "uniform") {
        f.dv[j](c) = -e[j] * h;  // V = -E.r is not periodic; use its increment
      } else {
        Vec3 rb = space_.center(c);
        rb[j] += h;
        f.dv[j](c) = spec_.potential(t, rb, space_) - spec_.potential(t, space_.center(c), space_);
      }
      double u = 0.0;
      for (int k : f.dirs) u += as(j, k) * e[k];
      f.u[j](c) = u;
    }
  }
  return f;
}

double MacroStepper::stable_dt(double t) const {
  const Faces f = faces(t);
  double worst = 0.0;
  for (int c = 0; c < space_.cells(); ++c) {
    double out = 0.0;
    for (int j : f.dirs) {
      const double h = spacing(space_, j);
      const int p = neighbour(space_, c, j, -1);
      if (!(options_.implicit_z && j == 2))
        out += d_(j, j) / (h * h) * (std::exp(-0.5 * f.dv[j](c)) + std::exp(0.5 * f.dv[j](p)));
      out += (std::max(f.u[j](c), 0.0) - std::min(f.u[j](p), 0.0)) / h;
    }
    worst = std::max(worst, out);
  }
  return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

void MacroStepper::step(MacroField& field) const {
  if (field.space.geometry != space_.geometry || field.space.cells() != space_.cells())
    throw ValidationError("macro step: field geometry does not match the stepper");
  const double t = field.time;
  const Faces f = faces(t);
  const double bound = stable_dt(t);
  if (dt_ > bound * (1.0 + 1e-12))
    throw StabilityError("macro step: dt " + std::to_string(dt_) + " exceeds the positivity bound " +
                         std::to_string(bound));
  const int n = space_.cells();
  const Eigen::Matrix3d sym = 0.5 * (d_ + d_.transpose());
  const Eigen::VectorXd& rho = field.rho;

  // flux[j](c): flux through the +j face of cell c, explicit part
  std::array<Eigen::VectorXd, 3> flux;
  for (int j : f.dirs) {
    const double h = spacing(space_, j);
    flux[j] = Eigen::VectorXd::Zero(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ci) {
      const int c = static_cast<int>(ci);
      const int b = neighbour(space_, c, j, +1);
      double q = 0.0;
      if (!(options_.implicit_z && j == 2)) {
        const double dv = f.dv[j](c);
        q -= d_(j, j) / h * (rho(b) * std::exp(0.5 * dv) - rho(c) * std::exp(-0.5 * dv));
      }
      for (int k : f.dirs) {
        if (k == j || sym(j, k) == 0.0) continue;
        const double hk = spacing(space_, k);
        const double grad = (rho(neighbour(space_, c, k, 1)) + rho(neighbour(space_, b, k, 1)) -
                             rho(neighbour(space_, c, k, -1)) - rho(neighbour(space_, b, k, -1))) /
                            (4.0 * hk);
        q -= sym(j, k) * (grad - 0.5 * (rho(c) + rho(b)) * f.e[j][c][k]);
      }
      const double u = f.u[j](c);
      q += u > 0.0 ? u * rho(c) : u * rho(b);
      flux[j](c) = q;
    });
  }
  Eigen::VectorXd next = rho;
  for (int j : f.dirs) {
    const double h = spacing(space_, j);
    for (int c = 0; c < n; ++c) next(c) -= dt_ / h * (flux[j](c) - flux[j](neighbour(space_, c, j, -1)));
  }

  if (options_.implicit_z && space_.geometry == Geometry::slab_z) {
    // (I - dt A) rho = next, A the exponentially fitted z diffusion
    const double h = space_.dz(), dz = d_(2, 2);
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < n; ++c) {
      const int b = neighbour(space_, c, 2, 1), p = neighbour(space_, c, 2, -1);
      const double k = dt_ * dz / (h * h);
      const double dvr = f.dv[2](c), dvl = f.dv[2](p);
      trip.emplace_back(c, c, 1.0 + k * (std::exp(-0.5 * dvr) + std::exp(0.5 * dvl)));
      trip.emplace_back(c, b, -k * std::exp(0.5 * dvr));
      trip.emplace_back(c, p, -k * std::exp(-0.5 * dvl));
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
    if (lu.info() != Eigen::Success) throw StabilityError("macro step: implicit z system is singular");
    next = lu.solve(next);
  }
  if (!next.allFinite()) throw StabilityError("macro step produced non-finite values");
  field.rho = std::move(next);
  field.time = t + dt_;
}

MacroField step_drift_diffusion(const MacroField& rho, const Eigen::Matrix3d& d, const FieldSpec& spec, double dt,
                                MacroOptions options) {
  MacroField out = rho;
  MacroStepper(rho.space, d, spec, dt, options).step(out);
  return out;
}

Eigen::Matrix3d guiding_center_tensor(double d_z) {
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  d(0, 1) = 1.0;
  d(1, 0) = -1.0;
  d(2, 2) = d_z;
  return d;
}

MacroField step_guiding_center(const MacroField& rho, double d_z, const FieldSpec& spec, double dt,
                               MacroOptions options) {
  if (!(d_z >= 0.0)) throw ValidationError("d_z must be >= 0");
  return step_drift_diffusion(rho, guiding_center_tensor(d_z), spec, dt, options);
}

void write_density_csv(const std::string& path, const SpaceGrid& space, const Eigen::VectorXd& rho) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "x,y,z,rho\n";
  out.precision(17);
  for (int c = 0; c < space.cells(); ++c) {
    const Vec3 r = space.center(c);
    out << r[0] << ',' << r[1] << ',' << r[2] << ',' << rho(c) << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

MacroResult run_macro(const MacroRunSpec& spec, const std::string& out_dir) {
  require_spatial(spec.space);
  if (!(spec.t_end >= 0.0)) throw ValidationError("t_end: must be >= 0");
  const Eigen::Matrix3d d = spec.equation == MacroEquation::guiding_center ? guiding_center_tensor(spec.d_z) : spec.d;
  if (spec.equation == MacroEquation::guiding_center && !(spec.d_z >= 0.0))
    throw ValidationError("d_z must be >= 0");

  MacroField field = MacroField::from_density(spec.space, spec.initial);
  double dt = spec.dt;
  if (!(dt > 0.0)) {
    const MacroStepper probe(spec.space, d, spec.field, 1.0, spec.options);
    dt = 0.9 * probe.stable_dt(0.0);
    if (spec.field.time_dependent()) dt *= 0.5;
    if (!std::isfinite(dt)) dt = spec.t_end > 0.0 ? spec.t_end : 1.0;
  }
  const int steps = spec.t_end > 0.0 ? static_cast<int>(std::ceil(spec.t_end / dt - 1e-9)) : 0;
  if (steps > 0) dt = spec.t_end / steps;
  std::vector<double> snaps = spec.snapshot_times;
  if (snaps.empty()) snaps = {0.0, spec.t_end};
  std::sort(snaps.begin(), snaps.end());
  for (double s : snaps)
    if (s < 0.0 || s > spec.t_end + 1e-12) throw ValidationError("snapshots: times must lie in [0, t_end]");

  const MacroStepper stepper(spec.space, d, spec.field, steps > 0 ? dt : 1.0, spec.options);
  MacroResult res;
  res.dt = dt;
  const bool nonneg = field.rho.minCoeff() >= 0.0;
  const double mass0 = field.total_mass();
  const double scale = std::max(field.rho.cwiseAbs().sum() * spec.space.cell_volume(), 1e-300);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::size_t next = 0;
  auto record = [&](int n) {
    while (next < snaps.size() && (n == steps || snaps[next] <= (n + 0.5) * dt)) {
      res.times.push_back(field.time);
      res.snapshots.push_back(field.rho);
      if (!out_dir.empty()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "snapshot_%03d.csv", static_cast<int>(res.times.size()) - 1);
        write_density_csv((std::filesystem::path(out_dir) / buf).string(), spec.space, field.rho);
      }
      ++next;
    }
  };
  record(0);
  for (int n = 1; n <= steps; ++n) {
    stepper.step(field);
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(field.total_mass() - mass0) / scale);
    if (nonneg && field.rho.minCoeff() < -1e-14 * scale) res.positive = false;
    record(n);
  }
  res.steps = steps;
  res.final_field = std::move(field);
  return res;
}

}  // namespace gyrodiff
