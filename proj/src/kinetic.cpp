#include "gyrodiff/kinetic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <json.hpp>

#include "gyrodiff/angular.hpp"
#include "gyrodiff/errors.hpp"
#include "gyrodiff/parallel.hpp"

namespace gyrodiff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool active_x(const SpaceGrid& s) { return s.geometry == Geometry::perp_xy; }
bool active_y(const SpaceGrid& s) { return s.geometry == Geometry::perp_xy; }
bool active_z(const SpaceGrid& s) { return s.geometry == Geometry::slab_z; }

double periodic_offset(double x, double centre, double length) {
  double d = x - centre;
  d -= length * std::round(d / length);
  return d;
}

std::string numbered(const std::string& dir, const char* stem, int k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03d.%s", stem, k, ext);
  return (std::filesystem::path(dir) / buf).string();
}

}  // namespace

Geometry parse_geometry(const std::string& name) {
  if (name == "homogeneous") return Geometry::homogeneous;
  if (name == "slab_z") return Geometry::slab_z;
  if (name == "perp_xy") return Geometry::perp_xy;
  throw ValidationError("geometry: expected homogeneous, slab_z or perp_xy, got \"" + name + "\"");
}

std::string to_string(Geometry g) {
  switch (g) {
    case Geometry::homogeneous: return "homogeneous";
    case Geometry::slab_z: return "slab_z";
    default: return "perp_xy";
  }
}

SpaceGrid SpaceGrid::make(Geometry g, int n, double length) {
  SpaceGrid s;
  s.geometry = g;
  if (g == Geometry::homogeneous) return s;
  if (n < 2) throw ValidationError("space.cells: need at least 2 cells per active direction");
  if (!(length > 0.0)) throw ValidationError("space.length: must be > 0");
  if (g == Geometry::slab_z) {
    s.nz = n;
    s.lz = length;
  } else {
    s.nx = s.ny = n;
    s.lx = s.ly = length;
  }
  return s;
}

double SpaceGrid::cell_volume() const { return dx() * dy() * dz(); }

Vec3 SpaceGrid::center(int c) const {
  const int ix = c % nx;
  const int iy = (c / nx) % ny;
  const int iz = c / (nx * ny);
  return {active_x(*this) ? (ix + 0.5) * dx() : 0.0, active_y(*this) ? (iy + 0.5) * dy() : 0.0,
          active_z(*this) ? (iz + 0.5) * dz() : 0.0};
}

FieldSpec FieldSpec::uniform(const Vec3& e) {
  FieldSpec f;
  f.kind = "uniform";
  f.e = e;
  return f;
}

FieldSpec FieldSpec::cosine(double amplitude, const std::array<int, 3>& mode, const SpaceGrid& space, double omega,
                            double modulation) {
  FieldSpec f;
  f.kind = "cosine";
  f.amplitude = amplitude;
  f.k = {kTwoPi * mode[0] / space.lx, kTwoPi * mode[1] / space.ly, kTwoPi * mode[2] / space.lz};
  f.omega = omega;
  f.modulation = modulation;
  return f;
}

double FieldSpec::potential(double t, const Vec3& r, const SpaceGrid& space) const {
  if (kind == "uniform") {
    const Vec3 c{0.5 * space.lx, 0.5 * space.ly, 0.5 * space.lz};
    double v = 0.0;
    if (active_x(space)) v -= e[0] * (r[0] - c[0]);
    if (active_y(space)) v -= e[1] * (r[1] - c[1]);
    if (active_z(space)) v -= e[2] * (r[2] - c[2]);
    return v;
  }
  if (kind == "cosine") {
    const double a = amplitude * (1.0 + modulation * std::sin(omega * t));
    return a * std::cos(k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
  }
  return 0.0;
}

Vec3 FieldSpec::field(double t, const Vec3& r) const {
  if (kind == "uniform") return e;
  if (kind == "cosine") {
    const double a = amplitude * (1.0 + modulation * std::sin(omega * t));
    const double s = a * std::sin(k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
    return {s * k[0], s * k[1], s * k[2]};
  }
  return {0.0, 0.0, 0.0};
}

bool FieldSpec::is_zero() const {
  if (kind == "uniform") return e[0] == 0.0 && e[1] == 0.0 && e[2] == 0.0;
  if (kind == "cosine") return amplitude == 0.0 || (k[0] == 0.0 && k[1] == 0.0 && k[2] == 0.0);
  return true;
}

void FieldSpec::check_geometry(const SpaceGrid& space) const {
  if (kind != "zero" && kind != "uniform" && kind != "cosine")
    throw ValidationError("field.kind: expected zero, uniform or cosine, got \"" + kind + "\"");
  if (kind == "cosine" && space.geometry == Geometry::homogeneous && !is_zero())
    throw ValidationError("field.kind: a cosine potential needs a spatial geometry");
  const Vec3& v = kind == "cosine" ? k : e;
  if (space.geometry == Geometry::slab_z && (v[0] != 0.0 || v[1] != 0.0))
    throw ValidationError("field: slab_z carries only a parallel field (E_x = E_y = 0)");
  if (space.geometry == Geometry::perp_xy && v[2] != 0.0)
    throw ValidationError("field: perp_xy carries only a perpendicular field (E_z = 0)");
}

PhaseField PhaseField::from_density(const GridPtr& vgrid, const SpaceGrid& space,
                                    const std::function<double(const Vec3&)>& rho) {
  PhaseField p{vgrid, space, Eigen::MatrixXd(static_cast<Eigen::Index>(vgrid->size()), space.cells()), 0.0};
  for (int c = 0; c < space.cells(); ++c) p.f.col(c) = rho(space.center(c)) * vgrid->maxwellian_values();
  if (!p.f.allFinite()) throw ValidationError("initial density is not finite");
  return p;
}

Distribution PhaseField::cell(int c) const { return {vgrid, f.col(c)}; }

double PhaseField::total_mass() const { return space.cell_volume() * (vgrid->weights().transpose() * f).sum(); }

Moments moments(const PhaseField& field, double eps, double eta) {
  require_positive_eta(eta);
  if (!(eps > 0.0)) throw ValidationError("eps must be > 0");
  const auto& g = *field.vgrid;
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd wx(n), wy(n), wz(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = g.node(static_cast<std::size_t>(i));
    wx(i) = g.weights()(i) * v[0];
    wy(i) = g.weights()(i) * v[1];
    wz(i) = g.weights()(i) * v[2];
  }
  Moments m;
  m.rho = field.f.transpose() * g.weights();
  m.jz = field.f.transpose() * wz / eps;
  m.jx = field.f.transpose() * wx / (eps * eta);
  m.jy = field.f.transpose() * wy / (eps * eta);
  return m;
}

double entropy(const PhaseField& field, const FieldSpec& spec) {
  const auto& g = *field.vgrid;
  const Eigen::VectorXd wm = g.weights().cwiseQuotient(g.maxwellian_values());
  double total = 0.0;
  for (int c = 0; c < field.space.cells(); ++c) {
    const double v = spec.potential(field.time, field.space.center(c), field.space);
    total += std::exp(v) * wm.dot(field.f.col(c).cwiseAbs2());
  }
  return total * field.space.cell_volume();
}

std::array<Eigen::MatrixXd, 3> velocity_gradient_matrices(const VelocityGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const int nr = g.n_radial(), nz = g.n_parallel(), na = g.n_angle();
  const auto& dr = g.radial_derivative();
  const auto& dz = g.parallel_derivative();
  const Eigen::MatrixXd dth = -g.ring_gyration();  // d/dtheta
  const Eigen::VectorXd& m = g.maxwellian_values();
  std::array<Eigen::MatrixXd, 3> out;
  for (auto& d : out) d = Eigen::MatrixXd::Zero(n, n);
  for (int ir = 0; ir < nr; ++ir) {
    const double r = g.radius(ir);
    for (int iz = 0; iz < nz; ++iz) {
      for (int ia = 0; ia < na; ++ia) {
        const auto i = static_cast<Eigen::Index>(g.index(ir, iz, ia));
        const double th = g.angle(ia), c = std::cos(th), s = std::sin(th);
        // derivatives of phi = f / M, then grad f = M (grad phi - v phi)
        for (int k = 0; k < nr; ++k) {
          const auto j = static_cast<Eigen::Index>(g.index(k, iz, ia));
          const double d = dr[ir * nr + k] * m(i) / m(j);
          out[0](i, j) += c * d;
          out[1](i, j) += s * d;
        }
        for (int b = 0; b < na; ++b) {
          const auto j = static_cast<Eigen::Index>(g.index(ir, iz, b));
          const double d = dth(ia, b) / r;  // M is constant on the ring
          out[0](i, j) -= s * d;
          out[1](i, j) += c * d;
        }
        for (int l = 0; l < nz; ++l) {
          const auto j = static_cast<Eigen::Index>(g.index(ir, l, ia));
          out[2](i, j) += dz[iz * nz + l] * m(i) / m(j);
        }
        const auto& v = g.node(static_cast<std::size_t>(i));
        for (int a = 0; a < 3; ++a) out[a](i, i) -= v[a];
      }
    }
  }
  return out;
}

double DensityProfile::operator()(const Vec3& r, const SpaceGrid& space) const {
  if (kind == "zero") return 0.0;
  if (kind == "uniform") return base + amplitude;
  const bool ax = active_x(space), ay = active_y(space), az = active_z(space);
  if (kind == "gaussian") {
    double d2 = 0.0;
    if (ax) d2 += std::pow(periodic_offset(r[0], 0.5 * space.lx, space.lx), 2);
    if (ay) d2 += std::pow(periodic_offset(r[1], 0.5 * space.ly, space.ly), 2);
    if (az) d2 += std::pow(periodic_offset(r[2], 0.5 * space.lz, space.lz), 2);
    return base + amplitude * std::exp(-0.5 * d2 / (width * width));
  }
  if (kind == "cosine") {
    double s = 0.0;
    if (ax) s += std::cos(kTwoPi * mode * r[0] / space.lx);
    if (ay) s += std::cos(kTwoPi * mode * r[1] / space.ly);
    if (az) s += std::cos(kTwoPi * mode * r[2] / space.lz);
    return base + amplitude * s;
  }
  throw ValidationError("initial.kind: expected gaussian, cosine, uniform or zero, got \"" + kind + "\"");
}

struct KineticStepper::Cache {
  // transport: one circulant per velocity node and active direction
  std::vector<Eigen::MatrixXd> shift_x, shift_y, shift_z;
  // relaxation fast path
  bool closed_form = false;
  Eigen::MatrixXd ring_rotation;
  double decay = 0.0;
  // general velocity generator pieces, in f variables
  Eigen::MatrixXd base;
  std::array<Eigen::MatrixXd, 3> grad;
  Eigen::VectorXd scale;  // sqrt(M / w)
  mutable std::mutex mutex;
  mutable std::map<std::array<double, 3>, Eigen::MatrixXd> propagators;
};

KineticStepper::KineticStepper(const CollisionKernel& kernel, const SpaceGrid& space, FieldSpec spec, double eps,
                               double eta, double dt)
    : kernel_(&kernel), space_(space), spec_(std::move(spec)), eps_(eps), eta_(eta), dt_(dt),
      cache_(std::make_unique<Cache>()) {
  if (!(eps > 0.0)) throw ValidationError("eps must be > 0");
  require_positive_eta(eta);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  spec_.check_geometry(space_);
  const auto& g = kernel.grid();
  const auto n = g.size();

  auto& c = *cache_;
  if (active_z(space_)) {
    c.shift_z.resize(g.n_parallel());
    for (int iz = 0; iz < g.n_parallel(); ++iz)
      c.shift_z[iz] = angular::rotation(space_.nz, kTwoPi * g.parallel(iz) * dt / eps / space_.lz);
  }
  if (active_x(space_)) {
    c.shift_x.resize(n);
    c.shift_y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = g.node(i);
      c.shift_x[i] = angular::rotation(space_.nx, kTwoPi * v[0] * dt / (eps * eta) / space_.lx);
      c.shift_y[i] = angular::rotation(space_.ny, kTwoPi * v[1] * dt / (eps * eta) / space_.ly);
    }
  }

  const double h = 0.5 * dt;
  const double e2 = eps * eps;
  if (kernel.storage() == KernelStorage::constant && spec_.is_zero()) {
    // rotation and relaxation commute: both are exact here
    c.closed_form = true;
    // exact flow of the discrete G: an isometry, the Nyquist mode included
    c.ring_rotation = (-h / (e2 * eta * eta) * g.ring_gyration()).exp();
    c.decay = std::exp(-kernel.cross_section().constant_value() * g.maxwellian_mass() * h / e2);
    return;
  }
  c.base = q_matrix(kernel) / e2;
  const int na = g.n_angle();
  for (int p = 0; p < g.n_rings(); ++p) c.base.block(p * na, p * na, na, na) -= g.ring_gyration() / (e2 * eta * eta);
  if (!spec_.is_zero()) c.grad = velocity_gradient_matrices(g);
  c.scale = g.maxwellian_values().cwiseQuotient(g.weights()).cwiseSqrt();
}

KineticStepper::~KineticStepper() = default;

double KineticStepper::advective_dt(const VelocityGrid& vg, const SpaceGrid& space, double eps, double eta) {
  if (space.geometry == Geometry::slab_z) return 0.25 * space.dz() * eps / vg.params().v_max_par;
  if (space.geometry == Geometry::perp_xy)
    return 0.25 * std::min(space.dx(), space.dy()) * eps * eta / vg.params().v_max_perp;
  return 0.25 * eps * eps * std::min(1.0, eta * eta);
}

void KineticStepper::velocity_half(PhaseField& field, double t) const {
  const auto& g = kernel_->grid();
  auto& c = *cache_;
  if (c.closed_form) {
    const int na = g.n_angle();
    const Eigen::VectorXd& m = g.maxwellian_values();
    const double mm = g.maxwellian_mass();
    parallel_for(static_cast<std::size_t>(field.space.cells()), [&](std::size_t k) {
      auto col = field.f.col(static_cast<Eigen::Index>(k));
      Eigen::Map<Eigen::MatrixXd> rings(col.data(), na, g.n_rings());
      rings = (c.ring_rotation * rings).eval();
      const Eigen::VectorXd eq = (g.weights().dot(col) / mm) * m;
      col = eq + c.decay * (col - eq);
    });
    return;
  }

  // group cells by field value; one propagator per distinct E
  std::map<std::array<double, 3>, std::vector<Eigen::Index>> groups;
  for (int k = 0; k < field.space.cells(); ++k) {
    const Vec3 e = spec_.field(t, field.space.center(k));
    groups[{e[0], e[1], e[2]}].push_back(k);
  }
  const double h = 0.5 * dt_;
  const Eigen::VectorXd& m = g.maxwellian_values();
  const Eigen::VectorXd& w = g.weights();
  const double mm = g.maxwellian_mass();
  for (const auto& [e, cols] : groups) {
    const Eigen::MatrixXd* prop = nullptr;
    {
      std::lock_guard<std::mutex> lock(c.mutex);
      if (spec_.time_dependent() && c.propagators.size() > 256) c.propagators.clear();
      auto it = c.propagators.find(e);
      if (it == c.propagators.end()) {
        Eigen::MatrixXd a = c.base;
        if (e[0] != 0.0 || e[1] != 0.0 || e[2] != 0.0) {
          Eigen::MatrixXd acc = -(e[0] * c.grad[0] + e[1] * c.grad[1]) / (eps_ * eta_) - e[2] * c.grad[2] / eps_;
          // keep the acceleration exactly mass-free
          acc -= m * ((w.transpose() * acc) / mm);
          a += acc;
        }
        const Eigen::MatrixXd scaled = c.scale.cwiseInverse().asDiagonal() * a * c.scale.asDiagonal();
        Eigen::MatrixXd p = c.scale.asDiagonal() * (h * scaled).exp() * c.scale.cwiseInverse().asDiagonal();
        p += m * ((w.transpose() - w.transpose() * p) / mm);
        it = c.propagators.emplace(e, std::move(p)).first;
      }
      prop = &it->second;
    }
    Eigen::MatrixXd block(field.f.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t q = 0; q < cols.size(); ++q) block.col(static_cast<Eigen::Index>(q)) = field.f.col(cols[q]);
    block = (*prop * block).eval();
    for (std::size_t q = 0; q < cols.size(); ++q) field.f.col(cols[q]) = block.col(static_cast<Eigen::Index>(q));
  }
}

void KineticStepper::transport(PhaseField& field) const {
  const auto& g = kernel_->grid();
  auto& c = *cache_;
  if (active_z(space_)) {
    parallel_for(g.size(), [&](std::size_t i) {
      const int iz = static_cast<int>((i / g.n_angle()) % g.n_parallel());
      auto row = field.f.row(static_cast<Eigen::Index>(i));
      row = (row * c.shift_z[iz].transpose()).eval();
    });
  }
  if (active_x(space_)) {
    parallel_for(g.size(), [&](std::size_t i) {
      Eigen::MatrixXd plane(space_.nx, space_.ny);
      for (int k = 0; k < space_.cells(); ++k) plane(k % space_.nx, k / space_.nx) = field.f(static_cast<Eigen::Index>(i), k);
      plane = (c.shift_x[i] * plane * c.shift_y[i].transpose()).eval();
      for (int k = 0; k < space_.cells(); ++k) field.f(static_cast<Eigen::Index>(i), k) = plane(k % space_.nx, k / space_.nx);
    });
  }
}

void KineticStepper::step(PhaseField& field) const {
  if (field.vgrid != kernel_->grid_ptr()) throw GridMismatch();
  if (field.space.geometry != space_.geometry || field.space.cells() != space_.cells())
    throw ValidationError("kinetic step: field geometry does not match the stepper");
  const double t = field.time;
  velocity_half(field, t + 0.25 * dt_);
  transport(field);
  velocity_half(field, t + 0.75 * dt_);
  field.time = t + dt_;
  if (!field.f.allFinite()) throw StabilityError("kinetic step produced non-finite values (dt " + std::to_string(dt_) + ")");
}

PhaseField step(const PhaseField& field, const CollisionKernel& kernel, const FieldSpec& spec, double eps, double eta,
                double dt) {
  PhaseField out = field;
  KineticStepper(kernel, field.space, spec, eps, eta, dt).step(out);
  return out;
}

void write_snapshot_csv(const std::string& path, const SpaceGrid& space, const Moments& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "x,y,z,rho,J_z,J_x,J_y\n";
  out.precision(17);
  for (int c = 0; c < space.cells(); ++c) {
    const Vec3 r = space.center(c);
    out << r[0] << ',' << r[1] << ',' << r[2] << ',' << m.rho(c) << ',' << m.jz(c) << ',' << m.jx(c) << ','
        << m.jy(c) << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

namespace {

void dump_field(const std::string& dir, int k, const PhaseField& field) {
  const std::string bin = numbered(dir, "field", k, "bin");
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw Error("cannot open " + bin + " for writing");
  // column-major N x cells is row-major cells x N
  out.write(reinterpret_cast<const char*>(field.f.data()),
            static_cast<std::streamsize>(sizeof(double) * field.f.size()));
  nlohmann::ordered_json h;
  h["file"] = std::filesystem::path(bin).filename().string();
  h["dtype"] = "float64";
  h["layout"] = "row-major, cells x velocity nodes";
  h["cells"] = field.f.cols();
  h["nodes"] = field.f.rows();
  h["time"] = field.time;
  h["geometry"] = to_string(field.space.geometry);
  h["space_shape"] = {field.space.nx, field.space.ny, field.space.nz};
  std::ofstream(numbered(dir, "field", k, "json")) << h.dump(2) << '\n';
}

}  // namespace

KineticResult run_kinetic(const KineticRunSpec& spec, const CollisionKernel& kernel, const std::string& out_dir) {
  if (!(spec.t_end >= 0.0)) throw ValidationError("t_end: must be >= 0");
  const auto& vg = kernel.grid_ptr();
  double dt = spec.dt > 0.0 ? spec.dt : KineticStepper::advective_dt(*vg, spec.space, spec.eps, spec.eta);
  const int steps = spec.t_end > 0.0 ? static_cast<int>(std::ceil(spec.t_end / dt - 1e-9)) : 0;
  if (steps > 0) dt = spec.t_end / steps;
  std::vector<double> snaps = spec.snapshot_times;
  if (snaps.empty()) snaps = {0.0, spec.t_end};
  std::sort(snaps.begin(), snaps.end());
  for (double s : snaps)
    if (s < 0.0 || s > spec.t_end + 1e-12) throw ValidationError("snapshots: times must lie in [0, t_end]");

  PhaseField field = PhaseField::from_density(vg, spec.space, [&](const Vec3& r) { return spec.initial(r, spec.space); });
  const KineticStepper stepper(kernel, spec.space, spec.field, spec.eps, spec.eta, steps > 0 ? dt : 1.0);
  KineticResult res;
  res.dt = dt;
  const double mass0 = field.total_mass();
  const double mass_scale = std::max(std::abs(mass0), 1e-300);

  std::size_t next = 0;
  auto record = [&](int n) {
    while (next < snaps.size() && (n == steps || snaps[next] <= (n + 0.5) * dt)) {
      const Moments m = moments(field, spec.eps, spec.eta);
      res.times.push_back(field.time);
      res.snapshots.push_back(m);
      res.entropy.push_back(entropy(field, spec.field));
      if (!out_dir.empty()) {
        const int k = static_cast<int>(res.times.size()) - 1;
        write_snapshot_csv(numbered(out_dir, "snapshot", k, "csv"), spec.space, m);
        if (spec.dump_full) dump_field(out_dir, k, field);
      }
      ++next;
    }
  };
  auto track = [&] {
    const Moments m = moments(field, spec.eps, spec.eta);
    const double rho = m.rho.sum();
    res.step_times.push_back(field.time);
    res.mean_current.push_back(rho != 0.0 ? std::array<double, 2>{m.jx.sum() / rho, m.jy.sum() / rho}
                                          : std::array<double, 2>{0.0, 0.0});
  };
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  record(0);
  track();
  for (int n = 1; n <= steps; ++n) {
    stepper.step(field);
    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(field.total_mass() - mass0) / mass_scale);
    track();
    record(n);
  }
  res.steps = steps;
  res.final_field = std::move(field);
  return res;
}

}  // namespace gyrodiff
