#include "gyrodiff/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>

#include "gyrodiff/errors.hpp"
#include "gyrodiff/fit.hpp"
#include "gyrodiff/parallel.hpp"
#include "gyrodiff/tensor.hpp"

namespace gyrodiff {

namespace {

using nlohmann::ordered_json;

struct Setup {
  GridPtr grid;
  std::shared_ptr<CollisionKernel> kernel;
};

Setup setup(const RunConfig& cfg) {
  Setup s;
  s.grid = VelocityGrid::build(cfg.grid);
  s.kernel = std::make_shared<CollisionKernel>(s.grid, make_cross_section(cfg.cross_section),
                                               KernelOptions{cfg.dense_budget});
  return s;
}

const char* storage_name(KernelStorage s) {
  switch (s) {
    case KernelStorage::constant: return "constant";
    case KernelStorage::dense: return "dense";
    default: return "matrix_free";
  }
}

ordered_json header(const std::string& command, const RunConfig& cfg, const Setup* s) {
  ordered_json j;
  j["command"] = command;
  j["config"] = cfg.to_json();
  if (s) {
    const auto& g = *s->grid;
    j["grid"] = {{"nodes", g.size()},
                 {"maxwellian_mass", g.maxwellian_mass()},
                 {"deficit", g.deficit()},
                 {"tol_mass", g.tol_mass()}};
    const auto& cs = s->kernel->cross_section();
    j["cross_section"] = {{"label", cs.label()},
                          {"alpha1", cs.alpha1()},
                          {"alpha2", cs.alpha2()},
                          {"storage", storage_name(s->kernel->storage())}};
  }
  return j;
}

std::string prepare(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_report(const std::string& dir, const ordered_json& report) {
  if (dir.empty()) return;
  std::ofstream out(join(dir, "report.json"));
  out << report.dump(2) << '\n';
  if (!out) throw Error("cannot write report.json in " + dir);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Rethrows e with a prefix, keeping its type (and so the CLI exit code).
[[noreturn]] void rethrow_with(const std::string& where) {
  try {
    throw;
  } catch (const GridMismatch& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const SolvabilityError& e) {
    throw SolvabilityError(where + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(where + ": " + e.what(), e.contraction());
  } catch (const StabilityError& e) {
    throw StabilityError(where + ": " + e.what());
  }
}

template <class F>
auto with_context(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error&) {
    rethrow_with(where);
  }
}

std::string eta_tag(double eta) { return "eta=" + fmt(eta); }

template <class T, class F>
std::vector<T> sweep(const std::vector<double>& points, F&& f) {
  std::vector<std::optional<T>> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i].emplace(f(i)); });
  std::vector<T> res;
  res.reserve(points.size());
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

ordered_json fit_json(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > floor) {
      fx.push_back(x[i]);
      fy.push_back(y[i]);
    }
  if (fx.size() < 2) return nullptr;
  const LogLogFit f = fit_loglog(fx, fy);
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"points", f.points}};
}

// Random coercivity spot check: -<Q f, f>_M >= alpha1 massM ||f - P f||^2_M.
ordered_json coercivity_check(const CollisionKernel& k, unsigned long long seed, int samples) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto& g = k.grid();
  const Distribution m = maxwellian(k.grid_ptr());
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng) * m.values()(i);
    const Distribution f(k.grid_ptr(), v);
    const Distribution pf = (mass(f) / g.maxwellian_mass()) * m;
    const double lhs = -weighted_inner(apply_Q(k, f), f);
    const double rhs = k.alpha1() * g.maxwellian_mass() * std::pow(weighted_norm(f - pf), 2);
    worst = std::min(worst, lhs / rhs);
  }
  return {{"samples", samples}, {"seed", seed}, {"min_ratio", worst}, {"holds", worst >= 1.0 - 1e-10}};
}

}  // namespace

ordered_json cmd_cell_problem(const RunConfig& cfg, const std::string& out_dir) {
  const Setup s = setup(cfg);
  const std::string dir = prepare(out_dir);
  auto report = header("cell-problem", cfg, &s);
  const auto cells = sweep<CellSolution>(cfg.eta, [&](std::size_t i) {
    return with_context(eta_tag(cfg.eta[i]),
                        [&] { return solve_chi_eta(*s.kernel, cfg.eta[i], cfg.method, cfg.cell, cfg.adjoint); });
  });
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    ordered_json r{{"eta", c.eta},
                   {"method", to_string(c.method)},
                   {"adjoint", c.adjoint},
                   {"residual_norm", c.residual_norm},
                   {"mass_defect", c.mass_defect},
                   {"bound_lhs", c.bound_lhs},
                   {"bound_rhs", c.bound_rhs},
                   {"bound_ok", c.bound_ok}};
    if (!dir.empty()) {
      const std::string stem = "cell_" + std::to_string(i);
      write_csv(join(dir, stem + "_x.csv"), c.x_perp[0]);
      write_csv(join(dir, stem + "_y.csv"), c.x_perp[1]);
      write_csv(join(dir, stem + "_z.csv"), c.x_z);
      ordered_json side = r;
      side["files"] = {stem + "_x.csv", stem + "_y.csv", stem + "_z.csv"};
      side["tol_zero"] = cfg.cell.tol_zero;
      side["fp_tol"] = cfg.cell.fp_tol;
      side["max_iter"] = cfg.cell.max_iter;
      std::ofstream(join(dir, stem + ".json")) << side.dump(2) << '\n';
      r["files"] = side["files"];
    }
    rows.push_back(std::move(r));
  }
  report["cells"] = rows;
  report["coercivity"] = coercivity_check(*s.kernel, cfg.seed, 16);
  write_report(dir, report);
  return report;
}

ordered_json cmd_diffusion_matrix(const RunConfig& cfg, const std::string& out_dir) {
  const Setup s = setup(cfg);
  const std::string dir = prepare(out_dir);
  auto report = header("diffusion-matrix", cfg, &s);
  const auto tensors = sweep<DiffusionTensor>(cfg.eta, [&](std::size_t i) {
    return with_context(eta_tag(cfg.eta[i]), [&] {
      return assemble_D_eta(solve_chi_eta(*s.kernel, cfg.eta[i], cfg.method, cfg.cell, cfg.adjoint));
    });
  });
  const auto& cs = s.kernel->cross_section();
  ordered_json rows = ordered_json::array();
  std::string csv = "eta,i,j,D,D_sym,D_antisym\n";
  double worst_ref = 0.0;
  bool all_positive = true;
  for (const auto& t : tensors) {
    ordered_json r = to_json(t);
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(t.sym).eigenvalues().minCoeff();
    r["sym_min_eigenvalue"] = min_eig;
    r["positive"] = min_eig > 0.0;
    all_positive = all_positive && min_eig > 0.0;
    if (cs.is_constant()) {
      const DiffusionTensor ref = relaxation_reference(1.0 / cs.constant_value(), t.eta);
      double err = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (ref.d(a, b) != 0.0) err = std::max(err, std::abs(t.d(a, b) - ref.d(a, b)) / std::abs(ref.d(a, b)));
      r["reference"] = matrix_json(ref.d);
      r["max_rel_error"] = err;
      worst_ref = std::max(worst_ref, err);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        csv += fmt(t.eta) + ',' + std::to_string(a + 1) + ',' + std::to_string(b + 1) + ',' + fmt(t.d(a, b)) + ',' +
               fmt(t.sym(a, b)) + ',' + fmt(t.antisym(a, b)) + '\n';
    rows.push_back(std::move(r));
  }
  report["tensors"] = rows;
  report["positive"] = all_positive;
  if (cs.is_constant()) report["max_rel_error"] = worst_ref;
  if (!dir.empty()) std::ofstream(join(dir, "diffusion_matrix.csv")) << csv;
  write_report(dir, report);
  return report;
}

ordered_json cmd_expansion_study(const RunConfig& cfg, const std::string& out_dir) {
  const Setup s = setup(cfg);
  const std::string dir = prepare(out_dir);
  auto report = header("expansion-study", cfg, &s);
  const auto& k = *s.kernel;
  CellOptions opts = cfg.cell;
  const ExpansionTerms terms = compute_expansion(k, opts);
  const double dz = d_parallel(terms);
  const double scale = weighted_norm(terms.xz0);
  // remainders at or below this are roundoff residue of an exact cancellation
  const double floor = 1e-11 * std::max(scale, 1.0);

  struct Point {
    double rz, rperp, d33, sym, as_lead, as_rem, as_exp;
  };
  const Eigen::Matrix3d d0 = d0_zperp(terms);
  const auto pts = sweep<Point>(cfg.eta, [&](std::size_t i) {
    const double eta = cfg.eta[i];
    return with_context(eta_tag(eta), [&] {
      const CellSolution c = solve_chi_eta(k, eta, cfg.method, cfg.cell, cfg.adjoint);
      const DiffusionTensor d = assemble_D_eta(c);
      const DiffusionTensor e = expansion_tensor(terms, eta);
      const double e2 = eta * eta;
      Point p;
      p.rz = weighted_norm(c.x_z - terms.xz0 - e2 * terms.xz1);
      p.rperp = std::hypot(weighted_norm(c.x_perp[0] - terms.xperp0[0] - e2 * terms.xperp1[0]),
                           weighted_norm(c.x_perp[1] - terms.xperp0[1] - e2 * terms.xperp1[1]));
      p.d33 = std::abs(d.sym(2, 2) - dz);
      p.sym = (d.sym - e.sym).norm();
      Eigen::Matrix3d lead = Eigen::Matrix3d::Zero();
      lead(0, 1) = 1.0;
      lead(1, 0) = -1.0;
      p.as_lead = (d.antisym - lead).norm();
      p.as_rem = (d.antisym - lead - eta * 0.5 * (d0 - d0.transpose())).norm();
      p.as_exp = (d.antisym - e.antisym).norm();
      return p;
    });
  });

  ordered_json rows = ordered_json::array();
  std::string csv = "eta,r_z,r_perp,d33_minus_dz,sym_remainder,antisym_minus_I,antisym_remainder\n";
  std::vector<double> etas, rz, rp, d33, sym, asl, asr;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const double eta = cfg.eta[i];
    rows.push_back({{"eta", eta},
                    {"r_z", p.rz},
                    {"r_perp", p.rperp},
                    {"d33_minus_dz", p.d33},
                    {"sym_remainder", p.sym},
                    {"antisym_minus_I", p.as_lead},
                    {"eta_norm_D0", eta * d0.norm()},
                    {"antisym_remainder", p.as_rem},
                    {"antisym_vs_expansion", p.as_exp}});
    csv += fmt(eta) + ',' + fmt(p.rz) + ',' + fmt(p.rperp) + ',' + fmt(p.d33) + ',' + fmt(p.sym) + ',' +
           fmt(p.as_lead) + ',' + fmt(p.as_rem) + '\n';
    etas.push_back(eta);
    rz.push_back(p.rz);
    rp.push_back(p.rperp);
    d33.push_back(p.d33);
    sym.push_back(p.sym);
    asl.push_back(p.as_lead);
    asr.push_back(p.as_rem);
  }
  report["d_z"] = dz;
  report["norm_D0"] = d0.norm();
  report["roundoff_floor"] = floor;
  report["points"] = rows;
  // null slope: fewer than two points above the roundoff floor
  report["slopes"] = {{"r_z", fit_json(etas, rz, floor)},
                      {"r_perp", fit_json(etas, rp, floor)},
                      {"d33_minus_dz", fit_json(etas, d33, floor)},
                      {"sym_remainder", fit_json(etas, sym, floor)},
                      {"antisym_minus_I", fit_json(etas, asl, floor)},
                      {"antisym_remainder", fit_json(etas, asr, floor)}};
  if (!dir.empty()) std::ofstream(join(dir, "expansion_study.csv")) << csv;
  write_report(dir, report);
  return report;
}

namespace {

KineticRunSpec kinetic_spec(const RunConfig& cfg, double eps, double eta) {
  KineticRunSpec k;
  k.space = cfg.space();
  k.field = cfg.resolved_field();
  k.initial = cfg.initial;
  k.eps = eps;
  k.eta = eta;
  k.t_end = cfg.t_end;
  k.dt = cfg.dt;
  k.snapshot_times = cfg.snapshots;
  k.dump_full = cfg.dump_full;
  return k;
}

ordered_json series_json(const KineticResult& r) {
  ordered_json s = ordered_json::array();
  for (std::size_t i = 0; i < r.times.size(); ++i)
    s.push_back({{"time", r.times[i]},
                 {"mass", r.snapshots[i].rho.sum() * r.final_field.space.cell_volume()},
                 {"entropy", r.entropy[i]}});
  return s;
}

double drift_d_z(const RunConfig& cfg, const CollisionKernel& k) {
  if (cfg.d_z >= 0.0) return cfg.d_z;
  CellOptions opts = cfg.cell;
  return d_parallel(compute_expansion(k, opts));
}

}  // namespace

ordered_json cmd_kinetic(const RunConfig& cfg, const std::string& out_dir) {
  const Setup s = setup(cfg);
  const std::string dir = prepare(out_dir);
  auto report = header("kinetic", cfg, &s);
  const double eps = cfg.eps.front(), eta = cfg.eta.front();
  const KineticResult r = with_context("eps=" + fmt(eps) + " " + eta_tag(eta),
                                       [&] { return run_kinetic(kinetic_spec(cfg, eps, eta), *s.kernel, dir); });
  report["eps"] = eps;
  report["eta"] = eta;
  report["steps"] = r.steps;
  report["dt"] = r.dt;
  report["advective_dt"] = KineticStepper::advective_dt(*s.grid, cfg.space(), eps, eta);
  report["max_mass_drift"] = r.max_mass_drift;
  report["snapshots"] = series_json(r);
  const auto& j = r.mean_current.back();
  report["final_mean_current"] = {j[0], j[1]};
  write_report(dir, report);
  return report;
}

ordered_json cmd_macro(const RunConfig& cfg, const std::string& out_dir) {
  const std::string dir = prepare(out_dir);
  MacroRunSpec m;
  m.space = cfg.space();
  m.field = cfg.resolved_field();
  m.initial = cfg.initial;
  m.equation = cfg.equation;
  m.t_end = cfg.t_end;
  m.dt = cfg.macro_dt;
  m.snapshot_times = cfg.snapshots;
  m.options.implicit_z = cfg.implicit_z;
  if (cfg.geometry == Geometry::homogeneous)
    throw ValidationError("config field \"geometry\": macro needs slab_z or perp_xy");

  std::optional<Setup> s;
  const bool need_kernel =
      cfg.equation == MacroEquation::drift_diffusion || (cfg.equation == MacroEquation::guiding_center && cfg.d_z < 0);
  if (need_kernel) s = setup(cfg);
  auto report = header("macro", cfg, s ? &*s : nullptr);
  if (cfg.equation == MacroEquation::drift_diffusion) {
    const double eta = cfg.eta.front();
    const DiffusionTensor d = with_context(eta_tag(eta), [&] {
      return assemble_D_eta(solve_chi_eta(*s->kernel, eta, cfg.method, cfg.cell, cfg.adjoint));
    });
    m.d = d.d;
    report["tensor"] = to_json(d);
  } else {
    m.d_z = drift_d_z(cfg, *s->kernel);
    report["d_z"] = m.d_z;
  }
  const MacroResult r = run_macro(m, dir);
  report["steps"] = r.steps;
  report["dt"] = r.dt;
  report["max_mass_drift"] = r.max_mass_drift;
  report["positive"] = r.positive;
  ordered_json snaps = ordered_json::array();
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const auto& rho = r.snapshots[i];
    const double mass = rho.sum() * m.space.cell_volume();
    // second moment about the domain centre along the first active axis
    double var = 0.0;
    for (int c = 0; c < m.space.cells(); ++c) {
      const Vec3 x = m.space.center(c);
      const double d = cfg.geometry == Geometry::slab_z ? x[2] - 0.5 * m.space.lz : x[0] - 0.5 * m.space.lx;
      var += rho(c) * d * d;
    }
    snaps.push_back({{"time", r.times[i]},
                     {"mass", mass},
                     {"variance", mass != 0.0 ? var * m.space.cell_volume() / mass : 0.0}});
  }
  report["snapshots"] = snaps;
  write_report(dir, report);
  return report;
}

ordered_json cmd_convergence(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.geometry == Geometry::homogeneous)
    throw ValidationError("config field \"geometry\": convergence needs slab_z or perp_xy");
  const Setup s = setup(cfg);
  const std::string dir = prepare(out_dir);
  auto report = header("convergence", cfg, &s);
  const auto& k = *s.kernel;
  std::vector<double> samples = cfg.snapshots;
  if (samples.empty()) samples = {cfg.t_end};
  const SpaceGrid space = cfg.space();

  if (cfg.geometry == Geometry::slab_z) {
    const double eta = cfg.eta.front();
    const DiffusionTensor d = with_context(eta_tag(eta), [&] {
      return assemble_D_eta(solve_chi_eta(k, eta, cfg.method, cfg.cell, cfg.adjoint));
    });
    MacroRunSpec m;
    m.space = SpaceGrid::make(Geometry::slab_z, cfg.cells * cfg.macro_refine, cfg.length);
    m.field = cfg.resolved_field();
    m.initial = cfg.initial;
    m.d = d.d;
    m.t_end = cfg.t_end;
    m.dt = cfg.macro_dt;
    m.snapshot_times = samples;
    m.options.implicit_z = cfg.implicit_z;
    const MacroResult ref = run_macro(m);

    RunConfig kc = cfg;
    kc.snapshots = samples;
    const auto runs = sweep<KineticResult>(cfg.eps, [&](std::size_t i) {
      const double eps = cfg.eps[i];
      std::string sub;
      if (!dir.empty()) sub = join(dir, "kinetic_" + std::to_string(i));
      return with_context("eps=" + fmt(eps), [&] { return run_kinetic(kinetic_spec(kc, eps, eta), k, sub); });
    });

    ordered_json rows = ordered_json::array();
    std::string csv = "eps,time,l2_error\n";
    std::vector<double> final_err;
    const int mid = cfg.macro_refine / 2;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      ordered_json errs = ordered_json::array();
      for (std::size_t t = 0; t < samples.size(); ++t) {
        double e = 0.0;
        for (int c = 0; c < space.cells(); ++c)
          e += std::pow(runs[i].snapshots[t].rho(c) - ref.snapshots[t](c * cfg.macro_refine + mid), 2);
        e = std::sqrt(e * space.cell_volume());
        errs.push_back({{"time", runs[i].times[t]}, {"l2_error", e}});
        csv += fmt(cfg.eps[i]) + ',' + fmt(runs[i].times[t]) + ',' + fmt(e) + '\n';
        if (t + 1 == samples.size()) final_err.push_back(e);
      }
      rows.push_back({{"eps", cfg.eps[i]},
                      {"steps", runs[i].steps},
                      {"dt", runs[i].dt},
                      {"max_mass_drift", runs[i].max_mass_drift},
                      {"errors", errs}});
    }
    // errors ordered by decreasing eps must decrease
    std::vector<std::size_t> order(cfg.eps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.eps[a] > cfg.eps[b]; });
    bool monotone = true;
    for (std::size_t i = 1; i < order.size(); ++i) monotone = monotone && final_err[order[i]] < final_err[order[i - 1]];
    report["eta"] = eta;
    report["tensor"] = to_json(d);
    report["reference"] = {{"cells", m.space.cells()}, {"steps", ref.steps}, {"dt", ref.dt}};
    report["runs"] = rows;
    report["monotone"] = monotone;
    report["order"] = fit_json(cfg.eps, final_err, 0.0);
    if (!dir.empty()) std::ofstream(join(dir, "convergence.csv")) << csv;
  } else {
    // perp_xy with eta = eps against the guiding-center drift
    const double d_z = cfg.d_z >= 0.0 ? cfg.d_z : 0.0;
    std::vector<double> window;
    for (int i = 0; i <= 10; ++i) window.push_back(cfg.t_end * (0.5 + 0.05 * i));
    MacroRunSpec m;
    m.space = space;
    m.field = cfg.resolved_field();
    m.initial = cfg.initial;
    m.equation = MacroEquation::guiding_center;
    m.d_z = d_z;
    m.t_end = cfg.t_end;
    m.dt = cfg.macro_dt;
    m.snapshot_times = window;
    const MacroResult ref = run_macro(m);
    // mass-weighted E x e_z over the second half of the run
    std::array<double, 2> vref{0.0, 0.0};
    for (std::size_t t = 0; t < ref.times.size(); ++t) {
      const auto& rho = ref.snapshots[t];
      double mass = 0.0, vx = 0.0, vy = 0.0;
      for (int c = 0; c < space.cells(); ++c) {
        const Vec3 e = m.field.field(ref.times[t], space.center(c));
        mass += rho(c);
        vx += rho(c) * e[1];
        vy -= rho(c) * e[0];
      }
      vref[0] += vx / mass / static_cast<double>(ref.times.size());
      vref[1] += vy / mass / static_cast<double>(ref.times.size());
    }
    const double vnorm = std::hypot(vref[0], vref[1]);
    if (!(vnorm > 0.0)) throw ValidationError("config field \"field\": the drift E x e_z vanishes; nothing to compare");

    const auto runs = sweep<KineticResult>(cfg.eps, [&](std::size_t i) {
      const double eps = cfg.eps[i];
      std::string sub;
      if (!dir.empty()) sub = join(dir, "kinetic_" + std::to_string(i));
      return with_context("eps=eta=" + fmt(eps),
                          [&] { return run_kinetic(kinetic_spec(cfg, eps, eps), k, sub); });
    });
    ordered_json rows = ordered_json::array();
    std::string csv = "eps,v_x,v_y,ref_x,ref_y,rel_error,displacement_error\n";
    std::vector<double> errs;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& r = runs[i];
      double vx = 0.0, vy = 0.0, dx = 0.0, dy = 0.0;
      int n = 0;
      for (std::size_t t = 0; t < r.step_times.size(); ++t) {
        if (t > 0) {
          dx += 0.5 * (r.mean_current[t][0] + r.mean_current[t - 1][0]) * r.dt;
          dy += 0.5 * (r.mean_current[t][1] + r.mean_current[t - 1][1]) * r.dt;
        }
        if (r.step_times[t] >= 0.5 * cfg.t_end - 1e-12) {
          vx += r.mean_current[t][0];
          vy += r.mean_current[t][1];
          ++n;
        }
      }
      vx /= n;
      vy /= n;
      const double err = std::hypot(vx - vref[0], vy - vref[1]) / vnorm;
      // centre-of-mass displacement against the drift over [0, T]
      const double derr = std::hypot(dx - vref[0] * cfg.t_end, dy - vref[1] * cfg.t_end) / (vnorm * cfg.t_end);
      errs.push_back(err);
      rows.push_back({{"eps", cfg.eps[i]},
                      {"eta", cfg.eps[i]},
                      {"steps", r.steps},
                      {"dt", r.dt},
                      {"max_mass_drift", r.max_mass_drift},
                      {"velocity", {vx, vy}},
                      {"rel_error", err},
                      {"displacement_rel_error", derr}});
      csv += fmt(cfg.eps[i]) + ',' + fmt(vx) + ',' + fmt(vy) + ',' + fmt(vref[0]) + ',' + fmt(vref[1]) + ',' +
             fmt(err) + ',' + fmt(derr) + '\n';
    }
    std::vector<std::size_t> order(cfg.eps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.eps[a] > cfg.eps[b]; });
    bool monotone = true;
    for (std::size_t i = 1; i < order.size(); ++i) monotone = monotone && errs[order[i]] < errs[order[i - 1]];
    report["reference_velocity"] = {vref[0], vref[1]};
    report["runs"] = rows;
    report["monotone"] = monotone;
    report["finest_rel_error"] = errs[order.back()];
    report["order"] = fit_json(cfg.eps, errs, 0.0);
    if (!dir.empty()) std::ofstream(join(dir, "convergence.csv")) << csv;
  }
  write_report(dir, report);
  return report;
}

ordered_json run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir) {
  if (name == "cell-problem") return cmd_cell_problem(cfg, out_dir);
  if (name == "diffusion-matrix") return cmd_diffusion_matrix(cfg, out_dir);
  if (name == "expansion-study") return cmd_expansion_study(cfg, out_dir);
  if (name == "kinetic") return cmd_kinetic(cfg, out_dir);
  if (name == "macro") return cmd_macro(cfg, out_dir);
  if (name == "convergence") return cmd_convergence(cfg, out_dir);
  throw ValidationError("unknown command \"" + name + "\"");
}

}  // namespace gyrodiff
