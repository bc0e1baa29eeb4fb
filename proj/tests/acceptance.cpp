// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "gyrodiff/commands.hpp"
#include "gyrodiff/errors.hpp"
#include "gyrodiff/fit.hpp"
#include "gyrodiff/parallel.hpp"
#include "gyrodiff/tensor.hpp"
#include "oracles.hpp"

using namespace gyrodiff;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Smooth {
  const char* name;
  CrossSection cs;
  int n_angle;
};

std::vector<Smooth> smooth_sections() {
  // gauss_tilted breaks rotation invariance; odd n_angle avoids the Nyquist mode
  return {{"gauss_mix", CrossSection::gauss_mix(1.0, 0.5), 16},
          {"gauss_tilted", CrossSection::gauss_tilted(1.0, 0.5, 1.0, 0.5), 15}};
}

double max_rel_entry(const Eigen::Matrix3d& d, const Eigen::Matrix3d& ref) {
  double e = 0.0;
  const double scale = ref.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      e = std::max(e, ref(i, j) != 0.0 ? std::abs(d(i, j) - ref(i, j)) / std::abs(ref(i, j))
                                       : std::abs(d(i, j)) / scale);
  return e;
}

Outcome criterion1() {
  double worst_default = 0.0, worst_refined = 0.0, slowest = 0.0;
  const auto coarse = VelocityGrid::build({8, 16, 16, 6.0, 6.0});
  const auto fine = VelocityGrid::build({16, 32, 32, 6.0, 6.0});
  for (double tau : {0.5, 1.0, 2.0}) {
    CollisionKernel kc(coarse, CrossSection::constant(tau)), kf(fine, CrossSection::constant(tau));
    for (double eta : {0.5, 1.0, 2.0}) {
      const Eigen::Matrix3d ref = oracle::relaxation_matrix(tau, eta);
      worst_default = std::max(worst_default, max_rel_entry(assemble_D_eta(solve_chi_eta(kc, eta)).d, ref));
      const auto t0 = std::chrono::steady_clock::now();
      worst_refined = std::max(worst_refined, max_rel_entry(assemble_D_eta(solve_chi_eta(kf, eta)).d, ref));
      slowest = std::max(slowest, seconds_since(t0));
    }
  }
  return {worst_default <= 1e-3 && worst_refined <= 1e-6,
          "max rel err default " + fmt("%.2e", worst_default) + " (<= 1e-3), refined 16x32x32 " +
              fmt("%.2e", worst_refined) + " (<= 1e-6), slowest refined (tau,eta) " + fmt("%.2f", slowest) + " s"};
}

Outcome criterion2() {
  double worst[5] = {0, 0, 0, 0, 0};
  for (const auto& s : smooth_sections()) {
    const auto g = VelocityGrid::build({8, s.n_angle, 16, 6.0, 6.0});
    CollisionKernel k(g, s.cs);
    const double eta = 0.5;
    const auto m = maxwellian(g);
    worst[1] = std::max(worst[1], weighted_norm(apply_Qeta(k, m, eta)));
    std::mt19937_64 rng(20240611);
    for (int n = 0; n < 100; ++n) {
      const auto f = oracle::random_distribution(g, rng), h = oracle::random_distribution(g, rng);
      worst[0] = std::max(worst[0], std::abs(mass(apply_Qeta(k, f, eta))));
      worst[2] = std::max(worst[2], std::abs(weighted_inner(apply_Q(k, f), h) - weighted_inner(f, apply_Q(k, h))));
      worst[3] = std::max(worst[3], std::abs(weighted_inner(gyration(f), f)));
      const auto a = cyl_average(f);
      worst[4] = std::max(worst[4], weighted_norm(cyl_average(a) - a));
    }
  }
  const bool ok = *std::max_element(worst, worst + 5) <= 1e-12;
  return {ok, "over 2 x 100 samples: |mass(Q^eta f)| " + fmt("%.1e", worst[0]) + ", ||Q^eta M|| " +
                  fmt("%.1e", worst[1]) + ", Q symmetry " + fmt("%.1e", worst[2]) + ", <Gf,f> " +
                  fmt("%.1e", worst[3]) + ", A^2-A " + fmt("%.1e", worst[4]) + " (all <= 1e-12)"};
}

Outcome criterion3() {
  double min_ratio = 1e300;
  for (const auto& s : smooth_sections()) {
    const auto g = VelocityGrid::build({8, s.n_angle, 16, 6.0, 6.0});
    CollisionKernel k(g, s.cs);
    const auto m = maxwellian(g);
    std::mt19937_64 rng(7);
    for (int n = 0; n < 100; ++n) {
      const auto f = oracle::random_distribution(g, rng);
      const auto pf = (mass(f) / g->maxwellian_mass()) * m;
      const double lhs = -weighted_inner(apply_Qeta(k, f, 0.5), f);
      const double rhs = k.alpha1() * g->maxwellian_mass() * std::pow(weighted_norm(f - pf), 2);
      min_ratio = std::min(min_ratio, lhs / rhs);
    }
  }
  return {min_ratio >= 1.0 - 1e-12,
          "min -<Q^eta f,f>_M / (alpha1 massM ||f-Pf||^2) over 200 samples = " + fmt("%.4f", min_ratio)};
}

Outcome criterion4() {
  double worst = 0.0;
  for (const auto& s : smooth_sections()) {
    const auto g = VelocityGrid::build({8, s.n_angle, 16, 6.0, 6.0});
    CollisionKernel k(g, s.cs);
    std::mt19937_64 rng(4);
    for (double eta : {0.25, 1.0}) {
      const CharacteristicsInverse inv(k, eta);
      for (int n = 0; n < 20; ++n) {
        const auto f = oracle::random_distribution(g, rng);
        worst = std::max(worst, weighted_norm(apply_S_eta(k, inv.apply(f), eta) - f) / weighted_norm(f));
      }
    }
  }
  return {worst <= 1e-8, "max ||S(L f) - f|| / ||f|| = " + fmt("%.2e", worst) + " (<= 1e-8)"};
}

json expansion(const char* section, int n_angle, json extra = json::object()) {
  json j = {{"cross_section", section}, {"n_angle", n_angle}, {"eta", {0.8, 0.4, 0.2, 0.1}}};
  j.update(extra);
  return cmd_expansion_study(parse_config(j), "");
}

double slope_of(const json& r, const char* key) {
  const auto& s = r["slopes"][key];
  return s.is_null() ? std::nan("") : s["slope"].get<double>();
}

bool below_floor(const json& r, const char* key) {
  for (const auto& p : r["points"])
    if (p[key].get<double>() > r["roundoff_floor"].get<double>()) return false;
  return true;
}

Outcome criterion5(json& mix, json& tilted) {
  mix = expansion("gauss_mix", 16);
  tilted = expansion("gauss_tilted", 15, {{"shift", 1.0}, {"shift_z", 0.5}});
  const double perp = slope_of(mix, "r_perp");
  const bool z_zero = below_floor(mix, "r_z"), d33_zero = below_floor(mix, "d33_minus_dz");
  const double z_mix = slope_of(mix, "r_z"), d33_mix = slope_of(mix, "d33_minus_dz");
  const double z_t = slope_of(tilted, "r_z"), d33_t = slope_of(tilted, "d33_minus_dz"),
               perp_t = slope_of(tilted, "r_perp");
  const bool ok = std::abs(perp - 4.0) <= 0.5 && (z_zero || std::abs(z_mix - 4.0) <= 0.5) &&
                  (d33_zero || d33_mix >= 3.5) && std::abs(z_t - 4.0) <= 0.5 && d33_t >= 3.5 &&
                  std::abs(perp_t - 4.0) <= 0.5;
  std::string d = "gauss_mix: r_perp slope " + fmt("%.2f", perp) + ", r_z " +
                  (z_zero ? std::string("identically 0 (<= roundoff)") : "slope " + fmt("%.2f", z_mix)) +
                  ", D33-Dz " + (d33_zero ? std::string("identically 0") : "slope " + fmt("%.2f", d33_mix)) +
                  "; gauss_tilted: r_z slope " + fmt("%.2f", z_t) + ", r_perp slope " + fmt("%.2f", perp_t) +
                  ", D33-Dz slope " + fmt("%.2f", d33_t);
  return {ok, d};
}

Outcome criterion6(const json& mix, const json& tilted) {
  bool ok = true;
  std::string d;
  for (const auto* r : {&mix, &tilted}) {
    bool bound = true;
    for (const auto& p : (*r)["points"])
      bound = bound && p["antisym_minus_I"].get<double>() <=
                           p["eta_norm_D0"].get<double>() + p["antisym_remainder"].get<double>() + 1e-15;
    const double se = slope_of(*r, "antisym_minus_I"), sr = slope_of(*r, "antisym_remainder");
    ok = ok && bound && se >= 1.0 && sr >= 3.5;
    d += std::string(r == &mix ? "gauss_mix" : "; gauss_tilted") + ": |D_as - I| slope " + fmt("%.2f", se) +
         ", remainder slope " + fmt("%.2f", sr) + ", |D0| " + fmt("%.1e", (*r)["norm_D0"].get<double>()) +
         ", bound " + (bound ? "holds" : "violated");
  }
  return {ok, d};
}

Outcome criterion7() {
  double cell = 0.0, tensor = 0.0;
  for (const auto& s : smooth_sections()) {
    const auto g = VelocityGrid::build({8, s.n_angle, 16, 6.0, 6.0});
    CollisionKernel k(g, s.cs);
    for (double eta : {1.0, 0.5}) {
      const auto a = solve_chi_eta(k, eta, SolveMethod::direct);
      const auto b = solve_chi_eta(k, eta, SolveMethod::fixed_point);
      cell = std::max(cell, weighted_norm(a.x_z - b.x_z) / weighted_norm(a.x_z));
      for (int c = 0; c < 2; ++c)
        cell = std::max(cell, weighted_norm(a.x_perp[c] - b.x_perp[c]) / weighted_norm(a.x_perp[c]));
      const auto dp = assemble_D_eta(a), da = assemble_D_eta(solve_chi_eta(k, eta, SolveMethod::direct, {}, true));
      tensor = std::max(tensor, (dp.d - da.d).norm() / dp.d.norm());
    }
  }
  return {cell <= 1e-8 && tensor <= 1e-8,
          "direct vs fixed point " + fmt("%.1e", cell) + ", primal vs adjoint D " + fmt("%.1e", tensor) +
              " (both <= 1e-8)"};
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const json cfg = {{"geometry", "slab_z"}, {"cells", 64},       {"length", 8.0},  {"eta", 0.3},
                    {"eps", {0.2, 0.1, 0.05}}, {"t_end", 0.5}, {"initial", "gaussian"}, {"rho_width", 0.5},
                    {"macro_refine", 5}};
  const auto r = cmd_convergence(parse_config(cfg), oracle::scratch_dir("acceptance_c8"));
  const double secs = seconds_since(t0);
  const double order = r["order"]["slope"].get<double>();
  std::string errs;
  for (const auto& run : r["runs"]) errs += fmt("%.2e ", run["errors"].back()["l2_error"].get<double>());
  const bool ok = r["monotone"].get<bool>() && order >= 0.8 && secs <= 600.0;
  return {ok, "L2 errors " + errs + "order " + fmt("%.2f", order) + " (>= 0.8), fit residual " +
                  fmt("%.2e", r["order"]["residual"].get<double>()) + ", runtime " + fmt("%.1f", secs) + " s"};
}

Outcome criterion9() {
  const json cfg = {{"geometry", "perp_xy"}, {"cells", 8},  {"length", 8.0},       {"n_radial", 6},
                    {"n_angle", 12},         {"n_parallel", 8}, {"field", "uniform"}, {"e", {0.3, -0.2, 0.0}},
                    {"eps", {0.2, 0.1}},     {"t_end", 0.5},  {"initial", "gaussian"}, {"rho_base", 0.1},
                    {"rho_width", 1.0}};
  const auto r = cmd_convergence(parse_config(cfg), oracle::scratch_dir("acceptance_c9"));
  std::string errs;
  for (const auto& run : r["runs"]) errs += fmt("%.3f ", run["rel_error"].get<double>());
  const double fine = r["finest_rel_error"].get<double>();
  return {fine <= 0.05 && r["monotone"].get<bool>(),
          "relative velocity error vs E x e_z at eps=eta 0.2, 0.1: " + errs + "(finest <= 0.05, decreasing)"};
}

Outcome criterion10() {
  int rejected = 0, accepted = 0, tries = 0;
  double worst_residual = 0.0, smallest_rejected = 1e300;
  for (const auto& s : smooth_sections()) {
    const auto g = VelocityGrid::build({8, s.n_angle, 16, 6.0, 6.0});
    CollisionKernel k(g, s.cs);
    std::mt19937_64 rng(10);
    auto functional = [&](const Distribution& x) {
      double v = 0.0;
      for (std::size_t i = 0; i < g->size(); ++i)
        v += g->weight(i) * k.nu()[i] * x[i] / k.nu_bar()[i];
      return std::abs(v) / weighted_norm(x);
    };
    for (int n = 0; n < 20; ++n) {
      const auto h = oracle::random_distribution(g, rng);
      const auto data = apply_Qbar(k, h);
      const auto f = solve_qbar(k, data);
      worst_residual = std::max(worst_residual, weighted_norm(apply_Qbar(k, f) - data) / weighted_norm(data));
      ++accepted;
      // push the solvability functional just past the threshold, and far past it
      const auto m = maxwellian(g);
      for (double target : {2e-8, 1e-3}) {
        const double unit = functional(m) * weighted_norm(m);
        const auto bad = data + (target * weighted_norm(data) / unit) * m;
        ++tries;
        smallest_rejected = std::min(smallest_rejected, functional(bad));
        try {
          solve_qbar(k, bad);
        } catch (const SolvabilityError&) {
          ++rejected;
        }
      }
    }
  }
  const bool ok = rejected == tries && worst_residual < 1e-9 && smallest_rejected > 1e-8;
  return {ok, std::to_string(accepted) + " range data accepted (max residual " + fmt("%.1e", worst_residual) +
                  "), " + std::to_string(rejected) + "/" + std::to_string(tries) +
                  " perturbed data rejected (smallest functional " + fmt("%.2e", smallest_rejected) + ")"};
}

}  // namespace

int main() {
  set_default_workers(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  json mix, tilted;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, [&] { return criterion5(mix, tilted); }},
      {6, [&] { return criterion6(mix, tilted); }},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
