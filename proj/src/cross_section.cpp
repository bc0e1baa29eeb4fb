#include "gyrodiff/cross_section.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "gyrodiff/errors.hpp"

namespace gyrodiff {

namespace {

double sq_dist(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

double param(const CrossSectionSpec& spec, const std::string& key, std::optional<double> fallback = {}) {
  auto it = spec.params.find(key);
  if (it != spec.params.end()) return it->second;
  if (fallback) return *fallback;
  throw ValidationError("cross_section." + key + ": required for \"" + spec.name + "\"");
}

}  // namespace

CrossSection::CrossSection(std::string label, Evaluator eval, double alpha1, double alpha2)
    : label_(std::move(label)), eval_(std::move(eval)), alpha1_(alpha1), alpha2_(alpha2) {
  if (!(alpha1_ > 0.0) || !(alpha2_ >= alpha1_) || !std::isfinite(alpha2_))
    throw ValidationError("cross section " + label_ + ": need 0 < alpha1 <= alpha2 < inf");
  check_samples();
}

void CrossSection::check_samples() const {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  const double slack = 1e-12 * alpha2_;
  for (int k = 0; k < 256; ++k) {
    const Vec3 v{u(rng), u(rng), u(rng)};
    const Vec3 w{u(rng), u(rng), u(rng)};
    const double s = eval_(v, w);
    const double t = eval_(w, v);
    if (!std::isfinite(s) || std::abs(s - t) > slack)
      throw ValidationError("cross section " + label_ + ": not symmetric on sampled pairs");
    if (s < alpha1_ - slack || s > alpha2_ + slack)
      throw ValidationError("cross section " + label_ + ": sample outside [alpha1, alpha2]");
  }
}

CrossSection CrossSection::constant(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ValidationError("cross_section.tau: must be > 0");
  const double s = 1.0 / tau;
  CrossSection cs("constant", [s](const Vec3&, const Vec3&) { return s; }, s, s);
  cs.constant_ = s;
  return cs;
}

CrossSection CrossSection::gauss_mix(double a, double b) {
  if (!(a > 0.0)) throw ValidationError("cross_section.a: must be > 0");
  if (!(b >= 0.0)) throw ValidationError("cross_section.b: must be >= 0");
  return {"gauss_mix",
          [a, b](const Vec3& v, const Vec3& w) { return a + b * std::exp(-sq_dist(v, w)); }, a, a + b};
}

CrossSection CrossSection::gauss_tilted(double a, double b, double shift, double shift_z) {
  if (!(a > 0.0)) throw ValidationError("cross_section.a: must be > 0");
  if (!(b >= 0.0)) throw ValidationError("cross_section.b: must be >= 0");
  if (!std::isfinite(shift) || !std::isfinite(shift_z))
    throw ValidationError("cross_section.shift: must be finite");
  const Vec3 c{shift, 0.0, shift_z};
  return {"gauss_tilted",
          [a, b, c](const Vec3& v, const Vec3& w) {
            return a + b * std::exp(-0.5 * (sq_dist(v, c) + sq_dist(w, c)));
          },
          a, a + b};
}

CrossSection CrossSection::tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cross_section.path: cannot open " + path);
  struct Entry { long i, j; double s; };
  std::vector<Entry> entries;
  long n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (auto& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    Entry e{};
    if (!(ss >> e.i >> e.j >> e.s)) {
      if (entries.empty()) continue;  // header
      throw ValidationError(path + ": malformed row \"" + line + "\"");
    }
    if (e.i < 0 || e.j < 0) throw ValidationError(path + ": negative node index");
    n = std::max({n, e.i + 1, e.j + 1});
    entries.push_back(e);
  }
  if (entries.empty()) throw ValidationError(path + ": empty table");
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(n, n, std::nan(""));
  for (const auto& e : entries) {
    if (!(e.s > 0.0) || !std::isfinite(e.s)) throw ValidationError(path + ": kernel values must be positive");
    t(e.i, e.j) = e.s;
  }
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      const double a = t(i, j), b = t(j, i);
      if (std::isnan(a) && std::isnan(b))
        throw ValidationError(path + ": missing entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      if (std::isnan(a)) t(i, j) = b;
      else if (!std::isnan(b) && std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
        throw ValidationError(path + ": table is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    }
  }
  CrossSection cs;
  cs.label_ = "tabulated";
  cs.alpha1_ = t.minCoeff();
  cs.alpha2_ = t.maxCoeff();
  cs.table_ = std::make_shared<const Eigen::MatrixXd>(std::move(t));
  return cs;
}

double CrossSection::between(const VelocityGrid& grid, std::size_t i, std::size_t j) const {
  if (table_) return (*table_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return eval_(grid.node(i), grid.node(j));
}

double CrossSection::operator()(const Vec3& v, const Vec3& w) const {
  if (!eval_) throw ValidationError("cross section " + label_ + " has no analytic evaluator");
  return eval_(v, w);
}

CrossSection make_cross_section(const CrossSectionSpec& spec) {
  if (spec.name == "constant") return CrossSection::constant(param(spec, "tau", 1.0));
  if (spec.name == "gauss_mix") return CrossSection::gauss_mix(param(spec, "a", 1.0), param(spec, "b", 0.5));
  if (spec.name == "gauss_tilted")
    return CrossSection::gauss_tilted(param(spec, "a", 1.0), param(spec, "b", 0.5), param(spec, "shift", 1.0),
                                      param(spec, "shift_z", 0.0));
  if (spec.name == "tabulated") {
    if (spec.path.empty()) throw ValidationError("cross_section.path: required for \"tabulated\"");
    return CrossSection::tabulated(spec.path);
  }
  throw ValidationError("cross_section.name: unknown kernel \"" + spec.name + "\"");
}

}  // namespace gyrodiff
