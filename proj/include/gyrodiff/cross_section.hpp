#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "gyrodiff/grid.hpp"

namespace gyrodiff {

// Symmetric scattering kernel sigma(v, v') with alpha1 <= sigma <= alpha2.
// Either an analytic evaluator or a table indexed by grid node.
class CrossSection {
 public:
  using Evaluator = std::function<double(const Vec3&, const Vec3&)>;

  // Samples random pairs and rejects asymmetric or out-of-bounds kernels.
  CrossSection(std::string label, Evaluator eval, double alpha1, double alpha2);

  static CrossSection constant(double tau);
  static CrossSection gauss_mix(double a, double b);
  // a + b exp(-|v-c|^2/2) exp(-|v'-c|^2/2) with c = (shift, 0, shift_z):
  // symmetric but not invariant under joint rotations about e_z; a nonzero
  // shift_z also breaks the v_z -> -v_z parity.
  static CrossSection gauss_tilted(double a, double b, double shift, double shift_z = 0.0);
  // CSV rows (i, j, value) over node indices; missing mirrored pairs are
  // filled by symmetry, bounds are the table extrema.
  static CrossSection tabulated(const std::string& path);

  const std::string& label() const { return label_; }
  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }
  bool is_constant() const { return constant_.has_value(); }
  double constant_value() const { return constant_.value_or(0.0); }
  bool is_tabulated() const { return table_ != nullptr; }
  std::size_t table_size() const { return table_ ? static_cast<std::size_t>(table_->rows()) : 0; }

  // sigma between grid nodes i and j.
  double between(const VelocityGrid& grid, std::size_t i, std::size_t j) const;
  // Analytic kernels only.
  double operator()(const Vec3& v, const Vec3& w) const;

 private:
  CrossSection() = default;
  void check_samples() const;

  std::string label_;
  Evaluator eval_;
  std::shared_ptr<const Eigen::MatrixXd> table_;
  std::optional<double> constant_;
  double alpha1_ = 0.0;
  double alpha2_ = 0.0;
};

struct CrossSectionSpec {
  std::string name = "constant";
  std::map<std::string, double> params;
  std::string path;
};

// Registry lookup: "constant" (tau), "gauss_mix" (a, b), "gauss_tilted"
// (a, b, shift, shift_z), "tabulated" (path).
CrossSection make_cross_section(const CrossSectionSpec& spec);

}  // namespace gyrodiff
