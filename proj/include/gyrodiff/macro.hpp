#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gyrodiff/kinetic.hpp"

namespace gyrodiff {

struct MacroField {
  SpaceGrid space;
  Eigen::VectorXd rho;
  double time = 0.0;

  static MacroField from_density(const SpaceGrid& space, const DensityProfile& profile);
  double total_mass() const;
};

enum class MacroEquation { drift_diffusion, guiding_center };
MacroEquation parse_equation(const std::string& name);
std::string to_string(MacroEquation e);

// Finite volumes on the periodic mesh for
//   d_t rho - div(D (grad rho - rho E)) = 0.
// Diagonal diffusion uses the flux -D e^{-V} d(rho e^{V}) so that e^{-V} is
// an exact fixed point; off-diagonal symmetric entries are central; the
// antisymmetric part becomes the advective flux rho D_as E, upwinded.
struct MacroOptions {
  bool implicit_z = false;  // backward Euler for the z diffusion
};

class MacroStepper {
 public:
  MacroStepper(const SpaceGrid& space, const Eigen::Matrix3d& d, FieldSpec spec, double dt,
               MacroOptions options = {});

  void step(MacroField& field) const;
  double dt() const { return dt_; }
  // Largest dt keeping the explicit part positivity preserving at time t.
  double stable_dt(double t) const;

 private:
  struct Faces;
  Faces faces(double t) const;

  SpaceGrid space_;
  Eigen::Matrix3d d_;
  FieldSpec spec_;
  double dt_;
  MacroOptions options_;
};

MacroField step_drift_diffusion(const MacroField& rho, const Eigen::Matrix3d& d, const FieldSpec& spec, double dt,
                                MacroOptions options = {});
// d_t rho + d_z J_z + div(rho E x e_z) = 0, J_z = -D_z (d_z rho - E_z rho).
MacroField step_guiding_center(const MacroField& rho, double d_z, const FieldSpec& spec, double dt,
                               MacroOptions options = {});
Eigen::Matrix3d guiding_center_tensor(double d_z);

struct MacroRunSpec {
  SpaceGrid space;
  FieldSpec field;
  DensityProfile initial;
  MacroEquation equation = MacroEquation::drift_diffusion;
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();  // drift_diffusion
  double d_z = 1.0;                                 // guiding_center
  double t_end = 0.5;
  double dt = 0.0;  // 0: 0.9 of the stability bound at t = 0
  std::vector<double> snapshot_times;
  MacroOptions options;
};

struct MacroResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> snapshots;
  MacroField final_field;
  int steps = 0;
  double dt = 0.0;
  double max_mass_drift = 0.0;
  bool positive = true;  // rho stayed >= 0 whenever the data was
};

// Writes snapshot_<k>.csv (x,y,z,rho) into out_dir unless it is empty.
MacroResult run_macro(const MacroRunSpec& spec, const std::string& out_dir = "");

void write_density_csv(const std::string& path, const SpaceGrid& space, const Eigen::VectorXd& rho);

}  // namespace gyrodiff
