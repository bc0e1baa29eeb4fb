#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "gyrodiff/cell.hpp"
#include "gyrodiff/collision.hpp"
#include "gyrodiff/cross_section.hpp"
#include "gyrodiff/grid.hpp"
#include "gyrodiff/kinetic.hpp"
#include "gyrodiff/macro.hpp"

namespace gyrodiff {

// One flat JSON object; every key is optional and falls back to the default
// below. Unknown keys are rejected so typos do not silently use defaults.
struct RunConfig {
  GridParams grid;
  CrossSectionSpec cross_section;
  std::size_t dense_budget = KernelOptions{}.dense_budget;

  std::vector<double> eta{0.5, 1.0, 2.0};
  std::vector<double> eps{0.2, 0.1, 0.05};
  SolveMethod method = SolveMethod::direct;
  bool adjoint = false;
  CellOptions cell;

  Geometry geometry = Geometry::slab_z;
  int cells = 64;
  double length = 8.0;
  FieldSpec field;
  std::array<int, 3> field_mode{0, 0, 1};
  DensityProfile initial;
  double t_end = 0.5;
  double dt = 0.0;
  std::vector<double> snapshots;
  bool dump_full = false;

  MacroEquation equation = MacroEquation::drift_diffusion;
  double d_z = -1.0;  // < 0: take D_z from the expansion
  bool implicit_z = false;
  int macro_refine = 5;
  double macro_dt = 0.0;

  int workers = 0;
  unsigned long long seed = 20240611ULL;

  SpaceGrid space() const { return SpaceGrid::make(geometry, cells, length); }
  // The field with k resolved against the spatial mesh.
  FieldSpec resolved_field() const;
  nlohmann::ordered_json to_json() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace gyrodiff
