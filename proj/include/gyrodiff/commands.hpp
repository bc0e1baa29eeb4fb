#pragma once

#include <json.hpp>
#include <string>

#include "gyrodiff/config.hpp"

namespace gyrodiff {

// Each command writes its CSV artifacts and report.json into out_dir (created
// if missing; nothing is written when out_dir is empty) and returns the
// report. Reports embed the resolved config and the grid's Maxwellian deficit.
nlohmann::ordered_json cmd_cell_problem(const RunConfig& cfg, const std::string& out_dir);
nlohmann::ordered_json cmd_diffusion_matrix(const RunConfig& cfg, const std::string& out_dir);
nlohmann::ordered_json cmd_expansion_study(const RunConfig& cfg, const std::string& out_dir);
nlohmann::ordered_json cmd_kinetic(const RunConfig& cfg, const std::string& out_dir);
nlohmann::ordered_json cmd_macro(const RunConfig& cfg, const std::string& out_dir);
nlohmann::ordered_json cmd_convergence(const RunConfig& cfg, const std::string& out_dir);

nlohmann::ordered_json run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir);

}  // namespace gyrodiff
