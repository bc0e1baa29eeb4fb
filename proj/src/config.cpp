#include "gyrodiff/config.hpp"

#include <fstream>
#include <set>

#include "gyrodiff/errors.hpp"

namespace gyrodiff {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {
    "n_radial", "n_angle", "n_parallel", "v_max_perp", "v_max_par", "cross_section", "tau", "a", "b", "shift",
    "shift_z", "table", "dense_budget", "eta", "eps", "method", "adjoint", "tol_zero", "fp_tol", "max_iter",
    "geometry", "cells", "length", "field", "e", "amplitude", "mode", "omega", "modulation", "initial", "rho_base",
    "rho_amplitude", "rho_width", "rho_mode", "t_end", "dt", "snapshots", "dump_full", "equation", "d_z",
    "implicit_z", "macro_refine", "macro_dt", "workers", "seed"};

template <class T>
T get(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field \"" + key + "\": wrong type (" + j.at(key).dump() + ")");
  }
}

double number(const json& j, const std::string& key, double fallback) {
  if (j.contains(key) && !j.at(key).is_number())
    throw ValidationError("config field \"" + key + "\": expected a number");
  return get<double>(j, key, fallback);
}

int integer(const json& j, const std::string& key, int fallback) {
  if (j.contains(key) && !j.at(key).is_number_integer())
    throw ValidationError("config field \"" + key + "\": expected an integer");
  return get<int>(j, key, fallback);
}

std::vector<double> number_list(const json& j, const std::string& key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ValidationError("config field \"" + key + "\": expected a number or a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError("config field \"" + key + "\": expected a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <class T>
std::array<T, 3> triple(const json& j, const std::string& key, std::array<T, 3> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) throw ValidationError("config field \"" + key + "\": expected 3 numbers");
  std::array<T, 3> out{};
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ValidationError("config field \"" + key + "\": expected 3 numbers");
    out[i] = v[i].get<T>();
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError("config field \"" + key + "\": " + what);
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw ValidationError("config field \"" + key + "\": unknown key");

  RunConfig c;
  c.grid.n_radial = integer(j, "n_radial", c.grid.n_radial);
  c.grid.n_angle = integer(j, "n_angle", c.grid.n_angle);
  c.grid.n_parallel = integer(j, "n_parallel", c.grid.n_parallel);
  c.grid.v_max_perp = number(j, "v_max_perp", c.grid.v_max_perp);
  c.grid.v_max_par = number(j, "v_max_par", c.grid.v_max_par);
  require(c.grid.n_radial >= 2, "n_radial", "must be >= 2");
  require(c.grid.n_angle >= 2, "n_angle", "must be >= 2");
  require(c.grid.n_parallel >= 2, "n_parallel", "must be >= 2");
  require(c.grid.v_max_perp > 0.0, "v_max_perp", "must be > 0");
  require(c.grid.v_max_par > 0.0, "v_max_par", "must be > 0");

  c.cross_section.name = get<std::string>(j, "cross_section", "constant");
  for (const char* p : {"tau", "a", "b", "shift", "shift_z"})
    if (j.contains(p)) c.cross_section.params[p] = number(j, p, 0.0);
  c.cross_section.path = get<std::string>(j, "table", "");
  const auto& n = c.cross_section.name;
  require(n == "constant" || n == "gauss_mix" || n == "gauss_tilted" || n == "tabulated", "cross_section",
          "expected constant, gauss_mix, gauss_tilted or tabulated");
  require(n != "tabulated" || !c.cross_section.path.empty(), "table", "required for a tabulated cross section");
  if (j.contains("dense_budget")) {
    const int b = integer(j, "dense_budget", 0);
    require(b >= 0, "dense_budget", "must be >= 0");
    c.dense_budget = static_cast<std::size_t>(b);
  }

  c.eta = number_list(j, "eta", c.eta);
  c.eps = number_list(j, "eps", c.eps);
  require(!c.eta.empty(), "eta", "list is empty");
  require(!c.eps.empty(), "eps", "list is empty");
  for (double v : c.eta) require(v > 0.0 && std::isfinite(v), "eta", "values must be > 0");
  for (double v : c.eps) require(v > 0.0 && std::isfinite(v), "eps", "values must be > 0");
  try {
    c.method = parse_method(get<std::string>(j, "method", "direct"));
  } catch (const ValidationError&) {
    throw ValidationError("config field \"method\": expected direct or fixed_point");
  }
  c.adjoint = get<bool>(j, "adjoint", false);
  c.cell.tol_zero = number(j, "tol_zero", c.cell.tol_zero);
  c.cell.fp_tol = number(j, "fp_tol", c.cell.fp_tol);
  c.cell.max_iter = integer(j, "max_iter", c.cell.max_iter);
  require(c.cell.tol_zero > 0.0, "tol_zero", "must be > 0");
  require(c.cell.fp_tol > 0.0, "fp_tol", "must be > 0");
  require(c.cell.max_iter >= 1, "max_iter", "must be >= 1");

  try {
    c.geometry = parse_geometry(get<std::string>(j, "geometry", "slab_z"));
  } catch (const ValidationError&) {
    throw ValidationError("config field \"geometry\": expected homogeneous, slab_z or perp_xy");
  }
  c.cells = integer(j, "cells", c.cells);
  c.length = number(j, "length", c.length);
  require(c.cells >= 2, "cells", "must be >= 2");
  require(c.length > 0.0, "length", "must be > 0");

  c.field.kind = get<std::string>(j, "field", "zero");
  require(c.field.kind == "zero" || c.field.kind == "uniform" || c.field.kind == "cosine", "field",
          "expected zero, uniform or cosine");
  c.field.e = triple<double>(j, "e", {0.0, 0.0, 0.0});
  c.field.amplitude = number(j, "amplitude", 0.0);
  c.field_mode = triple<int>(j, "mode", c.geometry == Geometry::perp_xy ? std::array<int, 3>{1, 0, 0}
                                                                         : std::array<int, 3>{0, 0, 1});
  c.field.omega = number(j, "omega", 0.0);
  c.field.modulation = number(j, "modulation", 0.0);
  require(std::abs(c.field.modulation) <= 1.0, "modulation", "must lie in [-1, 1]");
  try {
    c.resolved_field().check_geometry(c.space());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config field \"") + (c.field.kind == "cosine" ? "mode" : "e") +
                          "\": " + e.what());
  }

  c.initial.kind = get<std::string>(j, "initial", "gaussian");
  require(c.initial.kind == "gaussian" || c.initial.kind == "cosine" || c.initial.kind == "uniform" ||
              c.initial.kind == "zero",
          "initial", "expected gaussian, cosine, uniform or zero");
  c.initial.base = number(j, "rho_base", 0.0);
  c.initial.amplitude = number(j, "rho_amplitude", 1.0);
  c.initial.width = number(j, "rho_width", 0.5);
  c.initial.mode = integer(j, "rho_mode", 1);
  require(c.initial.width > 0.0, "rho_width", "must be > 0");

  c.t_end = number(j, "t_end", c.t_end);
  c.dt = number(j, "dt", c.dt);
  require(c.t_end >= 0.0 && std::isfinite(c.t_end), "t_end", "must be >= 0");
  require(c.dt >= 0.0 && std::isfinite(c.dt), "dt", "must be >= 0 (0 selects the default step)");
  c.snapshots = number_list(j, "snapshots", {});
  for (double s : c.snapshots) require(s >= 0.0 && s <= c.t_end, "snapshots", "times must lie in [0, t_end]");
  c.dump_full = get<bool>(j, "dump_full", false);

  try {
    c.equation = parse_equation(get<std::string>(j, "equation", "drift_diffusion"));
  } catch (const ValidationError&) {
    throw ValidationError("config field \"equation\": expected drift_diffusion or guiding_center");
  }
  c.d_z = number(j, "d_z", c.d_z);
  c.implicit_z = get<bool>(j, "implicit_z", false);
  c.macro_refine = integer(j, "macro_refine", c.macro_refine);
  require(c.macro_refine >= 1 && c.macro_refine % 2 == 1, "macro_refine", "must be an odd integer >= 1");
  c.macro_dt = number(j, "macro_dt", 0.0);
  require(c.macro_dt >= 0.0, "macro_dt", "must be >= 0");

  c.workers = integer(j, "workers", 0);
  require(c.workers >= 0, "workers", "must be >= 0");
  if (j.contains("seed")) {
    require(j.at("seed").is_number_unsigned(), "seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<unsigned long long>();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

FieldSpec RunConfig::resolved_field() const {
  if (field.kind != "cosine") return field;
  FieldSpec f = FieldSpec::cosine(field.amplitude, field_mode, space(), field.omega, field.modulation);
  return f;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_radial"] = grid.n_radial;
  j["n_angle"] = grid.n_angle;
  j["n_parallel"] = grid.n_parallel;
  j["v_max_perp"] = grid.v_max_perp;
  j["v_max_par"] = grid.v_max_par;
  j["cross_section"] = cross_section.name;
  for (const auto& [k, v] : cross_section.params) j[k] = v;
  if (!cross_section.path.empty()) j["table"] = cross_section.path;
  j["dense_budget"] = dense_budget;
  j["eta"] = eta;
  j["eps"] = eps;
  j["method"] = to_string(method);
  j["adjoint"] = adjoint;
  j["tol_zero"] = cell.tol_zero;
  j["fp_tol"] = cell.fp_tol;
  j["max_iter"] = cell.max_iter;
  j["geometry"] = to_string(geometry);
  j["cells"] = cells;
  j["length"] = length;
  j["field"] = field.kind;
  j["e"] = field.e;
  j["amplitude"] = field.amplitude;
  j["mode"] = field_mode;
  j["omega"] = field.omega;
  j["modulation"] = field.modulation;
  j["initial"] = initial.kind;
  j["rho_base"] = initial.base;
  j["rho_amplitude"] = initial.amplitude;
  j["rho_width"] = initial.width;
  j["rho_mode"] = initial.mode;
  j["t_end"] = t_end;
  j["dt"] = dt;
  j["snapshots"] = snapshots;
  j["dump_full"] = dump_full;
  j["equation"] = to_string(equation);
  j["d_z"] = d_z;
  j["implicit_z"] = implicit_z;
  j["macro_refine"] = macro_refine;
  j["macro_dt"] = macro_dt;
  j["workers"] = workers;
  j["seed"] = seed;
  return j;
}

}  // namespace gyrodiff
