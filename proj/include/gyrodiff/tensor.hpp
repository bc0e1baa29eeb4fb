#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>

#include "gyrodiff/cell.hpp"

namespace gyrodiff {

enum class Provenance { direct, adjoint, expansion, closed_form };
std::string to_string(Provenance p);

struct DiffusionTensor {
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d sym = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d antisym = Eigen::Matrix3d::Zero();
  // -antisym Z = u_drift x Z.
  Eigen::Vector3d u_drift = Eigen::Vector3d::Zero();
  double eta = 0.0;
  Provenance provenance = Provenance::direct;
  double residual = 0.0;  // cell-solve residual behind the entries, if any
};

DiffusionTensor make_tensor(const Eigen::Matrix3d& d, double eta, Provenance provenance);
Eigen::Vector3d drift_vector(const Eigen::Matrix3d& antisym);

// D_ij = int (v_perp/eta, v_z)_i (eta X_perp, X_z)_j dv. From an adjoint
// cell solution the same matrix is D_ij = int (eta X*_perp, X*_z)_i
// (v_perp/eta, v_z)_j dv.
DiffusionTensor assemble_D_eta(const CellSolution& cell);

// D_z = int X_z^(0) v_z dv.
double d_parallel(const ExpansionTerms& terms);

// Truncated small-eta expansion of D^eta built from the order-0 and order-1
// cell terms.
DiffusionTensor expansion_tensor(const ExpansionTerms& terms, double eta);

// Closed form for sigma = 1/tau.
DiffusionTensor relaxation_reference(double tau, double eta);

// Blocks of the expansion: D0_zperp (antisymmetric, order eta) and
// D1_zperp (symmetric, order eta^3).
Eigen::Matrix3d d0_zperp(const ExpansionTerms& terms);
Eigen::Matrix3d d1_zperp(const ExpansionTerms& terms);

nlohmann::ordered_json to_json(const DiffusionTensor& t);
nlohmann::ordered_json matrix_json(const Eigen::Matrix3d& m);

}  // namespace gyrodiff
