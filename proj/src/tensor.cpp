#include "gyrodiff/tensor.hpp"

#include <cmath>

#include "gyrodiff/errors.hpp"

namespace gyrodiff {

namespace {

// int v_c f dv
double moment(const Distribution& f, int c) { return flux(f)[c]; }

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::direct: return "direct";
    case Provenance::adjoint: return "adjoint";
    case Provenance::expansion: return "expansion";
    default: return "closed_form";
  }
}

Eigen::Vector3d drift_vector(const Eigen::Matrix3d& a) { return -Eigen::Vector3d(a(2, 1), a(0, 2), a(1, 0)); }

DiffusionTensor make_tensor(const Eigen::Matrix3d& d, double eta, Provenance provenance) {
  DiffusionTensor t;
  t.d = d;
  t.sym = 0.5 * (d + d.transpose());
  t.antisym = 0.5 * (d - d.transpose());
  t.u_drift = drift_vector(t.antisym);
  t.eta = eta;
  t.provenance = provenance;
  return t;
}

DiffusionTensor assemble_D_eta(const CellSolution& cell) {
  const double eta = cell.eta;
  const std::array<const Distribution*, 3> x{&cell.x_perp[0], &cell.x_perp[1], &cell.x_z};
  const Eigen::Vector3d scale(eta, eta, 1.0);
  Eigen::Matrix3d d;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!cell.adjoint)
        d(i, j) = scale(j) / scale(i) * moment(*x[j], i);
      else
        d(i, j) = scale(i) / scale(j) * moment(*x[i], j);
    }
  }
  auto t = make_tensor(d, eta, cell.adjoint ? Provenance::adjoint : Provenance::direct);
  t.residual = cell.residual_norm;
  return t;
}

double d_parallel(const ExpansionTerms& terms) { return moment(terms.xz0, 2); }

Eigen::Matrix3d d0_zperp(const ExpansionTerms& terms) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int c = 0; c < 2; ++c) {
    const double s = moment(terms.xperp0[c], 2);
    m(2, c) = s;
    m(c, 2) = -s;
  }
  return m;
}

Eigen::Matrix3d d1_zperp(const ExpansionTerms& terms) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int c = 0; c < 2; ++c) {
    const double s = moment(terms.xperp1[c], 2);
    m(2, c) = s;
    m(c, 2) = s;
  }
  return m;
}

DiffusionTensor expansion_tensor(const ExpansionTerms& terms, double eta) {
  require_positive_eta(eta);
  Eigen::Matrix2d l0, l1;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      l0(i, j) = moment(terms.xperp0[j], i);
      l1(i, j) = moment(terms.xperp1[j], i);
    }
  }
  const double e2 = eta * eta;
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  // order 1: the gyration block int v_perp (x) X_perp^(0) (antisymmetric,
  // equal to I up to quadrature of int v_x^2 M); order eta^2: the symmetric
  // perpendicular diffusion
  d.topLeftCorner<2, 2>() = 0.5 * (l0 - l0.transpose()) + e2 * 0.5 * (l1 + l1.transpose());
  d(2, 2) = d_parallel(terms);
  d += eta * d0_zperp(terms) + eta * e2 * d1_zperp(terms);
  return make_tensor(d, eta, Provenance::expansion);
}

DiffusionTensor relaxation_reference(double tau, double eta) {
  if (!(tau > 0.0) || !(eta > 0.0)) throw ValidationError("relaxation_reference: tau and eta must be > 0");
  const double e2 = eta * eta;
  const double den = tau * tau + e2 * e2;
  Eigen::Matrix3d d;
  d << e2 / den, tau / den, 0.0, -tau / den, e2 / den, 0.0, 0.0, 0.0, 1.0;
  return make_tensor(tau * d, eta, Provenance::closed_form);
}

nlohmann::ordered_json matrix_json(const Eigen::Matrix3d& m) {
  auto out = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i) out.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return out;
}

nlohmann::ordered_json to_json(const DiffusionTensor& t) {
  nlohmann::ordered_json j;
  j["eta"] = t.eta;
  j["provenance"] = to_string(t.provenance);
  j["matrix"] = matrix_json(t.d);
  j["sym"] = matrix_json(t.sym);
  j["antisym"] = matrix_json(t.antisym);
  j["u_drift"] = {t.u_drift(0), t.u_drift(1), t.u_drift(2)};
  j["residual"] = t.residual;
  return j;
}

}  // namespace gyrodiff
