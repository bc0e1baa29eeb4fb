#pragma once

#include <array>
#include <memory>
#include <string>

#include "gyrodiff/collision.hpp"
#include "gyrodiff/grid.hpp"

namespace gyrodiff {

enum class SolveMethod { direct, fixed_point };
SolveMethod parse_method(const std::string& name);
std::string to_string(SolveMethod m);

struct CellOptions {
  // "Zero average / zero mass" preconditions, relative to the datum's norm.
  double tol_zero = 1e-8;
  // Data with ||.||_M at or below this count as zero (roundoff residue of
  // an exact cancellation).
  double norm_floor = 0.0;
  // Fixed-point stopping rule.
  double fp_tol = 1e-10;
  int max_iter = 10000;
};

struct SolveInfo {
  double residual = 0.0;     // ||op(f) - rhs||_M / ||rhs||_M
  int iterations = 0;
  double contraction = 0.0;  // fixed point: ratio of the last two updates
  double stability = 0.0;    // ||f||_M / ||rhs||_M
};

// A_1 g = K g - A(nu K g) / nu_bar, with K the zero-mean inverse of G on
// each ring. Requires A(g) = 0 (and, for even n_angle, no Nyquist mode).
Distribution average_A1(const CollisionKernel& k, const Distribution& g, const CellOptions& options = {});

// Solver for -Q^eta f = g, mass(f) = 0 (adjoint: -Q^{eta*}). The direct
// method factors the bordered matrix [[-Q^eta, M], [w^T, 0]] once; for the
// constant kernel the gain is rank one and the bordered system is solved
// with S^{-1} only. The fixed-point method iterates f <- L_eta(Q+ f + g).
class QetaSolver {
 public:
  QetaSolver(const CollisionKernel& k, double eta, SolveMethod method, CellOptions options = {},
             bool adjoint = false);
  ~QetaSolver();
  QetaSolver(QetaSolver&&) noexcept;

  Distribution solve(const Distribution& g, SolveInfo* info = nullptr) const;
  double eta() const { return eta_; }
  SolveMethod method() const { return method_; }

 private:
  struct Impl;
  const CollisionKernel* kernel_;
  double eta_;
  SolveMethod method_;
  CellOptions options_;
  bool adjoint_;
  std::unique_ptr<Impl> impl_;
};

Distribution solve_qeta_cell(const CollisionKernel& k, const Distribution& g, double eta,
                             SolveMethod method = SolveMethod::direct, const CellOptions& options = {},
                             SolveInfo* info = nullptr);

struct CellSolution {
  std::array<Distribution, 2> x_perp;
  Distribution x_z;
  double eta = 0.0;
  double residual_norm = 0.0;
  double mass_defect = 0.0;
  SolveMethod method = SolveMethod::direct;
  bool adjoint = false;
  // sqrt(||X_z||^2 + ||eta^2 X_perp||^2) against ||v M||_M / (alpha1 massM).
  double bound_lhs = 0.0;
  double bound_rhs = 0.0;
  bool bound_ok = false;
};

// Three solves with right sides (v_x/eta^2) M, (v_y/eta^2) M, v_z M.
CellSolution solve_chi_eta(const CollisionKernel& k, double eta, SolveMethod method = SolveMethod::direct,
                           const CellOptions& options = {}, bool adjoint = false);

// Qbarbar f = g on cylindrically symmetric data, solved on the ring subgrid.
Distribution solve_qbarbar(const CollisionKernel& k, const Distribution& g, const CellOptions& options = {},
                           SolveInfo* info = nullptr);
// Qbar f = g, solvable iff int nu g / nu_bar = 0.
Distribution solve_qbar(const CollisionKernel& k, const Distribution& g, const CellOptions& options = {},
                        SolveInfo* info = nullptr);
// G f = g, A(Q f) = h with mass(f) = 0.
Distribution solve_gyration_system(const CollisionKernel& k, const Distribution& g, const Distribution& h,
                                   const CellOptions& options = {});

struct ExpansionTerms {
  Distribution xz0;
  Distribution xz1;
  std::array<Distribution, 2> xperp0;
  std::array<Distribution, 2> xperp1;
};

ExpansionTerms compute_expansion(const CollisionKernel& k, const CellOptions& options = {});

// |X(v)| <= (intercept + slope |v|) M(v) at every node: least-squares line
// through |X|/M against |v|, lifted to an upper envelope.
struct PolynomialEnvelope {
  double intercept = 0.0;
  double slope = 0.0;
};
PolynomialEnvelope polynomial_envelope(const Distribution& x);

}  // namespace gyrodiff
