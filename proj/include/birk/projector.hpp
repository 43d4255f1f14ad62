#pragma once

#include <optional>
#include <vector>

#include "birk/linops.hpp"
#include "birk/types.hpp"

namespace birk {

/// Dual objective value, gradient and the primal candidate at a dual point y:
///   phi(y) = 1/2 ||Pi_C(B^* y + G)||^2 - <b, y> - 1/2 ||G||^2,
///   grad   = B Pi_C(B^* y + G) - b,
/// where C is the nonnegative orthant.
struct DualState {
  Vector y;
  Matrix Xcand;
  Vector grad;
  double phi = 0.0;
};

DualState dual_value_and_grad(const Matrix& G, const Vector& y);

/// Mask of entries with Z(i,j) >= 0; exact zeros count as active.
BinaryMask active_mask(const Matrix& Z);

struct SsnSettings {
  double mu = 1e-4;       // Armijo constant, in (0, 1/2)
  double eta_bar = 1e-2;  // cap on the CG residual target, in (0, 1)
  double tau1 = 1e-3;     // regularization scale, in (0, 1)
  double tau2 = 0.1;      // regularization cap, in (0, 1)
  double tau = 0.5;       // CG tightening exponent, in (0, 1]
  double delta = 0.5;     // backtracking ratio, in (0, 1)
  double tol_eta = 1e-9;
  int maxit = 1000;
  int cg_maxit = 500;
  double time_limit = 0.0;  // seconds; 0 means no limit
};

struct IterTrace {
  double eta = 0.0;
  double grad_norm = 0.0;
  int cg_iters = 0;
  double step = 0.0;
};

struct ProjectionResult {
  Matrix X;
  Vector y;
  double eta = 0.0;
  double etaP = 0.0;
  double etaC = 0.0;  // identically zero for dual-method results
  int newton_iters = 0;
  int total_cg_iters = 0;
  int linesearch_steps = 0;
  double wall_time = 0.0;
  bool converged = false;
  std::vector<IterTrace> trace;
};

/// Projection onto the Birkhoff polytope by a semismooth Newton-CG method on
/// the dual problem. Starts from zero (or the warm start projected onto
/// Range(B)).
ProjectionResult ssncg1_project(const Matrix& G, const SsnSettings& settings = {},
                                const std::optional<Vector>& warm_start = {});

/// First-order baseline: accelerated proximal gradient on the dual, with a
/// function-value restart.
ProjectionResult apg_project(const Matrix& G, double tol_eta = 1e-9,
                             int maxit = 20000);

struct KktResiduals {
  double etaP = 0.0;
  double etaC = 0.0;
  double eta = 0.0;
};

/// etaP = ||B X - b|| / (1 + ||b||), etaC = ||X - Pi_C(B^* y + G)|| / (1 + ||X||).
KktResiduals kkt_residuals(const Matrix& G, const Matrix& X, const Vector& y);

}  // namespace birk
