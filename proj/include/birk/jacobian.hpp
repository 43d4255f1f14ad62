#pragma once

#include "birk/linops.hpp"
#include "birk/projector.hpp"
#include "birk/types.hpp"

namespace birk {

/// HS-generalized-Jacobian of the Birkhoff projector at G, applied matrix-free:
///   P(H) = Xi(H) - Xi B^* (B Xi B^*)^dagger B Xi(H),
/// where Xi(H) = H - Theta o H and Theta marks the zero entries of the
/// computed projection. The pseudo-inverse action is realized by CG from the
/// zero start (the right-hand side lies in the operator's range, so CG
/// converges to the minimum-norm solution).
class HsJacobianOp {
 public:
  HsJacobianOp(BinaryMask theta, double inner_tol, int inner_maxit);

  Index n() const { return theta_.n(); }
  const BinaryMask& theta() const { return theta_; }

  /// Applies P to H. Optionally reports the inner CG residual and iteration
  /// count; an unconverged inner solve is reported there, not thrown.
  Matrix apply(const Matrix& H, double* inner_relres = nullptr,
               int* inner_iters = nullptr) const;

 private:
  BinaryMask theta_;       // zero pattern of the projection
  BinaryMask support_;     // its complement
  double inner_tol_;
  int inner_maxit_;
};

/// Threshold below which an entry of a computed projection counts as zero.
inline double projection_zero_tol(const Matrix& G) {
  return 1e-11 * (1.0 + G.norm());
}

/// Builds the HS-Jacobian from a converged projection of G (eta <= 1e-9
/// required).
HsJacobianOp build_hs_jacobian(const Matrix& G, const ProjectionResult& proj);

/// D = {x : A x >= b, B x = d}; dense small-scale representation used by the
/// general polyhedral oracles.
struct PolyhedronDense {
  Matrix A;
  Vector b;
  Matrix B;
  Vector d;
};

/// SVD-based pseudo-inverse with singular values below 1e-12 sigma_max cut.
Matrix dense_pinv(const Matrix& M);

/// H^T (H H^T)^dagger H: the orthogonal projector onto Range(H^T).
Matrix dense_range_projector(const Matrix& H);

/// P0 = I - [A_I; B]^T ([A_I; B] [A_I; B]^T)^dagger [A_I; B] with
/// I = {i : A_i proj_x = b_i} (tolerance 1e-8).
Matrix dense_p0(const PolyhedronDense& poly, const Vector& x,
                const Vector& proj_x);

/// Sigma - Sigma H^T (H Sigma H^T)^dagger H Sigma with Sigma = I - Diag(theta).
Matrix dense_p_reduced(const Vector& theta, const Matrix& H);

/// The 2n-by-n^2 matrix representation of the Birkhoff constraint map with
/// respect to column-major vectorization.
Matrix dense_birkhoff_constraint_matrix(Index n);

struct LinearizationCheck {
  bool active_set_changed = false;
  double residual = 0.0;
};

/// Checks Pi(G + tH) = Pi(G) + t P(H) with two high-accuracy projections.
/// Reports an active-set mismatch distinctly instead of a residual claim.
LinearizationCheck local_linearization_check(const Matrix& G, const Matrix& H,
                                             double t);

}  // namespace birk
