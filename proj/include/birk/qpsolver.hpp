#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "birk/jacobian.hpp"
#include "birk/projector.hpp"
#include "birk/types.hpp"

namespace birk {

/// Self-adjoint positive semidefinite linear map on n-by-n matrices.
class QOperator {
 public:
  virtual ~QOperator() = default;
  virtual Index n() const = 0;
  virtual Matrix apply(const Matrix& X) const = 0;
  virtual bool is_zero() const { return false; }
};

class ZeroOperator final : public QOperator {
 public:
  explicit ZeroOperator(Index n) : n_(n) {}
  Index n() const override { return n_; }
  Matrix apply(const Matrix& X) const override;
  bool is_zero() const override { return true; }

 private:
  Index n_;
};

class IdentityOperator final : public QOperator {
 public:
  explicit IdentityOperator(Index n) : n_(n) {}
  Index n() const override { return n_; }
  Matrix apply(const Matrix& X) const override;

 private:
  Index n_;
};

/// X -> A X B - S X - X T (three matrix multiplications per application).
class QapOperator final : public QOperator {
 public:
  QapOperator(Matrix A, Matrix B, Matrix S, Matrix T);
  Index n() const override { return A_.rows(); }
  Matrix apply(const Matrix& X) const override;

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& S() const { return S_; }
  const Matrix& T() const { return T_; }

 private:
  Matrix A_, B_, S_, T_;
};

/// Arbitrary map given by a symmetric n^2-by-n^2 matrix acting on vec(X)
/// (column-major). Small-scale use only.
class DenseVecOperator final : public QOperator {
 public:
  explicit DenseVecOperator(Matrix Q_on_vec);
  Index n() const override { return n_; }
  Matrix apply(const Matrix& X) const override;
  const Matrix& matrix() const { return Qvec_; }

 private:
  Index n_;
  Matrix Qvec_;
};

/// delta*_{B_n}(Z) evaluated via the normal-cone identity <Z, Pi(Zw)>; exact
/// when Z = sigma^-1 (V - Pi(V)) and PiZw = Pi(V) for some V.
double support_function_value(const Matrix& Z, const Matrix& PiZw);

struct PsiEval {
  double psi = 0.0;
  Matrix grad;
  Matrix Zw;
  Matrix PiZw;
  ProjectionResult proj;
};

/// psi(W) = inf_Z L_sigma(Z, W; Xhat) and its gradient Q W - Q Pi(Z(W)),
/// with Z(W) = Xhat - sigma (Q W + G).
PsiEval psi_value_and_grad(const Matrix& W, const Matrix& Xhat, double sigma,
                           const Matrix& G, const QOperator& q,
                           const std::optional<Vector>& proj_warm = {});

struct Ssn2Settings {
  double mu = 1e-4;
  double eta_bar = 1e-2;
  double tau = 0.5;
  double delta = 0.5;
  int maxit = 100;
  int cg_maxit = 200;
  double proj_tol = 1e-12;  // accuracy of the inner Birkhoff projections
};

struct InnerResult {
  Matrix W;
  Matrix Z;
  Matrix X_next;  // Pi(Z(W)), the multiplier update of the outer loop
  int newton_iters = 0;
  bool criterionA = false;
  bool criterionB = false;
  double gap = 0.0;    // Psi_k - f_k at acceptance
  double gamma = 0.0;  // distance of X_next to the Birkhoff polytope
};

/// Inner solver for the ALM subproblem: semismooth Newton on grad psi = 0
/// using the reduced system (I + sigma P Q) dW = Pi(Z(W)) - W, with P the
/// HS-Jacobian at Z(W). Terminates on stopping criterion (A) evaluated
/// against (eps_k, delta_k); criterion (B) status is recorded as well.
/// proj_warm carries the dual warm start across projection calls.
InnerResult ssncg2_solve(const Matrix& Xhat, double sigma, const Matrix& G,
                         const QOperator& q, double eps_k, double delta_k,
                         const Matrix& W0, Vector* proj_warm,
                         const Ssn2Settings& settings = {});

struct AlmSettings {
  double sigma0 = 1.0;
  double sigma_max = 1e6;
  double sigma_growth = 3.0;
  int max_outer = 100;
  double time_limit = 0.0;  // seconds; 0 means no limit
  Ssn2Settings inner;
};

struct AlmTraceEntry {
  double eta = 0.0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double dual_infeas = 0.0;  // ||Z + Q W + G||
  double gap = 0.0;
  double gamma = 0.0;
  int inner_iters = 0;
  double sigma = 0.0;
  bool criterionA = false;
  bool criterionB = false;
};

struct QpResult {
  Matrix X;
  Matrix W;
  Matrix Z;
  double objective = 0.0;  // 1/2 <X, Q X> + <G, X>
  double eta = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  double wall_time = 0.0;
  bool converged = false;
  std::vector<AlmTraceEntry> trace;
};

/// Augmented Lagrangian method for
///   min 1/2 <X, Q X> + <G, X>  over the Birkhoff polytope.
/// Stops when ||X - Pi(X - (Q X + G))|| / (1 + ||X|| + ||Q X + G||) <= tol_eta.
QpResult alm_solve(const Matrix& G, const QOperator& q, double tol_eta = 1e-7,
                   const AlmSettings& settings = {});

}  // namespace birk
