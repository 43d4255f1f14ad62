#include "birk/qpsolver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace birk {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double frob_dot(const Matrix& A, const Matrix& B) {
  return (A.array() * B.array()).sum();
}

}  // namespace

Matrix ZeroOperator::apply(const Matrix& X) const {
  if (X.rows() != n_ || X.cols() != n_)
    throw std::invalid_argument("ZeroOperator::apply: dimension mismatch");
  return Matrix::Zero(n_, n_);
}

Matrix IdentityOperator::apply(const Matrix& X) const {
  if (X.rows() != n_ || X.cols() != n_)
    throw std::invalid_argument("IdentityOperator::apply: dimension mismatch");
  return X;
}

QapOperator::QapOperator(Matrix A, Matrix B, Matrix S, Matrix T)
    : A_(std::move(A)), B_(std::move(B)), S_(std::move(S)), T_(std::move(T)) {
  const Index n = A_.rows();
  if (A_.cols() != n || B_.rows() != n || B_.cols() != n || S_.rows() != n ||
      S_.cols() != n || T_.rows() != n || T_.cols() != n)
    throw std::invalid_argument("QapOperator: inconsistent dimensions");
}

Matrix QapOperator::apply(const Matrix& X) const {
  if (X.rows() != n() || X.cols() != n())
    throw std::invalid_argument("QapOperator::apply: dimension mismatch");
  return A_ * X * B_ - S_ * X - X * T_;
}

DenseVecOperator::DenseVecOperator(Matrix Q_on_vec) : Qvec_(std::move(Q_on_vec)) {
  n_ = static_cast<Index>(std::lround(std::sqrt(double(Qvec_.rows()))));
  if (n_ * n_ != Qvec_.rows() || Qvec_.rows() != Qvec_.cols())
    throw std::invalid_argument("DenseVecOperator: matrix must be n^2 x n^2");
}

Matrix DenseVecOperator::apply(const Matrix& X) const {
  if (X.rows() != n_ || X.cols() != n_)
    throw std::invalid_argument("DenseVecOperator::apply: dimension mismatch");
  Vector v = Qvec_ * Eigen::Map<const Vector>(X.data(), n_ * n_);
  return Eigen::Map<const Matrix>(v.data(), n_, n_);
}

double support_function_value(const Matrix& Z, const Matrix& PiZw) {
  return frob_dot(Z, PiZw);
}

PsiEval psi_value_and_grad(const Matrix& W, const Matrix& Xhat, double sigma,
                           const Matrix& G, const QOperator& q,
                           const std::optional<Vector>& proj_warm) {
  if (!W.allFinite()) throw std::invalid_argument("psi_value_and_grad: non-finite W");
  PsiEval e;
  Matrix QW = q.apply(W);
  e.Zw = Xhat - sigma * (QW + G);
  SsnSettings ps;
  ps.tol_eta = 1e-12;
  e.proj = ssncg1_project(e.Zw, ps, proj_warm);
  e.PiZw = e.proj.X;
  e.psi = 0.5 * frob_dot(W, QW) + frob_dot(e.Zw, e.PiZw) / sigma -
          (e.PiZw.squaredNorm() + Xhat.squaredNorm()) / (2.0 * sigma);
  e.grad = QW - q.apply(e.PiZw);
  return e;
}

namespace {

// CG on the reduced Newton system (I + sigma P Q) dW = rhs, run in the
// Q-semi-inner product <a, b>_Q = <a, Q b>, under which the operator is
// self-adjoint and positive definite on Range(Q). Stopping is on the
// residual of the original system, Q (rhs - (I + sigma P Q) x), whose norm
// equals ||M dW + grad psi||. A vanishing curvature term signals convergence
// in the quotient modulo Null(Q) and stops the iteration.
struct ReducedCg {
  Matrix x;
  int iters = 0;
  double qres = 0.0;
  bool converged = false;
};

ReducedCg reduced_newton_cg(const QOperator& q, const HsJacobianOp& P,
                            double sigma, const Matrix& rhs, double abs_target,
                            int maxit) {
  ReducedCg out;
  out.x = Matrix::Zero(rhs.rows(), rhs.cols());
  Matrix r = rhs;
  Matrix qr = q.apply(r);
  out.qres = qr.norm();
  if (out.qres <= abs_target) {
    out.converged = true;
    return out;
  }
  double rz = frob_dot(r, qr);
  Matrix p = r;
  Matrix qp = qr;

  for (int it = 0; it < maxit; ++it) {
    Matrix Ap = p + sigma * P.apply(qp);
    const double pAp = frob_dot(qp, Ap);
    if (!(pAp > 1e-300)) break;
    const double alpha = rz / pAp;
    Matrix qAp = q.apply(Ap);
    out.x += alpha * p;
    r -= alpha * Ap;
    qr -= alpha * qAp;
    out.iters = it + 1;
    out.qres = qr.norm();
    if (out.qres <= abs_target) {
      out.converged = true;
      break;
    }
    const double rz_new = frob_dot(r, qr);
    if (!(rz_new > 0.0)) break;
    p = r + (rz_new / rz) * p;
    qp = qr + (rz_new / rz) * qp;
    rz = rz_new;
  }
  return out;
}

struct CriteriaEval {
  bool A = false;
  bool B = false;
  double gap = 0.0;
  double gamma = 0.0;
  Matrix Z;
};

// Stopping criteria (A) and (B) for the ALM subproblem, evaluated at the
// current inner iterate.
CriteriaEval evaluate_criteria(const Matrix& Xhat, double sigma,
                               const Matrix& G, const QOperator& q,
                               double eps_k, double delta_k, const Matrix& W,
                               const Matrix& QW, const Matrix& Zw,
                               const Matrix& PiZw, Vector* gamma_warm) {
  CriteriaEval c;
  c.Z = (Zw - PiZw) / sigma;

  const Matrix diff = Xhat - PiZw;  // sigma * (Z + Q W + G)
  const double psi_val = support_function_value(c.Z, PiZw) +
                         0.5 * frob_dot(W, QW) - frob_dot(Xhat, diff) / sigma +
                         diff.squaredNorm() / (2.0 * sigma);

  const Matrix QX = q.apply(PiZw);
  const double f_val = -0.5 * frob_dot(PiZw, QX) - frob_dot(G, PiZw) -
                       diff.squaredNorm() / (2.0 * sigma);
  c.gap = psi_val - f_val;

  SsnSettings ps;
  ps.tol_eta = 1e-12;
  ProjectionResult pr = ssncg1_project(
      PiZw, ps, gamma_warm && gamma_warm->size() ? std::optional<Vector>(*gamma_warm)
                                                 : std::nullopt);
  if (gamma_warm) *gamma_warm = pr.y;
  c.gamma = (PiZw - pr.X).norm();

  const Matrix grad_f = -QX - G - (PiZw - Xhat) / sigma;
  const double gf = grad_f.norm();
  const double sq2s = std::sqrt(2.0 * sigma);
  const double alpha_k =
      std::min({1.0, std::sqrt(sigma), gf > 0.0 ? eps_k / (sq2s * gf) : 1.0});
  const double dx = diff.norm();  // ||X^{k+1} - X^k||, since X^{k+1} = PiZw
  const double beta_k = std::min(
      {1.0, std::sqrt(sigma), gf > 0.0 ? delta_k * dx / (sq2s * gf) : 1.0});

  c.A = c.gap <= eps_k * eps_k / (2.0 * sigma) &&
        c.gamma <= alpha_k * eps_k / sq2s;
  c.B = c.gap <= delta_k * delta_k * dx * dx / (2.0 * sigma) &&
        c.gamma <= beta_k * delta_k * dx / sq2s;
  return c;
}

}  // namespace

InnerResult ssncg2_solve(const Matrix& Xhat, double sigma, const Matrix& G,
                         const QOperator& q, double eps_k, double delta_k,
                         const Matrix& W0, Vector* proj_warm,
                         const Ssn2Settings& settings) {
  if (sigma <= 0.0) throw std::invalid_argument("ssncg2_solve: sigma <= 0");
  const Index n = Xhat.rows();
  Vector gamma_warm;

  auto project = [&](const Matrix& Zw) {
    SsnSettings ps;
    ps.tol_eta = settings.proj_tol;
    ProjectionResult pr = ssncg1_project(
        Zw, ps, proj_warm && proj_warm->size() ? std::optional<Vector>(*proj_warm)
                                               : std::nullopt);
    if (proj_warm) *proj_warm = pr.y;
    return pr;
  };

  InnerResult res;

  if (q.is_zero()) {
    // With Q = 0 the subproblem has no W and the Z-minimization is exact.
    res.W = Matrix::Zero(n, n);
    Matrix Zw = Xhat - sigma * G;
    ProjectionResult pr = project(Zw);
    CriteriaEval c = evaluate_criteria(Xhat, sigma, G, q, eps_k, delta_k, res.W,
                                       Matrix::Zero(n, n), Zw, pr.X, &gamma_warm);
    res.Z = std::move(c.Z);
    res.X_next = pr.X;
    res.newton_iters = 1;
    res.criterionA = c.A;
    res.criterionB = c.B;
    res.gap = c.gap;
    res.gamma = c.gamma;
    return res;
  }

  Matrix W = W0;
  Matrix QW = q.apply(W);
  Matrix Zw = Xhat - sigma * (QW + G);
  ProjectionResult pr = project(Zw);
  double psi = 0.5 * frob_dot(W, QW) + frob_dot(Zw, pr.X) / sigma -
               (pr.X.squaredNorm() + Xhat.squaredNorm()) / (2.0 * sigma);

  for (int j = 0; j < settings.maxit; ++j) {
    Matrix grad = QW - q.apply(pr.X);
    const double gnorm = grad.norm();

    CriteriaEval c = evaluate_criteria(Xhat, sigma, G, q, eps_k, delta_k, W, QW,
                                       Zw, pr.X, &gamma_warm);
    res.criterionA = c.A;
    res.criterionB = c.B;
    res.gap = c.gap;
    res.gamma = c.gamma;
    if (c.A || gnorm <= 1e-15 * (1.0 + G.norm())) {
      res.Z = std::move(c.Z);
      break;
    }

    // Newton direction from the reduced system.
    HsJacobianOp P = build_hs_jacobian(Zw, pr);
    Matrix rhs = pr.X - W;
    const double abs_target =
        std::min(settings.eta_bar, std::pow(gnorm, 1.0 + settings.tau));
    ReducedCg cg =
        reduced_newton_cg(q, P, sigma, rhs, abs_target, settings.cg_maxit);
    Matrix dW = std::move(cg.x);

    double dir = frob_dot(grad, dW);
    if (!(dir < 0.0)) {
      dW = -grad;
      dir = -gnorm * gnorm;
    }

    double alpha = 1.0;
    int m = 0;
    Matrix W_trial, QW_trial, Zw_trial;
    ProjectionResult pr_trial;
    double psi_trial = 0.0;
    for (; m <= 50; ++m) {
      W_trial = W + alpha * dW;
      QW_trial = q.apply(W_trial);
      Zw_trial = Xhat - sigma * (QW_trial + G);
      pr_trial = project(Zw_trial);
      psi_trial =
          0.5 * frob_dot(W_trial, QW_trial) +
          frob_dot(Zw_trial, pr_trial.X) / sigma -
          (pr_trial.X.squaredNorm() + Xhat.squaredNorm()) / (2.0 * sigma);
      if (psi_trial <= psi + settings.mu * alpha * dir) break;
      alpha *= settings.delta;
    }
    if (m > 50) break;  // psi can no longer decrease at working precision

    W = std::move(W_trial);
    QW = std::move(QW_trial);
    Zw = std::move(Zw_trial);
    pr = std::move(pr_trial);
    psi = psi_trial;
    ++res.newton_iters;
  }

  if (res.Z.size() == 0) {
    // Iteration limit: report the current iterate and its criteria status.
    CriteriaEval c = evaluate_criteria(Xhat, sigma, G, q, eps_k, delta_k, W, QW,
                                       Zw, pr.X, &gamma_warm);
    res.criterionA = c.A;
    res.criterionB = c.B;
    res.gap = c.gap;
    res.gamma = c.gamma;
    res.Z = std::move(c.Z);
  }
  res.W = std::move(W);
  res.X_next = std::move(pr.X);
  return res;
}

QpResult alm_solve(const Matrix& G, const QOperator& q, double tol_eta,
                   const AlmSettings& settings) {
  const Index n = G.rows();
  if (G.cols() != n) throw std::invalid_argument("alm_solve: G not square");
  if (q.n() != n) throw std::invalid_argument("alm_solve: operator size mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  QpResult res;
  Matrix X = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  Matrix W = Matrix::Zero(n, n);
  Matrix Z = Matrix::Zero(n, n);
  double sigma = settings.sigma0;
  Vector proj_warm, eta_warm;

  const double scale = 1.0 + G.norm();
  const int max_outer =
      q.is_zero() ? std::max(settings.max_outer, 1000) : settings.max_outer;
  double eta_prev = std::numeric_limits<double>::infinity();

  for (int k = 0; k < max_outer; ++k) {
    const double eps_k = scale / std::pow(k + 1.0, 1.5);
    const double delta_k = eps_k;

    InnerResult inner = ssncg2_solve(X, sigma, G, q, eps_k, delta_k, W,
                                     &proj_warm, settings.inner);
    W = inner.W;
    Z = inner.Z;
    X = inner.X_next;
    res.outer_iters = k + 1;
    res.inner_iters += inner.newton_iters;

    // KKT residual of the primal problem, recomputed from scratch.
    Matrix QX = q.apply(X);
    Matrix grad = QX + G;
    SsnSettings ps;
    ps.tol_eta = 1e-15;
    ProjectionResult pe = ssncg1_project(
        Matrix(X - grad), ps,
        eta_warm.size() ? std::optional<Vector>(eta_warm) : std::nullopt);
    eta_warm = pe.y;
    const double eta = (X - pe.X).norm() / (1.0 + X.norm() + grad.norm());

    AlmTraceEntry t;
    t.eta = eta;
    t.primal_obj = 0.5 * frob_dot(X, QX) + frob_dot(G, X);
    t.dual_obj = -(support_function_value(Z, inner.X_next) + 0.5 * frob_dot(W, q.apply(W)));
    t.dual_infeas = (Z + q.apply(W) + G).norm();
    t.gap = inner.gap;
    t.gamma = inner.gamma;
    t.inner_iters = inner.newton_iters;
    t.sigma = sigma;
    t.criterionA = inner.criterionA;
    t.criterionB = inner.criterionB;
    res.trace.push_back(t);

    if (eta <= tol_eta) {
      res.converged = true;
      break;
    }
    if (settings.time_limit > 0.0 && seconds_since(t0) > settings.time_limit)
      break;

    if (eta > 0.5 * eta_prev)
      sigma = std::min(settings.sigma_growth * sigma, settings.sigma_max);
    eta_prev = eta;
  }

  res.X = std::move(X);
  res.W = std::move(W);
  res.Z = std::move(Z);
  Matrix QX = q.apply(res.X);
  res.objective = 0.5 * frob_dot(res.X, QX) + frob_dot(G, res.X);
  res.eta = res.trace.empty() ? 0.0 : res.trace.back().eta;
  res.wall_time = seconds_since(t0);
  return res;
}

}  // namespace birk
