#include "birk/jacobian.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace birk {

HsJacobianOp::HsJacobianOp(BinaryMask theta, double inner_tol, int inner_maxit)
    : theta_(std::move(theta)),
      support_(theta_.complement()),
      inner_tol_(inner_tol),
      inner_maxit_(inner_maxit) {}

HsJacobianOp build_hs_jacobian(const Matrix& G, const ProjectionResult& proj) {
  // The attainable KKT residual scales with ||G||: the dual objective and its
  // gradient are evaluated at the scale of G, and the line search cannot
  // resolve decreases below roundoff at that scale, so the residual floor
  // sits near sqrt(eps) relative to ||G||. The gate only has to reject
  // projections that are genuinely far from optimal.
  const double floor =
      std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + G.norm());
  if (proj.eta > std::max(1e-9, floor))
    throw std::invalid_argument(
        "build_hs_jacobian: projection not converged (eta=" +
        std::to_string(proj.eta) + ", ||G||=" + std::to_string(G.norm()) + ")");
  const double tol = projection_zero_tol(G);
  BinaryMask theta = BinaryMask::from_below(proj.X, tol);
  const int n = static_cast<int>(G.rows());
  return HsJacobianOp(std::move(theta), 1e-12, 2 * n);
}

Matrix HsJacobianOp::apply(const Matrix& H, double* inner_relres,
                           int* inner_iters) const {
  const Index n = theta_.n();
  if (H.rows() != n || H.cols() != n)
    throw std::invalid_argument("HsJacobianOp::apply: dimension mismatch");

  Matrix XiH = H;
  theta_.for_each_set([&](Index i, Index j) { XiH(i, j) = 0.0; });

  BirkhoffMap B(n);
  Vector rhs = B.apply(XiH);

  StructuredHessian BXiBt(support_, 0.0);
  PcgResult cg = pcg_solve(BXiBt, rhs, inner_tol_, inner_maxit_);
  if (inner_relres) *inner_relres = cg.relres;
  if (inner_iters) *inner_iters = cg.iters;

  Matrix corr = B.adjoint(cg.x);
  theta_.for_each_set([&](Index i, Index j) { corr(i, j) = 0.0; });
  return XiH - corr;
}

Matrix dense_pinv(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? 1e-12 * sv(0) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix dense_range_projector(const Matrix& H) {
  Eigen::BDCSVD<Matrix> svd(H, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? 1e-12 * sv(0) : 0.0;
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  const Matrix Vr = svd.matrixV().leftCols(r);
  return Vr * Vr.transpose();
}

Matrix dense_p0(const PolyhedronDense& poly, const Vector& /*x*/,
                const Vector& proj_x) {
  const Index n = poly.A.cols() > 0 ? poly.A.cols() : poly.B.cols();
  if ((poly.A.cols() > 0 && poly.A.cols() != n) ||
      (poly.B.cols() > 0 && poly.B.cols() != n))
    throw std::invalid_argument("dense_p0: dimension mismatch");

  std::vector<Index> active;
  for (Index i = 0; i < poly.A.rows(); ++i)
    if (std::abs(poly.A.row(i).dot(proj_x) - poly.b(i)) <= 1e-8)
      active.push_back(i);

  Matrix M(static_cast<Index>(active.size()) + poly.B.rows(), n);
  for (std::size_t k = 0; k < active.size(); ++k)
    M.row(static_cast<Index>(k)) = poly.A.row(active[k]);
  M.bottomRows(poly.B.rows()) = poly.B;

  if (M.rows() == 0) return Matrix::Identity(n, n);
  return Matrix::Identity(n, n) - dense_range_projector(M);
}

Matrix dense_p_reduced(const Vector& theta, const Matrix& H) {
  const Index n = theta.size();
  Matrix Sigma = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    if (theta(i) != 0.0) Sigma(i, i) = 0.0;
  return Sigma - dense_range_projector(H * Sigma);
}

Matrix dense_birkhoff_constraint_matrix(Index n) {
  Matrix B = Matrix::Zero(2 * n, n * n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      B(i, j * n + i) = 1.0;      // row sums
      B(n + j, j * n + i) = 1.0;  // column sums
    }
  return B;
}

LinearizationCheck local_linearization_check(const Matrix& G, const Matrix& H,
                                             double t) {
  SsnSettings tight;
  tight.tol_eta = 1e-13;
  ProjectionResult p0 = ssncg1_project(G, tight);
  const Matrix Gp = G + t * H;
  ProjectionResult p1 =
      (Gp - G).norm() == 0.0 ? p0 : ssncg1_project(Gp, tight, p0.y);

  LinearizationCheck out;
  const double tol0 = projection_zero_tol(G);
  const double tol1 = projection_zero_tol(G + t * H);
  const Index n = G.rows();
  for (Index j = 0; j < n && !out.active_set_changed; ++j)
    for (Index i = 0; i < n; ++i)
      if ((p0.X(i, j) <= tol0) != (p1.X(i, j) <= tol1)) {
        out.active_set_changed = true;
        break;
      }
  if (out.active_set_changed) return out;

  HsJacobianOp P = build_hs_jacobian(G, p0);
  out.residual = (p1.X - p0.X - t * P.apply(H)).norm();
  return out;
}

}  // namespace birk
