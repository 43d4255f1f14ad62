#pragma once

#include <cmath>
#include <stdexcept>

#include "birk/mask.hpp"
#include "birk/types.hpp"

namespace birk {

/// The constraint map of the Birkhoff polytope: apply(X) stacks the row sums
/// and column sums of X into a 2n-vector. Its adjoint maps (u, v) to
/// u e^T + e v^T. The map has rank 2n - 1; the null space of the adjoint is
/// spanned by (e, -e).
class BirkhoffMap {
 public:
  explicit BirkhoffMap(Index n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("BirkhoffMap: n must be positive");
  }

  Index n() const { return n_; }

  Vector apply(const Matrix& X) const;
  Matrix adjoint(const Vector& y) const;

  /// In-place variant: out += alpha * (u e^T + e v^T).
  void add_adjoint(const Vector& y, double alpha, Matrix& out) const;

  /// The right-hand side b = [e; e] of the doubly stochastic constraints.
  Vector rhs() const { return Vector::Ones(2 * n_); }

  /// Orthogonal projection of y onto Range(B), i.e. removal of the (e, -e)
  /// component.
  Vector project_onto_range(const Vector& y) const;

  /// Unique y in Range(B) with (B B^T) y = r, via the closed spectral form of
  /// B B^T = [nI, ee^T; ee^T, nI] (eigenvalue n on the mean-zero subspace,
  /// 2n on span{(e,e)}, 0 on span{(e,-e)}). Requires r in Range(B): the sums
  /// of the two halves of r must agree to |sum1 - sum2| <= 1e-9 (1 + ||r||).
  Vector solve_bbt_pinv(const Vector& r) const;

 private:
  Index n_;
};

/// The generalized Hessian V + eps I with
/// V = [Diag(Omega e), Omega; Omega^T, Diag(Omega^T e)].
/// Application costs min{O(gamma + n), O(n^2 - gamma + n)} by iterating over
/// whichever of the mask or its complement has fewer entries.
class StructuredHessian {
 public:
  StructuredHessian(BinaryMask mask, double shift)
      : mask_(std::move(mask)), shift_(shift) {
    if (shift < 0.0) throw std::invalid_argument("StructuredHessian: shift < 0");
  }

  Index n() const { return mask_.n(); }
  double shift() const { return shift_; }
  const BinaryMask& mask() const { return mask_; }

  Vector apply(const Vector& d) const;

  Vector operator()(const Vector& d) const { return apply(d); }

 private:
  BinaryMask mask_;
  double shift_;
};

/// Diagonal preconditioner diag = [Omega e; Omega^T e] + eps 1.
class DiagPreconditioner {
 public:
  explicit DiagPreconditioner(Vector diag) : diag_(std::move(diag)) {}

  static DiagPreconditioner from_mask(const BinaryMask& mask, double shift);

  const Vector& diag() const { return diag_; }

  /// Entrywise r / diag. Throws if any diagonal entry is zero.
  Vector solve(const Vector& r) const;

 private:
  Vector diag_;
};

struct PcgResult {
  Vector x;
  int iters = 0;
  double relres = 0.0;  // achieved ||rhs - A x|| / ||rhs||
  bool converged = false;
};

/// Preconditioned conjugate gradients from the zero starting point.
/// Stops when the preconditioned residual norm sqrt(r^T M^-1 r) drops below
/// tol times its initial value, or at maxit. With deflate set, the (e,-e)
/// component is removed from each preconditioned residual so all iterates
/// stay in Range(B) when rhs does.
template <class Op>
PcgResult pcg_solve(const Op& op, const Vector& rhs, double tol, int maxit,
                    const DiagPreconditioner* precond = nullptr,
                    bool deflate = false) {
  const Index m = rhs.size();
  if (!rhs.allFinite()) throw std::invalid_argument("pcg_solve: non-finite rhs");

  PcgResult res;
  res.x = Vector::Zero(m);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    res.converged = true;
    return res;
  }

  auto deflated = [&](Vector z) {
    if (deflate) {
      const Index n = m / 2;
      double c = (z.head(n).sum() - z.tail(n).sum()) / static_cast<double>(m);
      z.head(n).array() -= c;
      z.tail(n).array() += c;
    }
    return z;
  };

  Vector r = rhs;
  Vector z = deflated(precond ? precond->solve(r) : r);
  Vector p = z;
  double rz = r.dot(z);
  const double stop = tol * std::sqrt(std::max(rz, 0.0));

  // With a singular operator and a right-hand side polluted by roundoff
  // outside its range, the residual cannot vanish and late iterates diverge.
  // Keep the best iterate seen and bail out on sustained growth.
  Vector best_x = res.x;
  double best_rnorm = r.norm();

  for (int it = 0; it < maxit; ++it) {
    Vector Ap = op(p);
    double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;  // breakdown or exact null direction
    double alpha = rz / pAp;
    res.x += alpha * p;
    r -= alpha * Ap;
    res.iters = it + 1;
    if (!r.allFinite()) break;
    const double rnorm = r.norm();
    if (rnorm < best_rnorm) {
      best_rnorm = rnorm;
      best_x = res.x;
    } else if (rnorm > 100.0 * best_rnorm) {
      break;
    }
    z = deflated(precond ? precond->solve(r) : r);
    double rz_new = r.dot(z);
    if (std::sqrt(std::max(rz_new, 0.0)) <= stop) {
      res.converged = true;
      rz = rz_new;
      break;
    }
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.x = std::move(best_x);
  res.relres = best_rnorm / rhs_norm;
  if (res.relres <= tol) res.converged = true;
  return res;
}

}  // namespace birk
