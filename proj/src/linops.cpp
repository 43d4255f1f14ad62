#include "birk/linops.hpp"

namespace birk {

Vector BirkhoffMap::apply(const Matrix& X) const {
  if (X.rows() != n_ || X.cols() != n_)
    throw std::invalid_argument("BirkhoffMap::apply: dimension mismatch");
  // One column-major pass; per-coefficient rowwise reductions would stride
  // through memory and dominate the cost at large n.
  Vector out = Vector::Zero(2 * n_);
  double* rs = out.data();
  const double* x = X.data();
  for (Index j = 0; j < n_; ++j) {
    double colsum = 0.0;
    for (Index i = 0; i < n_; ++i) {
      const double v = x[j * n_ + i];
      rs[i] += v;
      colsum += v;
    }
    out[n_ + j] = colsum;
  }
  return out;
}

Matrix BirkhoffMap::adjoint(const Vector& y) const {
  if (y.size() != 2 * n_)
    throw std::invalid_argument("BirkhoffMap::adjoint: dimension mismatch");
  Matrix out(n_, n_);
  const auto u = y.head(n_);
  const auto v = y.tail(n_);
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < n_; ++i) out(i, j) = u[i] + v[j];
  return out;
}

void BirkhoffMap::add_adjoint(const Vector& y, double alpha, Matrix& out) const {
  if (y.size() != 2 * n_ || out.rows() != n_ || out.cols() != n_)
    throw std::invalid_argument("BirkhoffMap::add_adjoint: dimension mismatch");
  const auto u = y.head(n_);
  const auto v = y.tail(n_);
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < n_; ++i) out(i, j) += alpha * (u[i] + v[j]);
}

Vector BirkhoffMap::project_onto_range(const Vector& y) const {
  Vector out = y;
  double c = (y.head(n_).sum() - y.tail(n_).sum()) / static_cast<double>(2 * n_);
  out.head(n_).array() -= c;
  out.tail(n_).array() += c;
  return out;
}

Vector BirkhoffMap::solve_bbt_pinv(const Vector& r) const {
  if (r.size() != 2 * n_)
    throw std::invalid_argument("solve_bbt_pinv: dimension mismatch");
  const double s1 = r.head(n_).sum();
  const double s2 = r.tail(n_).sum();
  if (std::abs(s1 - s2) > 1e-9 * (1.0 + r.norm()))
    throw std::invalid_argument("solve_bbt_pinv: rhs not in Range(B)");
  const double m = 0.5 * (s1 + s2) / static_cast<double>(n_);  // common mean
  Vector y(2 * n_);
  y.head(n_) = (r.head(n_).array() - m) / static_cast<double>(n_) +
               m / static_cast<double>(2 * n_);
  y.tail(n_) = (r.tail(n_).array() - m) / static_cast<double>(n_) +
               m / static_cast<double>(2 * n_);
  return y;
}

Vector StructuredHessian::apply(const Vector& d) const {
  const Index n = mask_.n();
  if (d.size() != 2 * n)
    throw std::invalid_argument("StructuredHessian::apply: dimension mismatch");
  const auto u = d.head(n);
  const auto v = d.tail(n);
  Vector out(2 * n);
  auto ou = out.head(n);
  auto ov = out.tail(n);

  const std::int64_t gamma = mask_.popcount();
  if (2 * gamma <= n * n) {
    ou.setZero();
    ov.setZero();
    mask_.for_each_set([&](Index i, Index j) {
      const double s = u[i] + v[j];
      ou[i] += s;
      ov[j] += s;
    });
  } else {
    // All-ones mask in closed form, minus the complement's contribution.
    const double su = u.sum();
    const double sv = v.sum();
    ou = static_cast<double>(n) * u;
    ou.array() += sv;
    ov = static_cast<double>(n) * v;
    ov.array() += su;
    mask_.for_each_clear([&](Index i, Index j) {
      const double s = u[i] + v[j];
      ou[i] -= s;
      ov[j] -= s;
    });
  }
  if (shift_ != 0.0) out += shift_ * d;
  return out;
}

DiagPreconditioner DiagPreconditioner::from_mask(const BinaryMask& mask,
                                                double shift) {
  Vector diag(2 * mask.n());
  diag.head(mask.n()) = mask.row_counts().array() + shift;
  diag.tail(mask.n()) = mask.col_counts().array() + shift;
  return DiagPreconditioner(std::move(diag));
}

Vector DiagPreconditioner::solve(const Vector& r) const {
  if (r.size() != diag_.size())
    throw std::invalid_argument("DiagPreconditioner::solve: dimension mismatch");
  if ((diag_.array() == 0.0).any())
    throw std::domain_error("DiagPreconditioner::solve: zero diagonal entry");
  return r.array() / diag_.array();
}

}  // namespace birk
