#include "birk/mask.hpp"

#include <stdexcept>

namespace birk {

BinaryMask::BinaryMask(Index n)
    : n_(n), words_((static_cast<std::size_t>(n) * n + 63) / 64, 0) {
  row_counts_ = Vector::Zero(n);
  col_counts_ = Vector::Zero(n);
}

BinaryMask::BinaryMask(Index n, std::vector<std::uint64_t> words,
                       Vector row_counts, Vector col_counts)
    : n_(n),
      words_(std::move(words)),
      row_counts_(std::move(row_counts)),
      col_counts_(std::move(col_counts)) {
  if (words_.size() != (static_cast<std::size_t>(n) * n + 63) / 64 ||
      row_counts_.size() != n || col_counts_.size() != n)
    throw std::invalid_argument("BinaryMask: inconsistent raw construction");
  gamma_ = static_cast<std::int64_t>(row_counts_.sum() + 0.5);
}

BinaryMask BinaryMask::from_nonnegative(const Matrix& Z) {
  BinaryMask m(Z.rows());
  for (Index j = 0; j < m.n_; ++j)
    for (Index i = 0; i < m.n_; ++i)
      if (Z(i, j) >= 0.0) m.set(i, j);
  m.finalize();
  return m;
}

BinaryMask BinaryMask::from_below(const Matrix& Z, double tol) {
  BinaryMask m(Z.rows());
  for (Index j = 0; j < m.n_; ++j)
    for (Index i = 0; i < m.n_; ++i)
      if (Z(i, j) <= tol) m.set(i, j);
  m.finalize();
  return m;
}

BinaryMask BinaryMask::complement() const {
  BinaryMask m(n_);
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < n_; ++i)
      if (!test(i, j)) m.set(i, j);
  m.finalize();
  return m;
}

void BinaryMask::finalize() {
  gamma_ = 0;
  row_counts_.setZero();
  col_counts_.setZero();
  for_each_set([&](Index i, Index j) {
    ++gamma_;
    row_counts_[i] += 1.0;
    col_counts_[j] += 1.0;
  });
}

Matrix BinaryMask::to_dense() const {
  Matrix M = Matrix::Zero(n_, n_);
  for_each_set([&](Index i, Index j) { M(i, j) = 1.0; });
  return M;
}

}  // namespace birk
