#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "birk/types.hpp"

namespace birk {

/// Bit-packed n-by-n 0/1 mask with cached popcount and row/column sums.
/// Bits are stored column-major so that iteration order matches Eigen's
/// default storage.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(Index n);

  /// Takes ownership of a prebuilt column-major bit array (bit k = j*n + i)
  /// together with its per-row/per-column set-bit counts. Used by callers
  /// that build the mask inside an already-running scan of a matrix.
  BinaryMask(Index n, std::vector<std::uint64_t> words, Vector row_counts,
             Vector col_counts);

  /// Mask of entries where Z(i,j) >= 0.
  static BinaryMask from_nonnegative(const Matrix& Z);
  /// Mask of entries where Z(i,j) <= tol (zero pattern of a computed
  /// projection).
  static BinaryMask from_below(const Matrix& Z, double tol);

  BinaryMask complement() const;

  Index n() const { return n_; }
  bool test(Index i, Index j) const {
    std::size_t k = static_cast<std::size_t>(j) * n_ + i;
    return (words_[k >> 6] >> (k & 63)) & 1u;
  }
  std::int64_t popcount() const { return gamma_; }

  /// Row sums of the mask (the vector Omega e).
  const Vector& row_counts() const { return row_counts_; }
  /// Column sums of the mask (the vector Omega^T e).
  const Vector& col_counts() const { return col_counts_; }

  /// Visit every set bit as (i, j).
  template <class F>
  void for_each_set(F&& f) const {
    const std::size_t nn = static_cast<std::size_t>(n_) * n_;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        std::size_t k = (w << 6) + std::countr_zero(bits);
        if (k < nn) f(static_cast<Index>(k % n_), static_cast<Index>(k / n_));
        bits &= bits - 1;
      }
    }
  }

  /// Visit every clear bit as (i, j).
  template <class F>
  void for_each_clear(F&& f) const {
    const std::size_t nn = static_cast<std::size_t>(n_) * n_;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = ~words_[w];
      while (bits) {
        std::size_t k = (w << 6) + std::countr_zero(bits);
        if (k < nn) f(static_cast<Index>(k % n_), static_cast<Index>(k / n_));
        bits &= bits - 1;
      }
    }
  }

  Matrix to_dense() const;

 private:
  void set(Index i, Index j) {
    std::size_t k = static_cast<std::size_t>(j) * n_ + i;
    words_[k >> 6] |= std::uint64_t{1} << (k & 63);
  }
  void finalize();

  Index n_ = 0;
  std::int64_t gamma_ = 0;
  std::vector<std::uint64_t> words_;
  Vector row_counts_;
  Vector col_counts_;
};

}  // namespace birk
