#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "birk/qpsolver.hpp"
#include "birk/types.hpp"

namespace birk {

struct QapInstance {
  Index n = 0;
  Matrix A;
  Matrix B;
  std::string name;
  bool asymmetry_warning = false;  // set when (M - M^T) exceeded 1e-8
};

/// Spectral data of the Anstreicher-Brixius relaxation: A = VA Diag(alpha) VA^T
/// with alpha sorted descending, B = VB Diag(beta) VB^T with beta ascending,
/// and the assignment-LP potentials (s_bar, t_bar) certifying the identity
/// assignment on cost alpha_i beta_j.
struct RelaxationData {
  Matrix VA, VB;
  Vector alpha, beta;
  Vector s_bar, t_bar;
  Matrix S, T;
};

/// QAPLIB format: first token n, then n^2 entries of A row-major, then n^2 of
/// B. Blank lines and lines starting with '#', '%' or '//' are skipped.
QapInstance parse_qaplib(std::istream& in, const std::string& name = "");
QapInstance parse_qaplib_file(const std::string& path);
void serialize_qaplib(const QapInstance& inst, std::ostream& out);

RelaxationData build_relaxation(const QapInstance& inst);

/// QAP-variant operator Q(X) = A X B - S X - X T, with a randomized PSD
/// self-check at construction.
std::unique_ptr<QapOperator> make_q_operator(const RelaxationData& rd,
                                             const QapInstance& inst);

/// Dual potentials (u, v) of the minimum-cost assignment problem on the given
/// cost matrix: u_i + v_j <= c_ij with sum(u) + sum(v) equal to the optimal
/// assignment cost. O(n^3) shortest augmenting path method.
std::pair<Vector, Vector> assignment_dual_potentials(const Matrix& cost);

struct FeatureRow {
  double label = 0.0;
  std::vector<std::pair<int, double>> entries;  // 1-based, strictly increasing
};

struct FeatureSet {
  std::vector<FeatureRow> rows;
  int max_index = 0;
};

/// "label idx:val idx:val ..." lines; empty lines skipped; decreasing or
/// non-positive indices rejected.
FeatureSet parse_libsvm(std::istream& in);
FeatureSet parse_libsvm_file(const std::string& path);

/// G_ij = exp(-||x_i - x_j||^2) after scaling every row to unit l2 norm.
/// Rejects zero-norm rows.
Matrix gaussian_kernel(const FeatureSet& fs);

/// Seeded n-by-n standard normal matrix. Deterministic across platforms:
/// mt19937_64 uniforms fed through the Box-Muller transform, filling the
/// matrix column-major.
Matrix random_gaussian(Index n, std::uint64_t seed);

}  // namespace birk
