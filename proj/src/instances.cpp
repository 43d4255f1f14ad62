#include "birk/instances.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace birk {

namespace {

// Numeric tokens from the stream, with comment lines skipped.
std::vector<double> read_numeric_tokens(std::istream& in) {
  std::vector<double> tokens;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    bool first = true;
    while (ls >> tok) {
      if (first && (tok[0] == '#' || tok[0] == '%' ||
                    (tok.size() >= 2 && tok[0] == '/' && tok[1] == '/')))
        break;
      first = false;
      std::size_t pos = 0;
      double val = 0.0;
      try {
        val = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("parse_qaplib: non-numeric token '" + tok + "'");
      }
      if (pos != tok.size())
        throw std::runtime_error("parse_qaplib: non-numeric token '" + tok + "'");
      tokens.push_back(val);
    }
  }
  return tokens;
}

Matrix symmetrize(const Matrix& M, bool& warning) {
  if ((M - M.transpose()).norm() > 1e-8) warning = true;
  return 0.5 * (M + M.transpose());
}

}  // namespace

QapInstance parse_qaplib(std::istream& in, const std::string& name) {
  const std::vector<double> tokens = read_numeric_tokens(in);
  if (tokens.empty()) throw std::runtime_error("parse_qaplib: empty input");
  const double n_raw = tokens[0];
  const Index n = static_cast<Index>(n_raw);
  if (n <= 0 || static_cast<double>(n) != n_raw)
    throw std::runtime_error("parse_qaplib: invalid dimension");
  if (tokens.size() != static_cast<std::size_t>(1 + 2 * n * n))
    throw std::runtime_error("parse_qaplib: token count mismatch");

  QapInstance inst;
  inst.n = n;
  inst.name = name;
  Matrix A(n, n), B(n, n);
  std::size_t k = 1;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = tokens[k++];
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) B(i, j) = tokens[k++];
  inst.A = symmetrize(A, inst.asymmetry_warning);
  inst.B = symmetrize(B, inst.asymmetry_warning);
  if (!inst.A.allFinite() || !inst.B.allFinite())
    throw std::runtime_error("parse_qaplib: non-finite entries");
  return inst;
}

QapInstance parse_qaplib_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_qaplib_file: cannot open " + path);
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos)
    name = name.substr(0, dot);
  return parse_qaplib(in, name);
}

void serialize_qaplib(const QapInstance& inst, std::ostream& out) {
  out << std::setprecision(17) << inst.n << "\n";
  const auto write = [&](const Matrix& M) {
    for (Index i = 0; i < inst.n; ++i) {
      for (Index j = 0; j < inst.n; ++j) {
        if (j) out << ' ';
        out << M(i, j);
      }
      out << "\n";
    }
  };
  write(inst.A);
  out << "\n";
  write(inst.B);
}

std::pair<Vector, Vector> assignment_dual_potentials(const Matrix& cost) {
  // Shortest augmenting path assignment with dual potential maintenance
  // (1-based arrays, row 0 / column 0 virtual).
  const Index n = cost.rows();
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      Index i0 = p[j0], j1 = 0;
      double delta = INF;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  Vector s(n), t(n);
  for (Index i = 0; i < n; ++i) s[i] = u[i + 1];
  for (Index j = 0; j < n; ++j) t[j] = v[j + 1];
  return {s, t};
}

RelaxationData build_relaxation(const QapInstance& inst) {
  const Index n = inst.n;
  Eigen::SelfAdjointEigenSolver<Matrix> esA(inst.A), esB(inst.B);
  if (esA.info() != Eigen::Success || esB.info() != Eigen::Success)
    throw std::runtime_error("build_relaxation: eigensolver failure");

  RelaxationData rd;
  // Eigen returns eigenvalues ascending; alpha wants descending.
  rd.alpha = esA.eigenvalues().reverse();
  rd.VA = esA.eigenvectors().rowwise().reverse();
  rd.beta = esB.eigenvalues();
  rd.VB = esB.eigenvectors();

  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cost(i, j) = rd.alpha[i] * rd.beta[j];
  auto [s, t] = assignment_dual_potentials(cost);
  rd.s_bar = std::move(s);
  rd.t_bar = std::move(t);

  rd.S = rd.VA * rd.s_bar.asDiagonal() * rd.VA.transpose();
  rd.T = rd.VB * rd.t_bar.asDiagonal() * rd.VB.transpose();
  return rd;
}

std::unique_ptr<QapOperator> make_q_operator(const RelaxationData& rd,
                                             const QapInstance& inst) {
  auto q = std::make_unique<QapOperator>(inst.A, inst.B, rd.S, rd.T);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix X(inst.n, inst.n);
    for (Index j = 0; j < inst.n; ++j)
      for (Index i = 0; i < inst.n; ++i) X(i, j) = unif(rng);
    const double quad = (X.array() * q->apply(X).array()).sum();
    if (quad < -1e-8 * X.squaredNorm())
      throw std::runtime_error("make_q_operator: PSD self-check failed");
  }
  return q;
}

FeatureSet parse_libsvm(std::istream& in) {
  FeatureSet fs;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    FeatureRow row;
    try {
      row.label = std::stod(tok);
    } catch (const std::exception&) {
      throw std::runtime_error("parse_libsvm: bad label '" + tok + "'");
    }
    int prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("parse_libsvm: malformed pair '" + tok + "'");
      int idx = 0;
      double val = 0.0;
      try {
        idx = std::stoi(tok.substr(0, colon));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("parse_libsvm: malformed pair '" + tok + "'");
      }
      if (idx <= prev)
        throw std::runtime_error(
            "parse_libsvm: indices must be positive and strictly increasing");
      prev = idx;
      row.entries.emplace_back(idx, val);
      fs.max_index = std::max(fs.max_index, idx);
    }
    fs.rows.push_back(std::move(row));
  }
  return fs;
}

FeatureSet parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_libsvm_file: cannot open " + path);
  return parse_libsvm(in);
}

Matrix gaussian_kernel(const FeatureSet& fs) {
  const Index m = static_cast<Index>(fs.rows.size());
  std::vector<FeatureRow> rows = fs.rows;
  for (auto& row : rows) {
    double norm2 = 0.0;
    for (const auto& [idx, val] : row.entries) norm2 += val * val;
    if (norm2 == 0.0)
      throw std::runtime_error("gaussian_kernel: zero-norm row");
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [idx, val] : row.entries) val *= inv;
  }

  auto sparse_dot = [](const FeatureRow& a, const FeatureRow& b) {
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
      if (a.entries[i].first == b.entries[j].first)
        dot += a.entries[i++].second * b.entries[j++].second;
      else if (a.entries[i].first < b.entries[j].first)
        ++i;
      else
        ++j;
    }
    return dot;
  };

  Matrix G(m, m);
  for (Index i = 0; i < m; ++i) {
    G(i, i) = 1.0;
    for (Index j = i + 1; j < m; ++j) {
      // ||x_i - x_j||^2 = 2 - 2 <x_i, x_j> for unit-norm rows
      const double g = std::exp(-2.0 + 2.0 * sparse_dot(rows[i], rows[j]));
      G(i, j) = g;
      G(j, i) = g;
    }
  }
  return G;
}

Matrix random_gaussian(Index n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("random_gaussian: n must be positive");
  std::mt19937_64 rng(seed);
  const double two_pi = 2.0 * M_PI;
  const double inv = 1.0 / (static_cast<double>(rng.max()) + 1.0);
  Matrix G(n, n);
  double* data = G.data();
  const std::size_t total = static_cast<std::size_t>(n) * n;
  std::size_t k = 0;
  while (k < total) {
    // Box-Muller on two mt19937_64 uniforms; u1 shifted away from zero.
    const double u1 = (static_cast<double>(rng()) + 1.0) * inv;
    const double u2 = static_cast<double>(rng()) * inv;
    const double r = std::sqrt(-2.0 * std::log(u1));
    data[k++] = r * std::cos(two_pi * u2);
    if (k < total) data[k++] = r * std::sin(two_pi * u2);
  }
  return G;
}

}  // namespace birk
