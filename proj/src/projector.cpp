#include "birk/projector.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace birk {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

DualState dual_value_and_grad(const Matrix& G, const Vector& y) {
  if (!G.allFinite() || !y.allFinite())
    throw std::invalid_argument("dual_value_and_grad: non-finite input");
  const Index n = G.rows();
  BirkhoffMap B(n);
  DualState s;
  s.y = y;
  s.Xcand = (B.adjoint(y) + G).cwiseMax(0.0);
  s.grad = B.apply(s.Xcand) - B.rhs();
  s.phi = 0.5 * s.Xcand.squaredNorm() - y.sum() - 0.5 * G.squaredNorm();
  return s;
}

BinaryMask active_mask(const Matrix& Z) { return BinaryMask::from_nonnegative(Z); }

ProjectionResult ssncg1_project(const Matrix& G, const SsnSettings& settings,
                                const std::optional<Vector>& warm_start) {
  if (!G.allFinite()) throw std::invalid_argument("ssncg1_project: non-finite G");
  const Index n = G.rows();
  if (G.cols() != n) throw std::invalid_argument("ssncg1_project: G not square");

  const auto t0 = std::chrono::steady_clock::now();
  BirkhoffMap B(n);
  const Vector b = B.rhs();
  const double b_norm = b.norm();

  Vector y = warm_start ? B.project_onto_range(*warm_start)
                        : Vector::Zero(2 * n);
  Matrix Z(n, n);
  Vector grad(2 * n);
  BinaryMask mask;

  // One fused column-major pass: rebuilds Z = B^* y + G, the active mask of
  // Z, the constraint sums of Pi_C(Z) (hence the gradient) and ||Pi_C(Z)||^2.
  // Keeping this a single scan of G/Z is what keeps the per-iteration cost at
  // O(n^2) memory traffic instead of several strided passes.
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const auto refresh = [&]() {
    std::vector<std::uint64_t> words((nn + 63) / 64, 0);
    Vector row_cnt = Vector::Zero(n), col_cnt = Vector::Zero(n);
    Vector rs = Vector::Zero(n);
    const double* u = y.data();
    const double* v = y.data() + n;
    const double* g = G.data();
    double* z = Z.data();
    std::size_t k = 0;
    for (Index jj = 0; jj < n; ++jj) {
      const double vj = v[jj];
      double colsum = 0.0;
      double colcnt = 0.0;
      for (Index i = 0; i < n; ++i, ++k) {
        const double zij = u[i] + vj + g[k];
        z[k] = zij;
        if (zij >= 0.0) {
          words[k >> 6] |= std::uint64_t{1} << (k & 63);
          row_cnt[i] += 1.0;
          colcnt += 1.0;
          rs[i] += zij;
          colsum += zij;
        }
      }
      col_cnt[jj] = colcnt;
      grad[n + jj] = colsum - 1.0;
    }
    grad.head(n) = rs.array() - 1.0;
    mask = BinaryMask(n, std::move(words), std::move(row_cnt),
                      std::move(col_cnt));
  };
  refresh();

  // ||Pi_C(Z + alpha B^* d)||^2 - ||Pi_C(Z)||^2 without materializing the
  // trial point. The per-entry step delta = alpha (d_u + d_v) is formed at
  // its own scale and the difference of squares is expanded analytically
  // (delta (2 z + delta) when the sign is unchanged), so the decrease stays
  // resolvable even when the step is below one ulp of ||Z||_inf. Rounding
  // z + delta first would snap small trial steps back onto Z and stall the
  // line search when ||G|| is large.
  Vector adu(n);
  const auto trial_dsq = [&](const Vector& d, double alpha) {
    adu = alpha * d.head(n);
    const double* du = adu.data();
    const double* dv = d.data() + n;
    const double* z = Z.data();
    double dsq = 0.0;
    std::size_t k = 0;
    for (Index jj = 0; jj < n; ++jj) {
      const double adv = alpha * dv[jj];
      for (Index i = 0; i < n; ++i, ++k) {
        const double zk = z[k];
        const double dlt = du[i] + adv;
        if (zk >= 0.0) {
          if (zk >= -dlt)
            dsq += dlt * (2.0 * zk + dlt);
          else
            dsq -= zk * zk;
        } else if (zk >= -dlt) {
          const double t = zk + dlt;
          dsq += t * t;
        }
      }
    }
    return dsq;
  };

  ProjectionResult res;

  for (int j = 0; j < settings.maxit; ++j) {
    const double gnorm = grad.norm();
    const double eta = gnorm / (1.0 + b_norm);
    res.trace.push_back({eta, gnorm, 0, 0.0});
    if (eta <= settings.tol_eta) {
      res.converged = true;
      break;
    }
    if (settings.time_limit > 0.0 && seconds_since(t0) > settings.time_limit)
      break;

    const double eps = settings.tau1 * std::min(settings.tau2, gnorm);
    StructuredHessian V(mask, eps);
    DiagPreconditioner M = DiagPreconditioner::from_mask(mask, eps);

    const double abs_target =
        std::min(settings.eta_bar, std::pow(gnorm, 1.0 + settings.tau));
    const double rel_tol = std::min(0.5, abs_target / gnorm);
    PcgResult cg =
        pcg_solve(V, Vector(-grad), rel_tol, settings.cg_maxit, &M, true);
    res.total_cg_iters += cg.iters;
    res.trace.back().cg_iters = cg.iters;

    Vector d = std::move(cg.x);
    double dir = grad.dot(d);
    if (!(dir < 0.0)) {
      d = -grad;  // safeguard; (V + eps I) is positive definite so this is rare
      dir = -gnorm * gnorm;
    }

    const double bd = d.sum();  // <b, d>

    double alpha = 1.0;
    int m = 0;
    for (; m <= 50; ++m) {
      const double dphi = 0.5 * trial_dsq(d, alpha) - alpha * bd;
      if (dphi <= settings.mu * alpha * dir) break;
      alpha *= settings.delta;
    }
    if (m > 50) break;  // phi can no longer decrease at working precision
    res.linesearch_steps += m;
    res.trace.back().step = alpha;

    y += alpha * d;
    refresh();
    ++res.newton_iters;
  }

  res.X = Z.cwiseMax(0.0);
  res.y = std::move(y);
  res.etaP = grad.norm() / (1.0 + b_norm);
  res.etaC = 0.0;
  res.eta = res.etaP;
  res.wall_time = seconds_since(t0);
  return res;
}

ProjectionResult apg_project(const Matrix& G, double tol_eta, int maxit) {
  if (!G.allFinite()) throw std::invalid_argument("apg_project: non-finite G");
  const Index n = G.rows();
  if (G.cols() != n) throw std::invalid_argument("apg_project: G not square");

  const auto t0 = std::chrono::steady_clock::now();
  BirkhoffMap B(n);
  const Vector b = B.rhs();
  const double b_norm = b.norm();

  ProjectionResult res;
  Vector y = Vector::Zero(2 * n);
  Vector y_prev = y;
  Vector z = y;
  double t = 1.0;
  double phi_prev = dual_value_and_grad(G, y).phi;

  for (int j = 1; j <= maxit; ++j) {
    Matrix Xz = (B.adjoint(z) + G).cwiseMax(0.0);
    Vector gz = B.apply(Xz) - b;
    Vector y_new = z - B.solve_bbt_pinv(B.project_onto_range(gz));

    DualState s = dual_value_and_grad(G, y_new);
    const double eta = s.grad.norm() / (1.0 + b_norm);
    res.trace.push_back({eta, s.grad.norm(), 0, 1.0});
    ++res.newton_iters;

    if (eta <= tol_eta) {
      res.X = std::move(s.Xcand);
      res.y = std::move(y_new);
      res.converged = true;
      break;
    }

    if (s.phi > phi_prev) {
      // momentum restart
      t = 1.0;
      z = y_new;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      z = y_new + beta * (y_new - y_prev);
      t = t_next;
    }
    phi_prev = s.phi;
    y_prev = std::move(y_new);

    if (j == maxit) {
      res.X = std::move(s.Xcand);
      res.y = y_prev;
    }
  }

  if (res.X.size() == 0) {
    DualState s = dual_value_and_grad(G, y_prev);
    res.X = std::move(s.Xcand);
    res.y = y_prev;
  }
  KktResiduals k = kkt_residuals(G, res.X, res.y);
  res.etaP = k.etaP;
  res.etaC = 0.0;
  res.eta = k.etaP;
  res.wall_time = seconds_since(t0);
  return res;
}

KktResiduals kkt_residuals(const Matrix& G, const Matrix& X, const Vector& y) {
  const Index n = G.rows();
  BirkhoffMap B(n);
  const Vector b = B.rhs();
  KktResiduals k;
  k.etaP = (B.apply(X) - b).norm() / (1.0 + b.norm());
  k.etaC = (X - (B.adjoint(y) + G).cwiseMax(0.0)).norm() / (1.0 + X.norm());
  k.eta = std::max(k.etaP, k.etaC);
  return k;
}

}  // namespace birk
