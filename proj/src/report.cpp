#include "birk/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace birk {

std::string report_csv_string(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "name,n,solver,outer_iters,inner_iters,eta,etaP,time_s\n";
  os << std::setprecision(16);
  for (const auto& r : rows) {
    os << r.name << ',' << r.n << ',' << r.solver << ',' << r.outer_iters << ','
       << r.inner_iters << ',' << r.eta << ',' << r.etaP << ',' << r.time_s;
    if (r.failed) os << ",FAILED";
    os << '\n';
  }
  return os.str();
}

void write_report_csv(const std::string& path,
                      const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
  out << report_csv_string(rows);
}

KktResiduals recompute_eta_projection(const Matrix& G, const Matrix& X,
                                      const Vector& y) {
  return kkt_residuals(G, X, y);
}

double recompute_eta_qp(const Matrix& G, const QOperator& q, const Matrix& X) {
  Matrix grad = q.apply(X) + G;
  SsnSettings ps;
  ps.tol_eta = 1e-15;
  ProjectionResult pr = ssncg1_project(Matrix(X - grad), ps);
  return (X - pr.X).norm() / (1.0 + X.norm() + grad.norm());
}

Matrix read_matrix_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_text: cannot open " + path);
  Index n = 0;
  if (!(in >> n) || n <= 0)
    throw std::runtime_error("read_matrix_text: bad dimension in " + path);
  Matrix M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (!(in >> M(i, j)))
        throw std::runtime_error("read_matrix_text: truncated file " + path);
  return M;
}

void write_matrix_text(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_text: cannot open " + path);
  out << M.rows() << "\n" << std::setprecision(17);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ' ';
      out << M(i, j);
    }
    out << "\n";
  }
}

LogLogFit fit_loglog(const std::vector<double>& ns,
                     const std::vector<double>& times) {
  if (ns.size() != times.size() || ns.size() < 2)
    throw std::invalid_argument("fit_loglog: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = std::log(ns[i]);
    const double y = std::log(std::max(times[i], 1e-12));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  LogLogFit fit;
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  return fit;
}

}  // namespace birk
