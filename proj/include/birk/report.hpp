#pragma once

#include <string>
#include <vector>

#include "birk/projector.hpp"
#include "birk/qpsolver.hpp"
#include "birk/types.hpp"

namespace birk {

/// One benchmark/report row. The residuals stored here are always recomputed
/// from the returned iterates, never copied from solver internals.
struct ReportRow {
  std::string name;
  Index n = 0;
  std::string solver;
  int outer_iters = 0;
  int inner_iters = 0;
  double eta = 0.0;
  double etaP = 0.0;
  double time_s = 0.0;
  bool failed = false;
};

/// Fixed column order: name,n,solver,outer_iters,inner_iters,eta,etaP,time_s
void write_report_csv(const std::string& path,
                      const std::vector<ReportRow>& rows);
std::string report_csv_string(const std::vector<ReportRow>& rows);

/// Independent re-evaluation of the projection residuals from (G, X, y).
KktResiduals recompute_eta_projection(const Matrix& G, const Matrix& X,
                                      const Vector& y);

/// Independent re-evaluation of the QP residual
/// ||X - Pi(X - (Q X + G))|| / (1 + ||X|| + ||Q X + G||).
double recompute_eta_qp(const Matrix& G, const QOperator& q, const Matrix& X);

/// Plain text matrix format: first line n, then n rows of n floats.
Matrix read_matrix_text(const std::string& path);
void write_matrix_text(const std::string& path, const Matrix& M);

/// Least-squares fit of log(time) = intercept + slope * log(n).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LogLogFit fit_loglog(const std::vector<double>& ns,
                     const std::vector<double>& times);

}  // namespace birk
