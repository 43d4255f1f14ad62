// Command-line front end: Birkhoff-polytope projections, QP relaxations of
// QAP instances, and benchmark sweeps with CSV/JSON reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "birk/instances.hpp"
#include "birk/projector.hpp"
#include "birk/qpsolver.hpp"
#include "birk/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace birk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

json row_to_json(const ReportRow& r) {
  return json{{"name", r.name},           {"n", r.n},
              {"solver", r.solver},       {"outer_iters", r.outer_iters},
              {"inner_iters", r.inner_iters}, {"eta", r.eta},
              {"etaP", r.etaP},           {"time_s", r.time_s},
              {"failed", r.failed}};
}

void write_report(const std::string& path, const std::vector<ReportRow>& rows,
                  const json& config) {
  if (path.ends_with(".json")) {
    json out{{"config", config}, {"rows", json::array()}};
    for (const auto& r : rows) out["rows"].push_back(row_to_json(r));
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << out.dump(2) << "\n";
  } else {
    write_report_csv(path, rows);
  }
}

struct ProjectArgs {
  std::string input;
  std::string random_spec;
  std::string kernel;
  std::string solver = "ssncg";
  double tol = 1e-9;
  std::string out;
  std::string dump_x;
  int maxit = 0;
};

std::pair<Index, std::uint64_t> parse_random_spec(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("--random expects n,seed");
  return {static_cast<Index>(std::stoll(spec.substr(0, comma))),
          static_cast<std::uint64_t>(std::stoull(spec.substr(comma + 1)))};
}

int run_project(const ProjectArgs& a) {
  Matrix G;
  std::string name;
  if (!a.input.empty()) {
    G = read_matrix_text(a.input);
    name = fs::path(a.input).stem().string();
  } else if (!a.random_spec.empty()) {
    auto [n, seed] = parse_random_spec(a.random_spec);
    G = random_gaussian(n, seed);
    name = "rand" + std::to_string(n) + "_s" + std::to_string(seed);
  } else if (!a.kernel.empty()) {
    G = gaussian_kernel(parse_libsvm_file(a.kernel));
    name = fs::path(a.kernel).stem().string();
  } else {
    std::cerr << "project: one of --input/--random/--kernel is required\n";
    return kExitUsage;
  }

  ProjectionResult res;
  if (a.solver == "ssncg") {
    SsnSettings s;
    s.tol_eta = a.tol;
    if (a.maxit > 0) s.maxit = a.maxit;
    res = ssncg1_project(G, s);
  } else if (a.solver == "apg") {
    res = apg_project(G, a.tol, a.maxit > 0 ? a.maxit : 20000);
  } else {
    std::cerr << "project: unknown solver '" << a.solver << "'\n";
    return kExitUsage;
  }

  KktResiduals k = recompute_eta_projection(G, res.X, res.y);
  ReportRow row{name,   G.rows(), a.solver, res.newton_iters,
                res.total_cg_iters, k.eta, k.etaP, res.wall_time,
                !res.converged};
  std::cout << report_csv_string({row});
  if (!a.out.empty())
    write_report(a.out, {row},
                 json{{"tol", a.tol}, {"solver", a.solver}, {"name", name}});
  if (!a.dump_x.empty()) write_matrix_text(a.dump_x, res.X);
  return res.converged ? kExitOk : kExitNotConverged;
}

struct QpArgs {
  std::string qaplib;
  double tol = 1e-7;
  std::string out;
  double sigma0 = 1.0;
  int max_outer = 100;
};

int run_qp(const QpArgs& a) {
  QapInstance inst = parse_qaplib_file(a.qaplib);
  if (inst.asymmetry_warning)
    std::cerr << "warning: " << inst.name << " symmetrized (asymmetry > 1e-8)\n";
  RelaxationData rd = build_relaxation(inst);
  auto q = make_q_operator(rd, inst);

  AlmSettings s;
  s.sigma0 = a.sigma0;
  s.max_outer = a.max_outer;
  const Matrix G = Matrix::Zero(inst.n, inst.n);
  QpResult res = alm_solve(G, *q, a.tol, s);

  const double eta = recompute_eta_qp(G, *q, res.X);
  // Bound value reported against the min <X, Q X> convention.
  const double bound = 2.0 * res.objective;
  ReportRow row{inst.name, inst.n,        "alm",   res.outer_iters,
                res.inner_iters, eta,     eta,     res.wall_time,
                !res.converged};
  std::cout << report_csv_string({row});
  std::cout << "lower_bound," << std::setprecision(16) << bound << "\n";
  if (!a.out.empty())
    write_report(a.out, {row},
                 json{{"tol", a.tol},
                      {"sigma0", a.sigma0},
                      {"max_outer", a.max_outer},
                      {"qaplib", a.qaplib},
                      {"lower_bound", bound}});
  return res.converged ? kExitOk : kExitNotConverged;
}

struct BenchArgs {
  std::string suite;
  std::vector<Index> sizes;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  double tol = 1e-9;
};

int run_bench(const BenchArgs& a) {
  std::vector<ReportRow> rows;
  bool any_failed = false;

  auto run_projection_case = [&](const std::string& name, const Matrix& G) {
    SsnSettings s;
    s.tol_eta = a.tol;
    ProjectionResult res = ssncg1_project(G, s);
    KktResiduals k = recompute_eta_projection(G, res.X, res.y);
    rows.push_back({name, G.rows(), "ssncg", res.newton_iters,
                    res.total_cg_iters, k.eta, k.etaP, res.wall_time,
                    !res.converged});
    any_failed |= !res.converged;
  };

  if (a.suite == "proj-random") {
    if (a.sizes.empty()) {
      std::cerr << "bench: --sizes required for proj-random\n";
      return kExitUsage;
    }
    for (Index n : a.sizes)
      for (std::uint64_t seed : a.seeds)
        run_projection_case(
            "rand" + std::to_string(n) + "_s" + std::to_string(seed),
            random_gaussian(n, seed));
  } else if (a.suite == "proj-kernel") {
    if (a.inputs.empty()) {
      std::cerr << "bench: --inputs required for proj-kernel\n";
      return kExitUsage;
    }
    for (const auto& path : a.inputs)
      run_projection_case(fs::path(path).stem().string(),
                          gaussian_kernel(parse_libsvm_file(path)));
  } else if (a.suite == "qap") {
    if (a.inputs.empty()) {
      std::cerr << "bench: --inputs required for qap\n";
      return kExitUsage;
    }
    for (const auto& path : a.inputs) {
      QapInstance inst = parse_qaplib_file(path);
      RelaxationData rd = build_relaxation(inst);
      auto q = make_q_operator(rd, inst);
      const Matrix G = Matrix::Zero(inst.n, inst.n);
      QpResult res = alm_solve(G, *q, a.tol);
      const double eta = recompute_eta_qp(G, *q, res.X);
      rows.push_back({inst.name, inst.n, "alm", res.outer_iters,
                      res.inner_iters, eta, eta, res.wall_time,
                      !res.converged});
      any_failed |= !res.converged;
    }
  } else {
    std::cerr << "bench: unknown suite '" << a.suite << "'\n";
    return kExitUsage;
  }

  fs::create_directories(a.out_dir);
  const std::string csv_path = a.out_dir + "/" + a.suite + ".csv";
  write_report_csv(csv_path, rows);

  json summary{{"suite", a.suite}, {"tol", a.tol}, {"rows", json::array()}};
  for (const auto& r : rows) summary["rows"].push_back(row_to_json(r));
  std::vector<double> ns, times;
  for (const auto& r : rows)
    if (!r.failed) {
      ns.push_back(static_cast<double>(r.n));
      times.push_back(r.time_s);
    }
  if (ns.size() >= 2 && ns.front() != ns.back()) {
    LogLogFit fit = fit_loglog(ns, times);
    summary["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}};
  }
  std::ofstream f(a.out_dir + "/summary.json");
  f << summary.dump(2) << "\n";
  std::cout << report_csv_string(rows);

  return any_failed ? kExitNotConverged : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Birkhoff polytope projection and QP toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  ProjectArgs pa;
  auto* proj = app.add_subcommand("project", "Project a matrix onto the Birkhoff polytope");
  proj->add_option("--input", pa.input, "Matrix text file (first line n, then n rows)");
  proj->add_option("--random", pa.random_spec, "Random standard-normal instance: n,seed");
  proj->add_option("--kernel", pa.kernel, "Gaussian kernel matrix from a sparse feature file");
  proj->add_option("--solver", pa.solver, "ssncg or apg")->default_str("ssncg");
  proj->add_option("--tol", pa.tol, "KKT residual tolerance")->default_val(1e-9);
  proj->add_option("--out", pa.out, "Report path (.csv or .json)");
  proj->add_option("--dump-x", pa.dump_x, "Write the projection to a matrix text file");
  proj->add_option("--maxit", pa.maxit, "Iteration cap override");

  QpArgs qa;
  auto* qp = app.add_subcommand("qp", "Solve the convex QP relaxation of a QAP instance");
  qp->add_option("--qaplib", qa.qaplib, "QAPLIB-format instance file")->required();
  qp->add_option("--tol", qa.tol, "KKT residual tolerance")->default_val(1e-7);
  qp->add_option("--out", qa.out, "Report path (.csv or .json)");
  qp->add_option("--sigma0", qa.sigma0, "Initial penalty parameter")->default_val(1.0);
  qp->add_option("--max-outer", qa.max_outer, "Outer iteration cap")->default_val(100);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep");
  bench->add_option("--suite", ba.suite, "proj-random, proj-kernel or qap")->required();
  bench->add_option("--sizes", ba.sizes, "Instance sizes")->delimiter(',');
  bench->add_option("--seeds", ba.seeds, "Random seeds")->delimiter(',');
  bench->add_option("--inputs", ba.inputs, "Input files for proj-kernel / qap");
  bench->add_option("--out", ba.out_dir, "Output directory")->default_str(".");
  bench->add_option("--tol", ba.tol, "KKT residual tolerance")->default_val(1e-9);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (proj->parsed()) return run_project(pa);
    if (qp->parsed()) return run_qp(qa);
    if (bench->parsed()) return run_bench(ba);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
