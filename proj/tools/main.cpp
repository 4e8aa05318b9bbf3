// conservafuse CLI: batch front-end over the fusion library. Reads estimator
// pairs from a JSON problem file and runs fusion, conservativeness audits,
// figure-data exports, and omega optimization.
//
// Exit codes: 0 success, 2 input/validation failure, 3 numeric degeneracy,
// 4 internal error. Failures emit a structured JSON error object on stderr.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conservafuse/conservafuse.hpp"

namespace cf = conservafuse;
using cf::json;

namespace {

cf::Tolerances tolerances_from_env() {
  cf::Tolerances tol;
  if (const char* raw = std::getenv("CONSERVAFUSE_TOL")) {
    char* end = nullptr;
    const double value = std::strtod(raw, &end);
    if (end == raw || !(value > 0.0)) {
      cf::raise(cf::errc::invalid_input, "CONSERVAFUSE_TOL must be a positive number");
    }
    tol.symmetry = value;
    tol.psd = value;
  }
  return tol;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) cf::raise(cf::errc::invalid_input, "cannot open input file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    cf::raise(cf::errc::invalid_input, std::string("JSON parse error: ") + e.what());
  }
  return j;
}

std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> problem_means(
    const cf::ProblemFile& problem) {
  if (problem.est_a.mean() && problem.est_b.mean()) {
    return std::make_pair(*problem.est_a.mean(), *problem.est_b.mean());
  }
  return std::nullopt;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// 17 significant digits keeps the CSV output bit-stable across runs.
std::string format_number(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void write_polyline_csv(std::ofstream& out, const std::string& label,
                        const std::vector<Eigen::Vector2d>& points) {
  const auto count = static_cast<double>(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double theta = 2.0 * M_PI * static_cast<double>(k) / count;
    out << label << ',' << format_number(theta) << ',' << format_number(points[k].x()) << ','
        << format_number(points[k].y()) << '\n';
  }
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) cf::raise(cf::errc::invalid_input, "cannot write '" + path.string() + "'");
  out << "label,theta,x1,x2\n";
  return out;
}

std::string format_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

int run_fuse(const std::string& input, const std::string& method, std::optional<double> omega,
             std::optional<double> rho, const cf::Tolerances& tol) {
  const cf::ProblemFile problem = cf::problem_from_json(load_json(input), tol);
  cf::FusionResult result;
  if (method == "bsc") {
    if (problem.cross_candidates.empty()) {
      cf::raise(cf::errc::invalid_input, "method 'bsc' needs a P_AB entry in the problem file");
    }
    result = cf::bar_shalom_campo(problem.est_a, problem.est_b,
                                  cf::CrossCovariance{problem.cross_candidates.front(), {}});
  } else if (method == "if") {
    result = cf::information_fusion(problem.est_a, problem.est_b);
  } else if (method == "ci") {
    if (!omega) cf::raise(cf::errc::invalid_input, "method 'ci' needs --omega");
    result = cf::ci_bound(problem.est_a.c(), problem.est_b.c(), *omega, problem_means(problem));
  } else if (method == "sci") {
    if (!omega) cf::raise(cf::errc::invalid_input, "method 'sci' needs --omega");
    result = cf::sci_bound(problem.est_a, problem.est_b, *omega);
  } else if (method == "rho") {
    if (!omega) cf::raise(cf::errc::invalid_input, "method 'rho' needs --omega");
    const std::optional<double> rho_value = rho ? rho : problem.rho;
    if (!rho_value) {
      cf::raise(cf::errc::invalid_input, "method 'rho' needs --rho or a 'rho' problem field");
    }
    result = cf::rho_bound(problem.est_a.c(), problem.est_b.c(), *rho_value, *omega);
    if (auto means = problem_means(problem)) {
      result.mean = result.gains.k_a * means->first + result.gains.k_b * means->second;
    }
  } else {
    cf::raise(cf::errc::invalid_input, "unknown method '" + method + "'");
  }
  emit(cf::fusion_result_to_json(result));
  return 0;
}

int run_audit(const std::string& input, int grid, long samples, std::uint64_t seed,
              const cf::Tolerances& tol) {
  const cf::ProblemFile problem = cf::problem_from_json(load_json(input), tol);
  cf::AuditOptions options;
  options.omega_grid = grid;
  options.samples = samples;
  options.seed = seed;
  const cf::AuditReport report =
      cf::audit_conservativeness(problem.est_a, problem.est_b, options);
  json j;
  j["pass"] = report.pass;
  j["worst_relative_violation"] = report.worst_rel_violation;
  j["threshold"] = -options.rel_tol;
  j["omega_grid"] = report.omega_grid;
  j["samples"] = report.samples;
  j["seed"] = report.seed;
  if (report.worst) {
    json w;
    w["omega"] = report.worst->omega;
    w["sample_index"] = report.worst->sample_index;
    w["lambda_min_rel"] = report.worst->rel_violation;
    w["P_AB"] = cf::matrix_to_json(report.worst->p_ab);
    j["witness"] = w;
  }
  emit(j);
  return 0;
}

int run_figures(const std::string& input, const std::string& out_dir, const cf::Tolerances& tol) {
  const cf::ProblemFile problem = cf::problem_from_json(load_json(input), tol);
  const cf::SplitEstimate& a = problem.est_a;
  const cf::SplitEstimate& b = problem.est_b;
  if (a.dim() != 2) cf::raise(cf::errc::dimension_not_two, "figure export needs 2-D estimators");
  const int points = 360;
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;

  {
    auto ci = open_csv(dir / "ci_bounds.csv");
    auto sci = open_csv(dir / "sci_bounds.csv");
    for (int i = 0; i <= 10; ++i) {
      const double omega = static_cast<double>(i) / 10.0;
      const std::string label = format_label(omega);
      write_polyline_csv(
          ci, label,
          cf::ellipse_boundary(cf::ci_bound(a.c(), b.c(), omega).bound, points, tol).points);
      write_polyline_csv(
          sci, label,
          cf::ellipse_boundary(cf::sci_bound(a, b, omega).bound, points, tol).points);
    }
    written.push_back((dir / "ci_bounds.csv").string());
    written.push_back((dir / "sci_bounds.csv").string());
  }

  {
    auto vstar = open_csv(dir / "vstar_boundary.csv");
    cf::SciPrecisionCurve curve(a, b);
    write_polyline_csv(vstar, "vstar", cf::vstar_boundary(curve, points));
    written.push_back((dir / "vstar_boundary.csv").string());
  }

  {
    // Fused-covariance ellipses for the five rank-one cross-covariances along
    // x_i = [cos(pi i / 5), sin(pi i / 5)] with averaging gains K = I/2.
    auto wc = open_csv(dir / "worstcase_ellipses.csv");
    const Eigen::MatrixXd half = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    const cf::FusionGains gains{half, half};
    for (int i = 0; i < 5; ++i) {
      const double angle = M_PI * static_cast<double>(i) / 5.0;
      const Eigen::Vector2d direction(std::cos(angle), std::sin(angle));
      const cf::CrossCovariance pab = cf::rank_one_cross_cov(a.p(), b.p(), direction);
      const cf::SpdMatrix fused = cf::fused_covariance(gains, a, b, pab);
      write_polyline_csv(wc, std::to_string(i),
                         cf::ellipse_boundary(fused, points, tol).points);
    }
    written.push_back((dir / "worstcase_ellipses.csv").string());
  }

  {
    // Minimal-volume boundaries for the bounded-correlation family
    // rho = 0, 0.25, ..., 1 built from the problem's total covariances.
    auto sweep = open_csv(dir / "rho_sweep.csv");
    for (int i = 0; i <= 4; ++i) {
      const double rho = 0.25 * static_cast<double>(i);
      const cf::SplitEstimate ra = cf::SplitEstimate::from_raw(
          rho * a.c().data(), (1.0 - rho) * a.c().data(), std::nullopt, tol);
      const cf::SplitEstimate rb = cf::SplitEstimate::from_raw(
          rho * b.c().data(), (1.0 - rho) * b.c().data(), std::nullopt, tol);
      cf::SciPrecisionCurve curve(ra, rb);
      write_polyline_csv(sweep, format_label(rho), cf::vstar_boundary(curve, points));
    }
    written.push_back((dir / "rho_sweep.csv").string());
  }

  json j;
  j["written"] = written;
  emit(j);
  return 0;
}

int run_optimize(const std::string& input, const std::string& cost_name,
                 const cf::Tolerances& tol) {
  const cf::ProblemFile problem = cf::problem_from_json(load_json(input), tol);
  cf::CostFunction cost = cf::CostFunction::trace();
  if (cost_name == "trace") {
    cost = cf::CostFunction::trace();
  } else if (cost_name == "logdet" || cost_name == "det") {
    cost = cf::CostFunction::logdet();
  } else if (cost_name == "maxEigenvalue" || cost_name == "maxeig") {
    cost = cf::CostFunction::max_eigenvalue();
  } else {
    cf::raise(cf::errc::invalid_input, "unknown cost '" + cost_name + "'");
  }
  const cf::OptimizeResult opt = cf::optimize_omega(problem.est_a, problem.est_b, cost);
  json j;
  j["omega_star"] = opt.omega_star;
  j["cost"] = cost.name();
  j["J_value"] = opt.j_value;
  j["bound"] = cf::matrix_to_json(opt.result.bound.data());
  j["K_A"] = cf::matrix_to_json(opt.result.gains.k_a);
  j["K_B"] = cf::matrix_to_json(opt.result.gains.k_b);
  j["convexityExploited"] = opt.convexity_exploited;
  if (opt.cost_contract_unchecked) j["costContractChecked"] = false;
  emit(j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conservative split-covariance fusion toolbox"};
  app.require_subcommand(1);

  std::string input;
  std::string method;
  std::string cost = "trace";
  std::string out_dir;
  double omega = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  long samples = 10000;
  std::uint64_t seed = 0;
  int grid = 21;

  auto* fuse = app.add_subcommand("fuse", "fuse two estimators with a chosen rule");
  fuse->add_option("--input", input, "problem JSON file")->required();
  fuse->add_option("--method", method, "bsc | if | ci | sci | rho")->required();
  auto* fuse_omega = fuse->add_option("--omega", omega, "omega parameter for ci/sci/rho");
  auto* fuse_rho = fuse->add_option("--rho", rho, "correlation bound for the rho family");

  auto* audit = app.add_subcommand("audit", "sweep conservativeness of the SCI bounds");
  audit->add_option("--input", input, "problem JSON file")->required();
  audit->add_option("--grid", grid, "number of omega grid points");
  audit->add_option("--samples", samples, "number of sampled cross-covariances");
  audit->add_option("--seed", seed, "sampler seed");

  auto* figures = app.add_subcommand("figures", "emit ellipse/boundary CSV data");
  figures->add_option("--input", input, "problem JSON file")->required();
  figures->add_option("--out", out_dir, "output directory")->required();

  auto* optimize = app.add_subcommand("optimize", "minimize J(B_SCI(omega)) over omega");
  optimize->add_option("--input", input, "problem JSON file")->required();
  optimize->add_option("--cost", cost, "trace | logdet | maxEigenvalue");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const cf::Tolerances tol = tolerances_from_env();
    if (fuse->parsed()) {
      return run_fuse(input, method,
                      fuse_omega->count() ? std::optional<double>(omega) : std::nullopt,
                      fuse_rho->count() ? std::optional<double>(rho) : std::nullopt, tol);
    }
    if (audit->parsed()) return run_audit(input, grid, samples, seed, tol);
    if (figures->parsed()) return run_figures(input, out_dir, tol);
    if (optimize->parsed()) return run_optimize(input, cost, tol);
    return 2;
  } catch (const cf::Error& e) {
    json err;
    err["error"]["code"] = cf::errc_name(e.code());
    err["error"]["message"] = e.what();
    std::cerr << err.dump(2) << "\n";
    return cf::is_degeneracy(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    json err;
    err["error"]["code"] = "Internal";
    err["error"]["message"] = e.what();
    std::cerr << err.dump(2) << "\n";
    return 4;
  }
}
