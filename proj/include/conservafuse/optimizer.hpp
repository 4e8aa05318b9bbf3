#pragma once

// Scalar optimization of J(B_SCI(omega)) over omega in [0, 1]. Trace and
// log-determinant costs are convex in omega, so a plain golden-section search
// applies; the largest-eigenvalue and user-supplied costs get a grid seeding
// pass followed by golden-section inside the best bracket, since unimodality
// is not guaranteed for them. Ties break toward the smallest omega so flat
// cost plateaus produce deterministic output.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/fusion.hpp"
#include "conservafuse/spd.hpp"

namespace conservafuse {

// Cost functions must be increasing in the Loewner order. The built-ins are
// increasing analytically; a custom evaluator's monotonicity is trusted, not
// checked, and that is surfaced in the optimizer output.
class CostFunction {
 public:
  enum class Kind { trace, logdet, max_eigenvalue, custom };

  static CostFunction trace() { return CostFunction(Kind::trace); }
  static CostFunction logdet() { return CostFunction(Kind::logdet); }
  static CostFunction max_eigenvalue() { return CostFunction(Kind::max_eigenvalue); }
  static CostFunction custom(std::function<double(const Eigen::MatrixXd&)> fn) {
    CostFunction out(Kind::custom);
    out.custom_ = std::move(fn);
    return out;
  }

  Kind kind() const { return kind_; }

  const char* name() const {
    switch (kind_) {
      case Kind::trace: return "trace";
      case Kind::logdet: return "logdet";
      case Kind::max_eigenvalue: return "maxEigenvalue";
      case Kind::custom: return "custom";
    }
    return "unknown";
  }

  // The optimizer can rely on convexity in omega only for trace and logdet.
  bool convex_in_omega() const { return kind_ == Kind::trace || kind_ == Kind::logdet; }
  bool contract_unchecked() const { return kind_ == Kind::custom; }

  double operator()(const Eigen::MatrixXd& bound) const {
    double value = 0.0;
    switch (kind_) {
      case Kind::trace:
        value = bound.trace();
        break;
      case Kind::logdet: {
        // Determinant cost evaluated as log-determinant through a Cholesky
        // factor: same argmin, robust for near-singular bounds.
        Eigen::LLT<Eigen::MatrixXd> llt(bound);
        if (llt.info() != Eigen::Success) {
          raise(errc::non_finite_cost, "log-determinant of a non positive definite bound");
        }
        value = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        break;
      }
      case Kind::max_eigenvalue: {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(bound),
                                                          Eigen::EigenvaluesOnly);
        value = es.eigenvalues().maxCoeff();
        break;
      }
      case Kind::custom:
        value = custom_(bound);
        break;
    }
    if (!std::isfinite(value)) {
      raise(errc::non_finite_cost, std::string("cost '") + name() + "' returned a non-finite value");
    }
    return value;
  }

  double operator()(const SpdMatrix& bound) const { return (*this)(bound.data()); }

 private:
  explicit CostFunction(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::function<double(const Eigen::MatrixXd&)> custom_;
};

struct OptimizeResult {
  double omega_star = 0.0;
  double j_value = 0.0;
  FusionResult result;
  bool convexity_exploited = false;
  bool cost_contract_unchecked = false;
};

namespace detail {

// Golden-section minimization on [lo, hi]. The <= comparison keeps the left
// interval on ties, which breaks flat plateaus toward the smallest omega.
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline OptimizeResult optimize_omega(const SplitEstimate& a, const SplitEstimate& b,
                                     const CostFunction& cost, double tol_omega = 1e-9) {
  if (!(tol_omega > 0.0)) raise(errc::parameter_out_of_range, "tol_omega must be positive");
  auto objective = [&](double omega) { return cost(detail::sci_bound_matrix(a, b, omega)); };

  double omega_star = 0.0;
  if (cost.convex_in_omega()) {
    omega_star = detail::golden_section(objective, 0.0, 1.0, tol_omega);
  } else {
    // 101-point grid seeding, then golden-section inside the best bracket.
    // Endpoint evaluations that hit a degenerate split are skipped; they are
    // simply not candidates.
    const int grid = 101;
    int best_index = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
      const double omega = static_cast<double>(i) / (grid - 1);
      double value;
      try {
        value = objective(omega);
      } catch (const Error& e) {
        if (e.code() == errc::degenerate_split && (i == 0 || i == grid - 1)) continue;
        throw;
      }
      if (value < best_value) {
        best_value = value;
        best_index = i;
      }
    }
    if (best_index < 0) raise(errc::degenerate_split, "no evaluable omega on the seeding grid");
    const double lo = std::max(0.0, (best_index - 1) / double(grid - 1));
    const double hi = std::min(1.0, (best_index + 1) / double(grid - 1));
    omega_star = detail::golden_section(objective, lo, hi, tol_omega);
  }

  OptimizeResult out;
  out.omega_star = omega_star;
  out.result = sci_bound(a, b, omega_star);
  out.j_value = cost(out.result.bound);
  out.convexity_exploited = cost.convex_in_omega();
  out.cost_contract_unchecked = cost.contract_unchecked();
  return out;
}

// Raw cost samples J(B_SCI(omega_i)) on a uniform grid; diagnostics and
// convexity audits read these directly.
inline std::vector<std::pair<double, double>> cost_curve(const SplitEstimate& a,
                                                         const SplitEstimate& b,
                                                         const CostFunction& cost,
                                                         int grid_size) {
  if (grid_size < 3) raise(errc::parameter_out_of_range, "grid size must be at least 3");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    const double omega = static_cast<double>(i) / (grid_size - 1);
    out.emplace_back(omega, cost(detail::sci_bound_matrix(a, b, omega)));
  }
  return out;
}

}  // namespace conservafuse
