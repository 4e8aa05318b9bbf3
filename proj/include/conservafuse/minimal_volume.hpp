#pragma once

// The minimal volume that every conservative bound must cover, driven by the
// direction function g(x) = min over admissible P_AB of x^T M_F*(P_AB) x.
// g is evaluated through the closed three-case path (classification plus
// bisection at a stationary omega); the equivalent max-over-omega grid and the
// brute-force sampling oracle exist for cross-checks. Membership g(x) <= 1
// defines the volume; the tightness search certifies whether a given SCI bound
// touches it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "conservafuse/admissible.hpp"
#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/fusion.hpp"
#include "conservafuse/sci_curve.hpp"
#include "conservafuse/spd.hpp"

namespace conservafuse {

struct DirectionAnalysis {
  Eigen::VectorXd x;
  int case_tag = 3;
  double omega0 = 0.0;
  double g_value = 0.0;
  CrossCovariance worst_case;
};

namespace detail {

struct CasePoint {
  int tag;
  double omega0;
};

inline CasePoint case_point(const SciPrecisionCurve& curve, const Eigen::VectorXd& x) {
  const int tag = classify_direction(curve, x);
  if (tag == 1) return {1, 0.0};
  if (tag == 2) return {2, 1.0};
  return {3, stationary_omega_unchecked(curve, x)};
}

}  // namespace detail

// g(x) alone, without constructing the worst-case witness.
inline double min_fused_precision(const SciPrecisionCurve& curve, const Eigen::VectorXd& x) {
  detail::check_direction(x);
  const auto cp = detail::case_point(curve, x);
  return curve.direction_value(x, cp.omega0);
}

// Full evaluation of g along x: case tag, maximizing omega, value, and the
// admissible cross-covariance attaining it. When both correlated components
// are exactly zero the only admissible cross-covariance is the zero matrix,
// which is returned directly; the rank-one construction needs P inverses.
inline DirectionAnalysis analyze_direction(const SciPrecisionCurve& curve,
                                           const Eigen::VectorXd& x) {
  detail::check_direction(x);
  const auto cp = detail::case_point(curve, x);
  DirectionAnalysis out;
  out.x = x;
  out.case_tag = cp.tag;
  out.omega0 = cp.omega0;
  out.g_value = curve.direction_value(x, cp.omega0);
  const SplitEstimate& a = curve.estimate_a();
  const SplitEstimate& b = curve.estimate_b();
  if (a.p_is_zero() && b.p_is_zero()) {
    const int n = curve.dim();
    out.worst_case.matrix = Eigen::MatrixXd::Zero(n, n);
    out.worst_case.contraction = Eigen::MatrixXd::Zero(n, n);
  } else {
    out.worst_case = detail::worst_case_with(curve, x, cp.tag, cp.omega0).cross;
  }
  return out;
}

// Brute-force oracle for g: minimum of x^T M_F*(P_AB) x over a deterministic
// sample of the admissible set, augmented with the worst-case construction
// along x when it exists. Independent of the three-case evaluation path.
inline double g_min_oracle(const SciPrecisionCurve& curve, const Eigen::VectorXd& x,
                           int sample_count, std::uint64_t seed) {
  detail::check_direction(x);
  const SplitEstimate& a = curve.estimate_a();
  const SplitEstimate& b = curve.estimate_b();
  CrossCovSampler sampler(a, b, seed);
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::MatrixXd& p_ab) {
    auto cov = detail::try_optimal_fused(a, b, p_ab);
    if (!cov) return;
    Eigen::LLT<Eigen::MatrixXd> llt(*cov);
    if (llt.info() != Eigen::Success) return;
    best = std::min(best, x.dot(llt.solve(x)));
  };
  for (int i = 0; i < sample_count; ++i) {
    consider(sampler.draw(static_cast<std::uint64_t>(i)).matrix);
  }
  try {
    consider(worst_case_cross_cov(x, a, b).cross.matrix);
  } catch (const Error&) {
    // Singular correlated parts: the sampled minimum stands on its own.
  }
  return best;
}

// Membership in the minimal volume, with g(0) := 0.
inline bool vstar_contains(const SciPrecisionCurve& curve, const Eigen::VectorXd& x) {
  if (!(x.norm() > 0.0)) return true;
  return min_fused_precision(curve, x) <= 1.0 + 1e-12;
}

using Polyline2D = std::vector<Eigen::Vector2d>;

// Boundary polyline of the minimal volume in 2-D: u(theta) / sqrt(g(u(theta))).
inline Polyline2D vstar_boundary(const SciPrecisionCurve& curve, int count) {
  if (curve.dim() != 2) {
    raise(errc::dimension_not_two, "the minimal-volume boundary is a 2-D polyline");
  }
  if (count < 1) raise(errc::parameter_out_of_range, "point count must be positive");
  Polyline2D out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(count);
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    const double g = min_fused_precision(curve, u);
    out.emplace_back(u / std::sqrt(g));
  }
  return out;
}

struct TightnessResult {
  bool tight = false;
  // Smallest found value of g(x)/x^T H(omega) x minus one; zero means the SCI
  // ellipsoid touches the minimal volume along the witness.
  double gap = 0.0;
  Eigen::VectorXd witness;
  double witness_omega0 = 0.0;
};

namespace detail {

inline std::vector<Eigen::VectorXd> tightness_seeds(int dim, int budget) {
  std::vector<Eigen::VectorXd> seeds;
  seeds.reserve(static_cast<std::size_t>(budget));
  if (dim == 2) {
    // Quadratic forms are antipodally symmetric; a half circle suffices.
    for (int j = 0; j < budget; ++j) {
      const double theta = M_PI * static_cast<double>(j) / static_cast<double>(budget);
      seeds.push_back(Eigen::Vector2d(std::cos(theta), std::sin(theta)));
    }
  } else if (dim == 3) {
    // Fibonacci sphere.
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < budget; ++j) {
      const double z = 1.0 - 2.0 * (j + 0.5) / static_cast<double>(budget);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * j;
      Eigen::Vector3d v(r * std::cos(phi), r * std::sin(phi), z);
      seeds.push_back(v);
    }
  } else {
    std::mt19937_64 rng(0x5eedf00dULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < budget; ++j) {
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v(i) = normal(rng);
      const double norm = v.norm();
      seeds.push_back(norm > 0.0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(dim, 0));
    }
  }
  return seeds;
}

}  // namespace detail

// Tightness certificate for the SCI bound at omega. Coarse sphere seeding
// followed by coordinate pattern-search refinement of the best candidates;
// this is a bounded-budget heuristic that reports the achieved gap, not a
// proof procedure.
inline TightnessResult is_tight(const SciPrecisionCurve& curve, double omega,
                                int search_budget = 256) {
  detail::check_omega(omega);
  if (search_budget < 4) raise(errc::parameter_out_of_range, "search budget too small");
  const Eigen::MatrixXd h_omega = curve.precision(omega);
  auto ratio = [&](const Eigen::VectorXd& u) {
    return min_fused_precision(curve, u) / quad_form(h_omega, u);
  };

  auto seeds = detail::tightness_seeds(curve.dim(), search_budget);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(seeds.size());
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    scored.emplace_back(ratio(seeds[j]), j);
  }
  std::sort(scored.begin(), scored.end());

  const int n = curve.dim();
  const std::size_t refine_count = std::min<std::size_t>(4, scored.size());
  double best = scored.front().first;
  Eigen::VectorXd best_u = seeds[scored.front().second];
  for (std::size_t c = 0; c < refine_count; ++c) {
    Eigen::VectorXd u = seeds[scored[c].second];
    double value = scored[c].first;
    double step = 0.2;
    int evals = 0;
    while (step > 1e-7 && evals < 4000) {
      bool improved = false;
      for (int i = 0; i < n; ++i) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd candidate = u + sign * step * Eigen::VectorXd::Unit(n, i);
          const double norm = candidate.norm();
          if (!(norm > 0.0)) continue;
          candidate /= norm;
          const double r = ratio(candidate);
          ++evals;
          if (r < value) {
            value = r;
            u = candidate;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (value < best) {
      best = value;
      best_u = u;
    }
  }

  TightnessResult out;
  out.gap = best - 1.0;
  out.tight = out.gap <= 1e-7;
  out.witness = best_u;
  const auto cp = detail::case_point(curve, best_u);
  out.witness_omega0 = cp.omega0;
  return out;
}

}  // namespace conservafuse
