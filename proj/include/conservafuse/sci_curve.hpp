#pragma once

// The SCI precision curve H(w) = w (P_A + w Q_A)^-1 + (1-w) (P_B + (1-w) Q_B)^-1
// together with its first and second derivatives in w, the three-case direction
// classification, and the bisection solver for the interior stationary point.
//
// For a fixed direction x the scalar map h(w) = x^T H(w) x is strictly concave
// whenever the uncorrelated components are strictly positive definite, so h
// attains its maximum either at an endpoint (cases 1 and 2) or at the unique
// root of h' (case 3).

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/spd.hpp"

namespace conservafuse {

namespace detail {

// Cholesky-based inverse with a pivot-ratio guard; nullopt when the matrix is
// not usably positive definite.
inline std::optional<Eigen::MatrixXd> try_inverse_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmin > 0.0) || dmin < 1e-7 * dmax) return std::nullopt;
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return symmetrized(inv);
}

inline std::optional<Eigen::VectorXd> try_solve_spd(const Eigen::MatrixXd& m,
                                                    const Eigen::VectorXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if (!(d.minCoeff() > 0.0) || d.minCoeff() < 1e-7 * d.maxCoeff()) return std::nullopt;
  return llt.solve(rhs);
}

inline void check_omega(double omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    raise(errc::omega_out_of_range, "omega = " + std::to_string(omega) + " outside [0, 1]");
  }
}

}  // namespace detail

// Direction classification boundary: |x^T H'(w) x| at or below this fraction
// of the term magnitudes counts as an exact zero and is assigned to case 3.
inline constexpr double kCaseBoundaryRel = 1e-12;

// Bisection stops once the bracket around the stationary omega is this narrow.
inline constexpr double kOmegaBracketWidth = 1e-12;

class SciPrecisionCurve {
 public:
  SciPrecisionCurve(SplitEstimate a, SplitEstimate b)
      : a_(std::move(a)), b_(std::move(b)) {
    if (a_.dim() != b_.dim()) {
      raise(errc::dimension_mismatch, "estimators have different dimensions");
    }
  }

  int dim() const { return a_.dim(); }
  const SplitEstimate& estimate_a() const { return a_; }
  const SplitEstimate& estimate_b() const { return b_; }

  // A(w) = (P_A + w Q_A)^-1 and B(w) = (P_B + w Q_B)^-1.
  Eigen::MatrixXd a_inverse(double omega) const {
    auto inv = detail::try_inverse_spd(a_.p().data() + omega * a_.q().data());
    if (!inv) {
      raise(errc::degenerate_split,
            "P_A + omega Q_A is singular at omega = " + std::to_string(omega));
    }
    return *inv;
  }

  Eigen::MatrixXd b_inverse(double omega) const {
    auto inv = detail::try_inverse_spd(b_.p().data() + omega * b_.q().data());
    if (!inv) {
      raise(errc::degenerate_split,
            "P_B + omega Q_B is singular at omega = " + std::to_string(omega));
    }
    return *inv;
  }

  // H(w), symmetrized.
  Eigen::MatrixXd precision(double omega) const {
    detail::check_omega(omega);
    const Eigen::MatrixXd a = a_inverse(omega);
    const Eigen::MatrixXd b = b_inverse(1.0 - omega);
    return symmetrized(omega * a + (1.0 - omega) * b);
  }

  // H'(w) = A(w) P_A A(w) - B(1-w) P_B B(1-w). A side with an exactly zero P
  // contributes an exactly zero term, matching the w-interior limit; this
  // keeps the pure-rho = 0 and P = 0 families evaluable.
  Eigen::MatrixXd first_derivative(double omega) const {
    detail::check_omega(omega);
    const int n = dim();
    Eigen::MatrixXd term_a = Eigen::MatrixXd::Zero(n, n);
    if (!a_.p_is_zero()) {
      const Eigen::MatrixXd a = a_inverse(omega);
      term_a = a * a_.p().data() * a;
    }
    Eigen::MatrixXd term_b = Eigen::MatrixXd::Zero(n, n);
    if (!b_.p_is_zero()) {
      const Eigen::MatrixXd b = b_inverse(1.0 - omega);
      term_b = b * b_.p().data() * b;
    }
    return symmetrized(term_a - term_b);
  }

  // H''(w) = -A [Q_A A P_A + P_A A Q_A] A - B [Q_B B P_B + P_B B Q_B] B
  // with A = A(w) and B = B(1-w).
  Eigen::MatrixXd second_derivative(double omega) const {
    detail::check_omega(omega);
    const int n = dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    if (!a_.p_is_zero()) {
      const Eigen::MatrixXd a = a_inverse(omega);
      const Eigen::MatrixXd qa = a_.q().data() * a * a_.p().data();
      out -= a * (qa + qa.transpose()) * a;
    }
    if (!b_.p_is_zero()) {
      const Eigen::MatrixXd b = b_inverse(1.0 - omega);
      const Eigen::MatrixXd qb = b_.q().data() * b * b_.p().data();
      out -= b * (qb + qb.transpose()) * b;
    }
    return symmetrized(out);
  }

  double direction_value(const Eigen::VectorXd& x, double omega) const {
    return quad_form(precision(omega), x);
  }

  // The two non-negative terms of h'(w) = x^T H'(w) x, returned separately so
  // callers can build scale-aware zero tests.
  std::pair<double, double> slope_terms(const Eigen::VectorXd& x, double omega) const {
    detail::check_omega(omega);
    double term_a = 0.0;
    if (!a_.p_is_zero()) {
      auto u = detail::try_solve_spd(a_.p().data() + omega * a_.q().data(), x);
      if (!u) {
        raise(errc::degenerate_split,
              "P_A + omega Q_A is singular at omega = " + std::to_string(omega));
      }
      term_a = quad_form(a_.p().data(), *u);
    }
    double term_b = 0.0;
    if (!b_.p_is_zero()) {
      auto v = detail::try_solve_spd(b_.p().data() + (1.0 - omega) * b_.q().data(), x);
      if (!v) {
        raise(errc::degenerate_split,
              "P_B + (1 - omega) Q_B is singular at omega = " + std::to_string(omega));
      }
      term_b = quad_form(b_.p().data(), *v);
    }
    return {term_a, term_b};
  }

  double direction_slope(const Eigen::VectorXd& x, double omega) const {
    auto [ta, tb] = slope_terms(x, omega);
    return ta - tb;
  }

 private:
  SplitEstimate a_, b_;
};

inline Eigen::MatrixXd sci_precision(const SciPrecisionCurve& curve, double omega, int order) {
  switch (order) {
    case 0: return curve.precision(omega);
    case 1: return curve.first_derivative(omega);
    case 2: return curve.second_derivative(omega);
    default: raise(errc::parameter_out_of_range, "derivative order must be 0, 1 or 2");
  }
}

namespace detail {

inline void check_direction(const Eigen::VectorXd& x) {
  if (!(x.norm() > 0.0)) raise(errc::zero_vector, "direction must be non-zero");
}

}  // namespace detail

// Case 1: h'(0) < 0 (maximum at omega = 0). Case 2: h'(1) > 0 (maximum at
// omega = 1). Case 3: h' crosses zero inside [0, 1]. Values within the
// classification boundary of zero count as case 3.
inline int classify_direction(const SciPrecisionCurve& curve, const Eigen::VectorXd& x) {
  detail::check_direction(x);
  const auto [ta0, tb0] = curve.slope_terms(x, 0.0);
  if (ta0 - tb0 < -kCaseBoundaryRel * (ta0 + tb0)) return 1;
  const auto [ta1, tb1] = curve.slope_terms(x, 1.0);
  if (ta1 - tb1 > kCaseBoundaryRel * (ta1 + tb1)) return 2;
  return 3;
}

namespace detail {

// Bisection on the decreasing map w -> h'(w); assumes a case-3 direction.
inline double stationary_omega_unchecked(const SciPrecisionCurve& curve,
                                         const Eigen::VectorXd& x) {
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 80 && (hi - lo) > kOmegaBracketWidth; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double slope = curve.direction_slope(x, mid);
    if (slope == 0.0) return mid;
    if (slope > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline double stationary_omega(const SciPrecisionCurve& curve, const Eigen::VectorXd& x) {
  detail::check_direction(x);
  if (classify_direction(curve, x) != 3) {
    raise(errc::wrong_case, "direction is not a case-3 direction");
  }
  return detail::stationary_omega_unchecked(curve, x);
}

}  // namespace conservafuse
