#pragma once

// Closed-form fusion rules for two split-covariance estimators:
//
//  - the fused MSE map C_F(K, P_AB) for arbitrary unbiased gains,
//  - Bar-Shalom-Campo, the Loewner-minimal fusion for a known cross-covariance,
//  - the Information Filter (uncorrelated special case),
//  - Covariance Intersection and Split Covariance Intersection bounds,
//  - the bounded-correlation rho-family, a reparameterized SCI.
//
// All returned covariances are symmetrized after the arithmetic and validated
// before they are handed back, so float drift cannot leak asymmetric or
// indefinite matrices downstream.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/sci_curve.hpp"
#include "conservafuse/spd.hpp"

namespace conservafuse {

struct FusionGains {
  Eigen::MatrixXd k_a;
  Eigen::MatrixXd k_b;
};

// Unbiasedness constraint K_A + K_B = I.
inline void check_gains(const FusionGains& gains) {
  if (gains.k_a.rows() != gains.k_a.cols() || gains.k_b.rows() != gains.k_b.cols() ||
      gains.k_a.rows() != gains.k_b.rows()) {
    raise(errc::dimension_mismatch, "gain matrices must be square and equally sized");
  }
  const int n = static_cast<int>(gains.k_a.rows());
  const double residual =
      (gains.k_a + gains.k_b - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10)) {
    raise(errc::gain_constraint_violated,
          "K_A + K_B deviates from identity by " + std::to_string(residual));
  }
}

// Tagged scalar parameterization that produced a fusion result.
struct FusionParameter {
  std::optional<double> omega;
  std::optional<double> rho;
  std::optional<double> gamma;
};

struct FusionResult {
  SpdMatrix bound;
  FusionGains gains;
  FusionParameter parameter;
  std::optional<Eigen::VectorXd> mean;
};

namespace detail {

inline void check_same_dim(const SplitEstimate& a, const SplitEstimate& b) {
  if (a.dim() != b.dim()) {
    raise(errc::dimension_mismatch, "estimators have different dimensions");
  }
}

inline std::optional<Eigen::VectorXd> fuse_means(const FusionGains& gains,
                                                 const SplitEstimate& a,
                                                 const SplitEstimate& b) {
  if (a.mean() && b.mean()) {
    return Eigen::VectorXd(gains.k_a * (*a.mean()) + gains.k_b * (*b.mean()));
  }
  return std::nullopt;
}

// C_F(K, P_AB) without the SpdMatrix validation pass; hot loops use this.
inline Eigen::MatrixXd fused_covariance_matrix(const FusionGains& gains, const SplitEstimate& a,
                                               const SplitEstimate& b,
                                               const Eigen::MatrixXd& p_ab) {
  const Eigen::MatrixXd cross = gains.k_a * p_ab * gains.k_b.transpose();
  return symmetrized(gains.k_a * a.c().data() * gains.k_a.transpose() + cross +
                     cross.transpose() + gains.k_b * b.c().data() * gains.k_b.transpose());
}

// Factorization of R = C_A + C_B - P_AB - P_AB^T shared by the Bar-Shalom-
// Campo expressions. nullopt when R is not usably positive definite.
struct BscCore {
  Eigen::MatrixXd r;
  Eigen::LLT<Eigen::MatrixXd> solver;
};

inline std::optional<BscCore> try_bsc_core(const SplitEstimate& a, const SplitEstimate& b,
                                           const Eigen::MatrixXd& p_ab) {
  check_same_dim(a, b);
  if (p_ab.rows() != a.dim() || p_ab.cols() != a.dim()) {
    raise(errc::dimension_mismatch, "cross-covariance dimension disagrees with estimators");
  }
  BscCore core;
  core.r = symmetrized(a.c().data() + b.c().data() - p_ab - p_ab.transpose());
  core.solver.compute(core.r);
  if (core.solver.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = core.solver.matrixLLT().diagonal();
  if (!(d.minCoeff() > 0.0) || d.minCoeff() < 1e-7 * d.maxCoeff()) return std::nullopt;
  return core;
}

inline BscCore bsc_core(const SplitEstimate& a, const SplitEstimate& b,
                        const Eigen::MatrixXd& p_ab) {
  auto core = try_bsc_core(a, b, p_ab);
  if (!core) {
    raise(errc::singular_r,
          "R = C_A + C_B - P_AB - P_AB^T is singular; the estimators coincide in some direction");
  }
  return std::move(*core);
}

// Optimal fused covariance (the A-form) without validation; nullopt when R is
// singular. Used by the brute-force oracles, where millions of evaluations
// make the validation eigensolve noticeable.
inline std::optional<Eigen::MatrixXd> try_optimal_fused(const SplitEstimate& a,
                                                        const SplitEstimate& b,
                                                        const Eigen::MatrixXd& p_ab) {
  auto core = try_bsc_core(a, b, p_ab);
  if (!core) return std::nullopt;
  const Eigen::MatrixXd x_a = core->solver.solve(a.c().data() - p_ab.transpose());
  return symmetrized(a.c().data() - (a.c().data() - p_ab) * x_a);
}

}  // namespace detail

// Fused MSE for arbitrary unbiased gains and a candidate cross-covariance.
inline SpdMatrix fused_covariance(const FusionGains& gains, const SplitEstimate& a,
                                  const SplitEstimate& b, const CrossCovariance& pab) {
  check_gains(gains);
  detail::check_same_dim(a, b);
  if (gains.k_a.rows() != a.dim() || pab.matrix.rows() != a.dim() ||
      pab.matrix.cols() != a.dim()) {
    raise(errc::dimension_mismatch, "gain or cross-covariance dimensions disagree");
  }
  return SpdMatrix::validated(detail::fused_covariance_matrix(gains, a, b, pab.matrix));
}

// Bar-Shalom-Campo: the Loewner-minimal unbiased fusion when P_AB is known.
inline FusionResult bar_shalom_campo(const SplitEstimate& a, const SplitEstimate& b,
                                     const CrossCovariance& pab) {
  auto core = detail::bsc_core(a, b, pab.matrix);
  const Eigen::MatrixXd x_b = core.solver.solve(b.c().data() - pab.matrix);
  const Eigen::MatrixXd x_a = core.solver.solve(a.c().data() - pab.matrix.transpose());
  FusionResult out;
  out.gains.k_a = x_b.transpose();
  out.gains.k_b = x_a.transpose();
  check_gains(out.gains);
  out.bound = SpdMatrix::validated(
      symmetrized(a.c().data() - (a.c().data() - pab.matrix) * x_a), /*strict=*/true);
  out.mean = detail::fuse_means(out.gains, a, b);
  return out;
}

// The three algebraically equal expressions of the optimal fused covariance:
// the A-form, the B-form and the AB-form.
inline std::array<SpdMatrix, 3> optimal_covariance_forms(const SplitEstimate& a,
                                                         const SplitEstimate& b,
                                                         const CrossCovariance& pab) {
  auto core = detail::bsc_core(a, b, pab.matrix);
  const Eigen::MatrixXd& p_ab = pab.matrix;
  const Eigen::MatrixXd x_a = core.solver.solve(a.c().data() - p_ab.transpose());
  const Eigen::MatrixXd x_b = core.solver.solve(b.c().data() - p_ab);
  const Eigen::MatrixXd form_a = symmetrized(a.c().data() - (a.c().data() - p_ab) * x_a);
  const Eigen::MatrixXd form_b =
      symmetrized(b.c().data() - (b.c().data() - p_ab.transpose()) * x_b);
  const Eigen::MatrixXd form_ab = symmetrized(p_ab + (a.c().data() - p_ab) * x_b);
  return {SpdMatrix::validated(form_a), SpdMatrix::validated(form_b),
          SpdMatrix::validated(form_ab)};
}

// Information Filter: precision adds, the uncorrelated special case.
inline FusionResult information_fusion(const SplitEstimate& a, const SplitEstimate& b) {
  detail::check_same_dim(a, b);
  auto inv_a = detail::try_inverse_spd(a.c().data());
  auto inv_b = detail::try_inverse_spd(b.c().data());
  if (!inv_a || !inv_b) {
    raise(errc::singular_covariance, "C_A and C_B must be invertible for information fusion");
  }
  auto bound = detail::try_inverse_spd(symmetrized(*inv_a + *inv_b));
  if (!bound) raise(errc::singular_covariance, "summed precision is singular");
  FusionResult out;
  out.bound = SpdMatrix::validated(*bound, /*strict=*/true);
  out.gains.k_a = out.bound.data() * (*inv_a);
  out.gains.k_b = out.bound.data() * (*inv_b);
  check_gains(out.gains);
  out.mean = detail::fuse_means(out.gains, a, b);
  return out;
}

// Covariance Intersection: the bound precision is the convex combination
// w C_A^-1 + (1-w) C_B^-1.
inline FusionResult ci_bound(
    const SpdMatrix& c_a, const SpdMatrix& c_b, double omega,
    const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& means = std::nullopt) {
  if (c_a.dim() != c_b.dim()) {
    raise(errc::dimension_mismatch, "C_A and C_B dimensions disagree");
  }
  detail::check_omega(omega);
  auto inv_a = detail::try_inverse_spd(c_a.data());
  auto inv_b = detail::try_inverse_spd(c_b.data());
  if (!inv_a || !inv_b) {
    raise(errc::singular_covariance, "C_A and C_B must be invertible for CI");
  }
  auto bound = detail::try_inverse_spd(symmetrized(omega * (*inv_a) + (1.0 - omega) * (*inv_b)));
  if (!bound) raise(errc::singular_covariance, "CI precision is singular");
  FusionResult out;
  out.bound = SpdMatrix::validated(*bound, /*strict=*/true);
  out.gains.k_a = omega * out.bound.data() * (*inv_a);
  out.gains.k_b = (1.0 - omega) * out.bound.data() * (*inv_b);
  check_gains(out.gains);
  out.parameter.omega = omega;
  if (means) {
    out.mean = Eigen::VectorXd(out.gains.k_a * means->first + out.gains.k_b * means->second);
  }
  return out;
}

namespace detail {

// SCI bound matrix without validation; the optimizer's line searches evaluate
// this thousands of times per call.
inline Eigen::MatrixXd sci_bound_matrix(const SplitEstimate& a, const SplitEstimate& b,
                                        double omega) {
  check_same_dim(a, b);
  check_omega(omega);
  auto inv_a = try_inverse_spd(a.p().data() + omega * a.q().data());
  if (!inv_a) {
    raise(errc::degenerate_split,
          "P_A + omega Q_A is singular at omega = " + std::to_string(omega));
  }
  auto inv_b = try_inverse_spd(b.p().data() + (1.0 - omega) * b.q().data());
  if (!inv_b) {
    raise(errc::degenerate_split,
          "P_B + (1 - omega) Q_B is singular at omega = " + std::to_string(omega));
  }
  auto bound = try_inverse_spd(symmetrized(omega * (*inv_a) + (1.0 - omega) * (*inv_b)));
  if (!bound) {
    raise(errc::degenerate_split, "SCI precision is singular at omega = " + std::to_string(omega));
  }
  return *bound;
}

}  // namespace detail

// Split Covariance Intersection at a fixed omega. The domain is restricted to
// omega values where both P_A + omega Q_A and P_B + (1-omega) Q_B are strictly
// positive definite; no regularization is injected at degenerate endpoints.
inline FusionResult sci_bound(const SplitEstimate& a, const SplitEstimate& b, double omega) {
  detail::check_same_dim(a, b);
  detail::check_omega(omega);
  auto inv_a = detail::try_inverse_spd(a.p().data() + omega * a.q().data());
  if (!inv_a) {
    raise(errc::degenerate_split,
          "P_A + omega Q_A is singular at omega = " + std::to_string(omega));
  }
  auto inv_b = detail::try_inverse_spd(b.p().data() + (1.0 - omega) * b.q().data());
  if (!inv_b) {
    raise(errc::degenerate_split,
          "P_B + (1 - omega) Q_B is singular at omega = " + std::to_string(omega));
  }
  auto bound = detail::try_inverse_spd(symmetrized(omega * (*inv_a) + (1.0 - omega) * (*inv_b)));
  if (!bound) {
    raise(errc::degenerate_split, "SCI precision is singular at omega = " + std::to_string(omega));
  }
  FusionResult out;
  out.bound = SpdMatrix::validated(*bound, /*strict=*/true);
  out.gains.k_a = omega * out.bound.data() * (*inv_a);
  out.gains.k_b = (1.0 - omega) * out.bound.data() * (*inv_b);
  check_gains(out.gains);
  out.parameter.omega = omega;
  out.mean = detail::fuse_means(out.gains, a, b);
  return out;
}

// Bounded-correlation family: SCI applied to the split P = rho C, Q = (1-rho) C,
// simplified to weights w / (rho + w (1-rho)) on the precisions.
inline FusionResult rho_bound(const SpdMatrix& c_a, const SpdMatrix& c_b, double rho,
                              double omega) {
  if (c_a.dim() != c_b.dim()) {
    raise(errc::dimension_mismatch, "C_A and C_B dimensions disagree");
  }
  if (!(rho >= 0.0 && rho <= 1.0) || !(omega >= 0.0 && omega <= 1.0)) {
    raise(errc::parameter_out_of_range, "rho and omega must lie in [0, 1]");
  }
  const double omega_bar = 1.0 - omega;
  const double denom_a = rho + omega * (1.0 - rho);
  const double denom_b = rho + omega_bar * (1.0 - rho);
  if (!(denom_a > 0.0) || !(denom_b > 0.0)) {
    raise(errc::degenerate_denominator,
          "rho + omega (1 - rho) vanishes; rho = 0 with omega at an endpoint");
  }
  auto inv_a = detail::try_inverse_spd(c_a.data());
  auto inv_b = detail::try_inverse_spd(c_b.data());
  if (!inv_a || !inv_b) {
    raise(errc::singular_covariance, "C_A and C_B must be invertible for the rho family");
  }
  const double w_a = omega / denom_a;
  const double w_b = omega_bar / denom_b;
  auto bound = detail::try_inverse_spd(symmetrized(w_a * (*inv_a) + w_b * (*inv_b)));
  if (!bound) raise(errc::degenerate_denominator, "rho-family precision is singular");
  FusionResult out;
  out.bound = SpdMatrix::validated(*bound, /*strict=*/true);
  out.gains.k_a = w_a * out.bound.data() * (*inv_a);
  out.gains.k_b = w_b * out.bound.data() * (*inv_b);
  check_gains(out.gains);
  out.parameter.omega = omega;
  out.parameter.rho = rho;
  if (omega > 0.0) out.parameter.gamma = omega_bar / omega;
  return out;
}

}  // namespace conservafuse
