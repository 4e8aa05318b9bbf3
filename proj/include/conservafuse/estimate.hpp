#pragma once

// Split-covariance estimator values. An estimator carries an optional mean and
// the decomposition C = P + Q of its error covariance into a part P whose
// cross-correlation with the other estimator is unknown and a part Q that is
// uncorrelated with everything else.

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "conservafuse/errors.hpp"
#include "conservafuse/spd.hpp"
#include "conservafuse/tolerances.hpp"

namespace conservafuse {

class SplitEstimate {
 public:
  SplitEstimate(SpdMatrix correlated, SpdMatrix uncorrelated,
                std::optional<Eigen::VectorXd> mean = std::nullopt,
                const Tolerances& tol = {})
      : p_(std::move(correlated)), q_(std::move(uncorrelated)), mean_(std::move(mean)) {
    if (p_.dim() != q_.dim()) {
      raise(errc::dimension_mismatch, "P is " + std::to_string(p_.dim()) + "-dim but Q is " +
                                          std::to_string(q_.dim()) + "-dim");
    }
    if (mean_ && mean_->size() != p_.dim()) {
      raise(errc::dimension_mismatch, "mean dimension does not match covariance dimension");
    }
    // C = P + Q must be strictly positive definite; P and Q individually only
    // need to be PSD.
    Eigen::MatrixXd total = symmetrized(p_.data() + q_.data());
    c_ = SpdMatrix::validated(total, /*strict=*/true, tol);
    p_zero_ = (p_.data().array() == 0.0).all();
    q_zero_ = (q_.data().array() == 0.0).all();
  }

  static SplitEstimate from_raw(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                                std::optional<Eigen::VectorXd> mean = std::nullopt,
                                const Tolerances& tol = {}) {
    return SplitEstimate(SpdMatrix::validated(p, false, tol), SpdMatrix::validated(q, false, tol),
                         std::move(mean), tol);
  }

  int dim() const { return p_.dim(); }
  const SpdMatrix& p() const { return p_; }
  const SpdMatrix& q() const { return q_; }
  const SpdMatrix& c() const { return c_; }
  const std::optional<Eigen::VectorXd>& mean() const { return mean_; }

  // Exact-zero components short-circuit the derivative formulas of the SCI
  // precision curve, whose inversions do not exist in that limit.
  bool p_is_zero() const { return p_zero_; }
  bool q_is_zero() const { return q_zero_; }

  bool p_strictly_positive(const Tolerances& tol = {}) const {
    return p_.strictly_positive(tol);
  }

 private:
  SpdMatrix p_, q_, c_;
  std::optional<Eigen::VectorXd> mean_;
  bool p_zero_ = false;
  bool q_zero_ = false;
};

// Candidate cross-covariance P_AB between the correlated error components,
// optionally with the contraction Omega such that P_AB = P_A^1/2 Omega P_B^1/2.
struct CrossCovariance {
  Eigen::MatrixXd matrix;
  std::optional<Eigen::MatrixXd> contraction;
};

}  // namespace conservafuse
