#pragma once

// Membership, randomized sampling, and the constructive worst-case elements of
// the admissible cross-covariance set: the P_AB for which the block matrix
// [[P_A, P_AB], [P_AB^T, P_B]] stays positive semi-definite.
//
// Every sampler goes through a contraction Omega with Omega^T Omega <= I and
// the factorization P_AB = P_A^1/2 Omega P_B^1/2, which is admissible by
// construction. The worst-case builder returns the rank-one boundary element
// along a direction x that makes the optimally fused precision touch the SCI
// precision curve.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/sci_curve.hpp"
#include "conservafuse/spd.hpp"

namespace conservafuse {

inline bool is_admissible(const CrossCovariance& pab, const SpdMatrix& p_a,
                          const SpdMatrix& p_b, double tol = 1e-9) {
  const int n = p_a.dim();
  if (p_b.dim() != n || pab.matrix.rows() != n || pab.matrix.cols() != n) {
    raise(errc::dimension_mismatch, "cross-covariance block dimensions disagree");
  }
  Eigen::MatrixXd block(2 * n, 2 * n);
  block.topLeftCorner(n, n) = p_a.data();
  block.topRightCorner(n, n) = pab.matrix;
  block.bottomLeftCorner(n, n) = pab.matrix.transpose();
  block.bottomRightCorner(n, n) = p_b.data();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(block), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

inline CrossCovariance cross_cov_from_contraction(const SpdMatrix& p_a, const SpdMatrix& p_b,
                                                  const Eigen::MatrixXd& contraction) {
  if (p_a.dim() != p_b.dim() || contraction.rows() != p_a.dim() ||
      contraction.cols() != p_b.dim()) {
    raise(errc::dimension_mismatch, "contraction dimensions disagree");
  }
  CrossCovariance out;
  out.matrix = sqrt_psd(p_a) * contraction * sqrt_psd(p_b);
  out.contraction = contraction;
  return out;
}

// splitmix64 step; used as the documented counter scheme deriving independent
// child seeds for batch sampling.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t child_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + 0x9e3779b97f4a7c15ull * (index + 1));
}

// Gaussian matrix scaled to a uniformly random contraction: draw G with i.i.d.
// standard normal entries, divide by its largest singular value, scale by a
// uniform u in [0, 1]. Deterministic for a given seed.
inline CrossCovariance sample_cross_cov(const SpdMatrix& p_a, const SpdMatrix& p_b,
                                        std::uint64_t seed) {
  const int n = p_a.dim();
  if (p_b.dim() != n) raise(errc::dimension_mismatch, "P_A and P_B dimensions disagree");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(g).singularValues()(0);
  Eigen::MatrixXd omega = sigma > 0.0 ? Eigen::MatrixXd(g * (u / sigma))
                                      : Eigen::MatrixXd::Zero(n, n);
  return cross_cov_from_contraction(p_a, p_b, omega);
}

// Rank-one boundary element P_A^1/2 d d^T P_B^1/2 for a unit direction d.
inline CrossCovariance rank_one_cross_cov(const SpdMatrix& p_a, const SpdMatrix& p_b,
                                          const Eigen::VectorXd& direction) {
  if (p_a.dim() != p_b.dim() || direction.size() != p_a.dim()) {
    raise(errc::dimension_mismatch, "direction dimension disagrees with P_A / P_B");
  }
  const double norm = direction.norm();
  if (!(norm > 0.0)) raise(errc::zero_direction, "rank-one direction must be non-zero");
  const Eigen::VectorXd d = direction / norm;
  return cross_cov_from_contraction(p_a, p_b, d * d.transpose());
}

struct WorstCasePick {
  CrossCovariance cross;
  double omega0 = 0.0;
  int case_tag = 3;
};

namespace detail {

inline Eigen::MatrixXd inverse_sqrt_strict(const SpdMatrix& p, const char* label) {
  if (!p.strictly_positive()) {
    raise(errc::degenerate_split,
          std::string(label) + " must be strictly positive definite for this construction");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(p.data()));
  return symmetrized(es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                     es.eigenvectors().transpose());
}

// Builds the worst-case P_AB for an already classified direction. Requires
// strictly positive definite P_A and P_B; the formulas involve their inverses
// or inverse roots.
inline WorstCasePick worst_case_with(const SciPrecisionCurve& curve, const Eigen::VectorXd& x,
                                     int case_tag, double omega0) {
  const SplitEstimate& a = curve.estimate_a();
  const SplitEstimate& b = curve.estimate_b();
  if (!a.p_strictly_positive() || !b.p_strictly_positive()) {
    raise(errc::degenerate_split,
          "worst-case construction requires strictly positive definite P_A and P_B");
  }
  const Eigen::MatrixXd root_a = sqrt_psd(a.p());
  const Eigen::MatrixXd root_b = sqrt_psd(b.p());

  WorstCasePick out;
  out.case_tag = case_tag;
  out.omega0 = omega0;
  Eigen::MatrixXd contraction;
  if (case_tag == 1) {
    // Omega = P_A^-1/2 x x^T B(1) P_B^1/2 / (x^T B(1) P_B B(1) x); the fused
    // precision then satisfies M_F*(P_AB) x = B(1) x.
    const Eigen::MatrixXd inv_root_a = inverse_sqrt_strict(a.p(), "P_A");
    const Eigen::VectorXd v = curve.b_inverse(1.0) * x;
    const double denom = quad_form(b.p().data(), v);
    contraction = (inv_root_a * x) * (root_b * v).transpose() / denom;
  } else if (case_tag == 2) {
    // Mirror of case 1 with the roles of the estimators swapped.
    const Eigen::MatrixXd inv_root_b = inverse_sqrt_strict(b.p(), "P_B");
    const Eigen::VectorXd u = curve.a_inverse(1.0) * x;
    const double denom = quad_form(a.p().data(), u);
    contraction = (root_a * u) * (inv_root_b * x).transpose() / denom;
  } else {
    // Omega = (1/gamma) P_A^1/2 A(w0) x x^T B(1-w0) P_B^1/2 with
    // gamma = x^T A(w0) P_A A(w0) x; at the stationary omega the two slope
    // terms coincide, so Omega^T Omega has unit spectral norm.
    const Eigen::VectorXd u = curve.a_inverse(omega0) * x;
    const Eigen::VectorXd v = curve.b_inverse(1.0 - omega0) * x;
    const double gamma = quad_form(a.p().data(), u);
    contraction = (root_a * u) * (root_b * v).transpose() / gamma;
  }
  out.cross.contraction = contraction;
  out.cross.matrix = root_a * contraction * root_b;
  return out;
}

}  // namespace detail

// Worst-case admissible cross-covariance along x: the constructed P_AB attains
// x^T M_F*(P_AB) x = x^T H(omega0) x with omega0 ∈ {0, 1} for the endpoint
// cases and the stationary omega otherwise.
inline WorstCasePick worst_case_cross_cov(const Eigen::VectorXd& x, const SplitEstimate& est_a,
                                          const SplitEstimate& est_b) {
  detail::check_direction(x);
  SciPrecisionCurve curve(est_a, est_b);
  const int tag = classify_direction(curve, x);
  const double omega0 =
      tag == 1 ? 0.0 : (tag == 2 ? 1.0 : detail::stationary_omega_unchecked(curve, x));
  return detail::worst_case_with(curve, x, tag, omega0);
}

// Mixed sampler over the admissible set. Pure contraction draws rarely land
// near the boundary where conservativeness is tight, so a configurable share
// of rank-one and worst-case boundary elements is blended in.
struct SamplerWeights {
  double gaussian = 0.7;
  double rank_one = 0.2;
  double worst_case = 0.1;
};

class CrossCovSampler {
 public:
  CrossCovSampler(SplitEstimate a, SplitEstimate b, std::uint64_t seed,
                  SamplerWeights weights = {})
      : a_(std::move(a)), b_(std::move(b)), seed_(seed), weights_(weights) {
    const double total = weights_.gaussian + weights_.rank_one + weights_.worst_case;
    if (!(total > 0.0)) raise(errc::parameter_out_of_range, "sampler weights must sum > 0");
    gaussian_cut_ = weights_.gaussian / total;
    rank_one_cut_ = gaussian_cut_ + weights_.rank_one / total;
    worst_case_available_ = a_.p_strictly_positive() && b_.p_strictly_positive();
  }

  // Deterministic per index: each draw derives its own child seed.
  CrossCovariance draw(std::uint64_t index) const {
    const std::uint64_t s = child_seed(seed_, index);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double pick = uniform(rng);
    if (pick < gaussian_cut_ || !worst_case_available_) {
      if (pick >= gaussian_cut_ && pick < rank_one_cut_) {
        return rank_one_cross_cov(a_.p(), b_.p(), random_unit(rng));
      }
      return sample_cross_cov(a_.p(), b_.p(), splitmix64(s));
    }
    if (pick < rank_one_cut_) {
      return rank_one_cross_cov(a_.p(), b_.p(), random_unit(rng));
    }
    return worst_case_cross_cov(random_unit(rng), a_, b_).cross;
  }

  const SplitEstimate& estimate_a() const { return a_; }
  const SplitEstimate& estimate_b() const { return b_; }

 private:
  Eigen::VectorXd random_unit(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(a_.dim());
    for (int i = 0; i < v.size(); ++i) v(i) = normal(rng);
    const double norm = v.norm();
    if (!(norm > 0.0)) return Eigen::VectorXd::Unit(a_.dim(), 0);
    return v / norm;
  }

  SplitEstimate a_, b_;
  std::uint64_t seed_;
  SamplerWeights weights_;
  double gaussian_cut_ = 0.7;
  double rank_one_cut_ = 0.9;
  bool worst_case_available_ = false;
};

}  // namespace conservafuse
