#pragma once

// Shared fixtures for the test suites: the 2-D estimator pair used throughout
// the figure captions, seeded random instances, and small numeric utilities.

#include <random>

#include <Eigen/Core>
#include <Eigen/QR>

#include "conservafuse/conservafuse.hpp"

namespace testutil {

inline Eigen::Matrix2d paper_c_a() {
  Eigen::Matrix2d m;
  m << 2, -1, -1, 8;
  return m;
}

inline Eigen::Matrix2d paper_p_a() {
  Eigen::Matrix2d m;
  m << 1, -1, -1, 4;
  return m;
}

inline Eigen::Matrix2d paper_q_a() {
  Eigen::Matrix2d m;
  m << 1, 0, 0, 4;
  return m;
}

inline Eigen::Matrix2d paper_c_b() {
  Eigen::Matrix2d m;
  m << 13, 2, 2, 3;
  return m;
}

inline Eigen::Matrix2d paper_p_b() {
  Eigen::Matrix2d m;
  m << 9, 2, 2, 1;
  return m;
}

inline Eigen::Matrix2d paper_q_b() {
  Eigen::Matrix2d m;
  m << 4, 0, 0, 2;
  return m;
}

inline conservafuse::SplitEstimate paper_estimate_a() {
  return conservafuse::SplitEstimate::from_raw(paper_p_a(), paper_q_a());
}

inline conservafuse::SplitEstimate paper_estimate_b() {
  return conservafuse::SplitEstimate::from_raw(paper_p_b(), paper_q_b());
}

// Identity instance P = Q = I on both sides; every direction is a case-3
// direction with omega0 = 1/2 and g(x) = (2/3) |x|^2.
inline conservafuse::SplitEstimate identity_estimate(int n) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  return conservafuse::SplitEstimate::from_raw(eye, eye);
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n, double eig_min = 0.4,
                                  double eig_max = 2.5) {
  std::uniform_real_distribution<double> uniform(eig_min, eig_max);
  Eigen::VectorXd eigs(n);
  for (int i = 0; i < n; ++i) eigs(i) = uniform(rng);
  const Eigen::MatrixXd q = random_orthogonal(rng, n);
  return conservafuse::symmetrized(q * eigs.asDiagonal() * q.transpose());
}

inline conservafuse::SplitEstimate random_estimate(std::mt19937_64& rng, int n) {
  return conservafuse::SplitEstimate::from_raw(random_spd(rng, n), random_spd(rng, n));
}

inline Eigen::VectorXd random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v / v.norm();
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({1e-300, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return max_abs_diff(a, b) / scale;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

}  // namespace testutil
