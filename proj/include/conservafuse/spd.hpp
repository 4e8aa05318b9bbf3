#pragma once

// Validated symmetric positive (semi-)definite matrix values and the spectral
// predicates shared by the whole library: Loewner-order comparison, principal
// symmetric square roots, and 2-D ellipse boundary sampling.
//
// Validation rejects, it never repairs: a matrix failing its symmetry or
// spectrum check raises an error instead of being clipped. Downstream
// conservativeness tests depend on violations surfacing rather than being
// silently absorbed.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "conservafuse/errors.hpp"
#include "conservafuse/tolerances.hpp"

namespace conservafuse {

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

inline double quad_form(const Eigen::MatrixXd& m, const Eigen::VectorXd& x) {
  return x.dot(m * x);
}

// max(1, largest |eigenvalue| of the symmetric part).
inline double spectral_scale(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// A square matrix that passed symmetry and positive-(semi)definiteness
// validation. Entries are stored exactly as supplied; the spectral scale and
// minimal eigenvalue found during validation are cached.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  static SpdMatrix validated(const Eigen::MatrixXd& raw, bool strict = false,
                             const Tolerances& tol = {}) {
    if (raw.rows() != raw.cols() || raw.rows() == 0) {
      raise(errc::dimension_mismatch, "matrix must be square and non-empty, got " +
                                          std::to_string(raw.rows()) + "x" +
                                          std::to_string(raw.cols()));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(raw), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    const double asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol.symmetry * scale) {
      raise(errc::not_symmetric,
            "max |M_ij - M_ji| = " + std::to_string(asym) + " exceeds tolerance");
    }
    const double min_eig = es.eigenvalues().minCoeff();
    if (strict) {
      if (!(min_eig >= tol.psd * scale)) {
        raise(errc::not_positive_definite,
              "lambda_min = " + std::to_string(min_eig) + " below strict threshold");
      }
    } else if (!(min_eig >= -tol.psd * scale)) {
      raise(errc::not_positive_semidefinite,
            "lambda_min = " + std::to_string(min_eig) + " below PSD threshold");
    }
    return SpdMatrix(raw, scale, min_eig);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& data() const { return m_; }
  double scale() const { return scale_; }
  double min_eig() const { return min_eig_; }

  bool strictly_positive(const Tolerances& tol = {}) const {
    return min_eig_ >= tol.psd * scale_;
  }

 private:
  SpdMatrix(Eigen::MatrixXd m, double scale, double min_eig)
      : m_(std::move(m)), scale_(scale), min_eig_(min_eig) {}

  Eigen::MatrixXd m_;
  double scale_ = 1.0;
  double min_eig_ = 0.0;
};

inline SpdMatrix validate_spd(const Eigen::MatrixXd& raw, bool strict = false,
                              const Tolerances& tol = {}) {
  return SpdMatrix::validated(raw, strict, tol);
}

// A <= B in the Loewner order: lambda_min(B - A) >= -tol * scale, where the
// scale covers both the difference and the operands themselves.
inline bool loewner_leq(const SpdMatrix& a, const SpdMatrix& b, double tol = 1e-9) {
  if (a.dim() != b.dim()) {
    raise(errc::dimension_mismatch, "Loewner comparison of " + std::to_string(a.dim()) +
                                        "-dim and " + std::to_string(b.dim()) + "-dim matrices");
  }
  const Eigen::MatrixXd diff = symmetrized(b.data() - a.data());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
  const double scale =
      std::max({1.0, es.eigenvalues().cwiseAbs().maxCoeff(), a.scale(), b.scale()});
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

// Principal symmetric square root via spectral decomposition. Eigenvalues in
// [-psd_tol * scale, 0) are clamped to zero so that PSD-validated inputs with
// rounding-level negative tails still take a root.
inline Eigen::MatrixXd sqrt_psd(const SpdMatrix& m, const Tolerances& tol = {}) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m.data()));
  Eigen::VectorXd lambda = es.eigenvalues();
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < 0.0) {
      if (lambda(i) < -tol.psd * m.scale()) {
        raise(errc::not_positive_semidefinite,
              "cannot take square root, lambda_min = " + std::to_string(lambda(i)));
      }
      lambda(i) = 0.0;
    }
  }
  const Eigen::MatrixXd root =
      es.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return symmetrized(root);
}

// Ordered boundary points of the ellipse E(P) = {x | x^T P^-1 x <= 1}.
struct Ellipse2D {
  std::vector<Eigen::Vector2d> points;
};

inline Ellipse2D ellipse_boundary(const SpdMatrix& p, int count, const Tolerances& tol = {}) {
  if (p.dim() != 2) {
    raise(errc::dimension_not_two, "ellipse boundary requires a 2x2 matrix");
  }
  if (count < 1) {
    raise(errc::parameter_out_of_range, "point count must be positive");
  }
  if (!p.strictly_positive(tol)) {
    raise(errc::singular_matrix, "ellipse boundary requires a strictly positive definite matrix");
  }
  const Eigen::MatrixXd root = sqrt_psd(p, tol);
  Ellipse2D out;
  out.points.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(count);
    out.points.emplace_back(root * Eigen::Vector2d(std::cos(theta), std::sin(theta)));
  }
  return out;
}

}  // namespace conservafuse
