#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "conservafuse/spd.hpp"
#include "helpers.hpp"

using namespace conservafuse;
namespace tu = testutil;

namespace {

void require_error(errc expected, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    REQUIRE(e.code() == expected);
  }
}

}  // namespace

TEST_CASE("validate_spd accepts and rejects", "[spd]") {
  SECTION("identity, strict") {
    auto m = validate_spd(Eigen::Matrix2d::Identity(), true);
    REQUIRE(m.dim() == 2);
    REQUIRE(m.min_eig() == Catch::Approx(1.0));
  }

  SECTION("indefinite matrix rejected under strict") {
    // [[1, 2], [2, 1]] has eigenvalues 3 and -1.
    Eigen::Matrix2d m;
    m << 1, 2, 2, 1;
    require_error(errc::not_positive_definite, [&] { validate_spd(m, true); });
    require_error(errc::not_positive_semidefinite, [&] { validate_spd(m, false); });
  }

  SECTION("paper C_A accepted strict") {
    REQUIRE_NOTHROW(validate_spd(tu::paper_c_a(), true));
  }

  SECTION("PSD but singular matrix passes non-strict only") {
    Eigen::Matrix2d m;
    m << 1, 1, 1, 1;
    REQUIRE_NOTHROW(validate_spd(m, false));
    require_error(errc::not_positive_definite, [&] { validate_spd(m, true); });
  }

  SECTION("asymmetry rejected") {
    Eigen::Matrix2d m;
    m << 1, 0.1, 0, 1;
    require_error(errc::not_symmetric, [&] { validate_spd(m, false); });
  }

  SECTION("non-square rejected") {
    require_error(errc::dimension_mismatch, [&] { validate_spd(Eigen::MatrixXd::Ones(2, 3)); });
  }

  SECTION("no silent repair: entries are stored as supplied") {
    Eigen::Matrix2d m;
    m << 2, -1, -1, 8;
    auto v = validate_spd(m, true);
    REQUIRE(v.data() == m);
  }
}

TEST_CASE("loewner order", "[spd]") {
  auto eye = validate_spd(Eigen::Matrix2d::Identity(), true);
  auto two = validate_spd(2.0 * Eigen::Matrix2d::Identity(), true);

  SECTION("scaled identity and reflexivity") {
    REQUIRE(loewner_leq(eye, two));
    REQUIRE_FALSE(loewner_leq(two, eye));
    REQUIRE(loewner_leq(eye, eye));
  }

  SECTION("incomparable pair") {
    auto d13 = validate_spd(Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix(), true);
    auto d22 = validate_spd(Eigen::Vector2d(2, 2).asDiagonal().toDenseMatrix(), true);
    REQUIRE_FALSE(loewner_leq(d13, d22));
    REQUIRE_FALSE(loewner_leq(d22, d13));
  }

  SECTION("dimension mismatch") {
    auto three = validate_spd(Eigen::Matrix3d::Identity(), true);
    require_error(errc::dimension_mismatch, [&] { loewner_leq(eye, three); });
  }

  SECTION("antisymmetry up to tolerance") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd base = tu::random_spd(rng, 3);
      auto a = validate_spd(base, true);
      auto b = validate_spd(base + 1e-13 * Eigen::Matrix3d::Identity(), true);
      const double tol = 1e-9;
      if (loewner_leq(a, b, tol) && loewner_leq(b, a, tol)) {
        const double scale = std::max({1.0, a.scale(), b.scale()});
        REQUIRE(tu::max_abs_diff(a.data(), b.data()) <= 2 * tol * scale);
      }
    }
  }
}

TEST_CASE("principal symmetric square root", "[spd]") {
  SECTION("identity and diagonal") {
    REQUIRE(tu::max_abs_diff(sqrt_psd(validate_spd(Eigen::Matrix2d::Identity())),
                             Eigen::Matrix2d::Identity()) < 1e-14);
    Eigen::Matrix2d d49 = Eigen::Vector2d(4, 9).asDiagonal();
    Eigen::Matrix2d d23 = Eigen::Vector2d(2, 3).asDiagonal();
    REQUIRE(tu::max_abs_diff(sqrt_psd(validate_spd(d49)), d23) < 1e-12);
  }

  SECTION("paper P_A roundtrip") {
    auto p = validate_spd(tu::paper_p_a(), true);
    const Eigen::MatrixXd s = sqrt_psd(p);
    REQUIRE(tu::rel_diff(s * s, p.data()) <= 1e-10);
    REQUIRE(tu::max_abs_diff(s, s.transpose()) < 1e-14);
  }

  SECTION("roundtrip property over random PSD, including rank deficient") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 4);
      Eigen::MatrixXd m = tu::random_spd(rng, n);
      if (trial % 3 == 0) {
        // Force rank deficiency through a projector.
        Eigen::VectorXd v = tu::random_unit(rng, n);
        const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - v * v.transpose();
        m = symmetrized(proj * m * proj);
      }
      auto valid = validate_spd(m, false);
      const Eigen::MatrixXd s = sqrt_psd(valid);
      REQUIRE(tu::rel_diff(s * s, m) <= 1e-10);
      REQUIRE(min_eigenvalue(s) >= -1e-10 * valid.scale());
    }
  }
}

TEST_CASE("ellipse boundary sampling", "[spd]") {
  SECTION("unit circle at four points") {
    auto e = ellipse_boundary(validate_spd(Eigen::Matrix2d::Identity(), true), 4);
    REQUIRE(e.points.size() == 4);
    REQUIRE((e.points[0] - Eigen::Vector2d(1, 0)).norm() < 1e-14);
    REQUIRE((e.points[1] - Eigen::Vector2d(0, 1)).norm() < 1e-14);
    REQUIRE((e.points[2] - Eigen::Vector2d(-1, 0)).norm() < 1e-14);
    REQUIRE((e.points[3] - Eigen::Vector2d(0, -1)).norm() < 1e-14);
  }

  SECTION("axis-aligned ellipse satisfies its equation") {
    Eigen::Matrix2d d = Eigen::Vector2d(4, 1).asDiagonal();
    auto e = ellipse_boundary(validate_spd(d, true), 37);
    for (const auto& x : e.points) {
      REQUIRE(std::abs(x(0) * x(0) / 4.0 + x(1) * x(1) - 1.0) < 1e-12);
    }
  }

  SECTION("paper C_B boundary residual") {
    auto c_b = validate_spd(tu::paper_c_b(), true);
    const Eigen::Matrix2d inv = tu::paper_c_b().inverse();
    auto e = ellipse_boundary(c_b, 360);
    for (const auto& x : e.points) {
      REQUIRE(std::abs(x.dot(inv * x) - 1.0) <= 1e-9);
    }
  }

  SECTION("errors") {
    require_error(errc::dimension_not_two,
                  [&] { ellipse_boundary(validate_spd(Eigen::Matrix3d::Identity(), true), 8); });
    Eigen::Matrix2d singular;
    singular << 1, 1, 1, 1;
    require_error(errc::singular_matrix,
                  [&] { ellipse_boundary(validate_spd(singular, false), 8); });
    require_error(errc::parameter_out_of_range,
                  [&] { ellipse_boundary(validate_spd(Eigen::Matrix2d::Identity(), true), 0); });
  }
}

TEST_CASE("product identity P (P+Q)^-1 Q = (P^-1 + Q^-1)^-1", "[spd]") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // dims 2..5
    const Eigen::MatrixXd p = tu::random_spd(rng, n);
    const Eigen::MatrixXd q = tu::random_spd(rng, n);
    const Eigen::MatrixXd lhs = p * (p + q).inverse() * q;
    const Eigen::MatrixXd rhs = (p.inverse() + q.inverse()).inverse();
    REQUIRE(tu::rel_diff(lhs, rhs) <= 1e-9);
    REQUIRE(min_eigenvalue(lhs) > 0.0);
  }
}

TEST_CASE("contraction block matrices are PSD", "[spd]") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const Eigen::MatrixXd p_a = tu::random_spd(rng, n);
    const Eigen::MatrixXd p_b = tu::random_spd(rng, n);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
    }
    // Scale to a contraction.
    const Eigen::MatrixXd omega = g / (g.operatorNorm() * 1.000001);
    const Eigen::MatrixXd root_a = sqrt_psd(validate_spd(p_a));
    const Eigen::MatrixXd root_b = sqrt_psd(validate_spd(p_b));
    Eigen::MatrixXd block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = p_a;
    block.topRightCorner(n, n) = root_a * omega * root_b;
    block.bottomLeftCorner(n, n) = block.topRightCorner(n, n).transpose();
    block.bottomRightCorner(n, n) = p_b;
    REQUIRE(min_eigenvalue(block) >= -1e-9 * spectral_scale(block));
  }
}
