#include <doctest.h>

#include <numbers>

#include "wprox/estimators.hpp"
#include "wprox/rng.hpp"

using namespace wprox;

TEST_SUITE("estimators") {
  TEST_CASE("unit ball volumes") {
    CHECK(log_unit_ball_volume<double>(1) == doctest::Approx(std::log(2.0)));
    CHECK(log_unit_ball_volume<double>(2) == doctest::Approx(std::log(std::numbers::pi)));
    CHECK(log_unit_ball_volume<double>(3) == doctest::Approx(std::log(4 * std::numbers::pi / 3)));
  }

  TEST_CASE("nearest-neighbor estimate on known densities") {
    // 2-D standard Gaussian: int rho log rho = -log(2 pi e).
    double mean = 0;
    for (int seed = 0; seed < 5; ++seed) {
      SeededRng rng(seed);
      mean += kl_entropy_estimate(rng.normal_matrix(2000, 2)) / 5;
    }
    CHECK(std::abs(mean + std::log(2 * std::numbers::pi * std::numbers::e)) < 0.1);

    // Uniform on [0, 1]: zero.
    SeededRng rng(9);
    Eigen::MatrixXd u(3000, 1);
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) = rng.uniform();
    CHECK(std::abs(kl_entropy_estimate(u)) < 0.05);

    // Scaling by c shifts the estimate by -d log c exactly.
    const Eigen::MatrixXd g = SeededRng(3).normal_matrix(500, 3);
    CHECK(kl_entropy_estimate(Eigen::MatrixXd(2.0 * g)) ==
          doctest::Approx(kl_entropy_estimate(g) - 3 * std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("nearest-neighbor estimate errors") {
    Eigen::MatrixXd dup(3, 2);
    dup << 0, 0, 1, 1, 0, 0;
    CHECK_THROWS_WITH_AS(kl_entropy_estimate(dup), doctest::Contains("duplicate"), std::invalid_argument);
    CHECK_THROWS_AS(kl_entropy_estimate(Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 2))), std::invalid_argument);
  }

  TEST_CASE("softmax weights are normalized and match the direct formula") {
    SeededRng rng(1);
    const Eigen::MatrixXd cloud = rng.normal_matrix(7, 2);
    const Eigen::RowVector2d q(0.3, -0.2);
    const double h = 0.5;
    const Eigen::VectorXd w = kernel_softmax_weights(cloud, q, h);
    Eigen::VectorXd direct(7);
    for (int k = 0; k < 7; ++k) direct(k) = std::exp(-(q - cloud.row(k)).squaredNorm() / (2 * h * h));
    direct /= direct.sum();
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((w - direct).cwiseAbs().maxCoeff() < 1e-14);
    // Far-away queries do not underflow.
    const Eigen::VectorXd far = kernel_softmax_weights(cloud, Eigen::RowVector2d(100, 100), 0.1);
    CHECK(far.allFinite());
    CHECK(far.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("kernel score of one particle is the Gaussian kernel score") {
    Eigen::MatrixXd one(1, 2);
    one << 1.0, 2.0;
    Eigen::MatrixXd q(2, 2);
    q << 0.0, 0.0, 1.5, 1.0;
    const Eigen::MatrixXd s = kernel_score_at(one, q, 0.5);
    CHECK((s.row(0) - Eigen::RowVector2d(4.0, 8.0)).norm() < 1e-12);
    CHECK((s.row(1) - Eigen::RowVector2d(-2.0, 4.0)).norm() < 1e-12);
  }

  TEST_CASE("kernel score of a large Gaussian sample is the smoothed-density score") {
    // The estimator is the exact score of rho * N(0, h^2): for rho = N(0, 1)
    // that is -theta / (1 + h^2).
    const double h = 0.5;
    const Eigen::MatrixXd cloud = SeededRng(2).normal_matrix(20000, 1);
    Eigen::MatrixXd q(5, 1);
    q << -1.0, -0.5, 0.0, 0.5, 1.0;
    const Eigen::MatrixXd s = kernel_score_at(cloud, q, h);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(s(i, 0) + q(i, 0) / (1 + h * h)) < 0.05);
    CHECK(kernel_score(cloud.topRows(50), h).rows() == 50);
  }
}
