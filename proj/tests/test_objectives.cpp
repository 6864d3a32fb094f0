#include <doctest.h>

#include "oracles.hpp"
#include "wprox/objectives.hpp"

using namespace wprox;

TEST_SUITE("objectives") {
  TEST_CASE("teacher dataset is deterministic and follows sin(alpha^T x)") {
    const Dataset<double> a = generate_teacher_dataset<double>(200, 3, 17);
    const Dataset<double> b = generate_teacher_dataset<double>(200, 3, 17);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(a.teacher_direction == b.teacher_direction);
    CHECK(a.inputs.rows() == 200);
    CHECK(a.inputs.cols() == 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a.labels(i)) <= 1.0);
      CHECK(a.labels(i) == std::sin(a.inputs.row(i).dot(a.teacher_direction)));
    }
    const Dataset<double> c = generate_teacher_dataset<double>(200, 3, 18);
    CHECK(c.inputs != a.inputs);
  }

  TEST_CASE("prediction and risk against a direct loop") {
    const Dataset<double> data = generate_teacher_dataset<double>(50, 2, 1);
    SeededRng rng(2);
    const Eigen::MatrixXd cloud = rng.normal_matrix(7, 2);
    const MfldSpec<double> spec{0.1, 0.1};
    double loss = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      double f = 0;
      for (Eigen::Index j = 0; j < 7; ++j) f += std::tanh(cloud.row(j).dot(data.inputs.row(i))) / 7;
      CHECK(nn_predict<double>(cloud, data.inputs.row(i).transpose()) == doctest::Approx(f).epsilon(1e-14));
      loss += 0.5 * (f - data.labels(i)) * (f - data.labels(i)) / 50;
    }
    const double expected = loss + 0.1 * cloud.squaredNorm() / 7;
    CHECK(risk(cloud, data, spec) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(risk_with_gradient(cloud, data, spec).risk == doctest::Approx(expected).epsilon(1e-13));
  }

  TEST_CASE("particle gradient is m times the finite-difference gradient of the risk") {
    const Dataset<double> data = generate_teacher_dataset<double>(40, 2, 3);
    SeededRng rng(4);
    const Eigen::MatrixXd cloud = rng.normal_matrix(5, 2);
    const MfldSpec<double> spec{0.3, 0.1};
    const Eigen::MatrixXd g = risk_particle_gradient(cloud, data, spec);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < cloud.rows(); ++j) {
      for (Eigen::Index k = 0; k < cloud.cols(); ++k) {
        Eigen::MatrixXd up = cloud, down = cloud;
        up(j, k) += h;
        down(j, k) -= h;
        const double fd = (risk(up, data, spec) - risk(down, data, spec)) / (2 * h);
        CHECK(g(j, k) == doctest::Approx(5 * fd).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("risk argument errors") {
    const Dataset<double> data = generate_teacher_dataset<double>(10, 2, 0);
    const MfldSpec<double> spec{0.1, 0.1};
    CHECK_THROWS_AS(risk(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3)), data, spec), std::invalid_argument);
    CHECK_THROWS_AS(risk(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 2)), data, MfldSpec<double>{-1, 0.1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_teacher_dataset<double>(0, 2, 0), std::invalid_argument);
  }

  TEST_CASE("total objective adds tau times the negative entropy") {
    const Dataset<double> data = generate_teacher_dataset<double>(10, 2, 0);
    const Eigen::MatrixXd cloud = Eigen::MatrixXd::Ones(4, 2);
    const MfldSpec<double> spec{0.1, 0.25};
    CHECK(total_objective(cloud, data, spec, -2.0) ==
          doctest::Approx(risk(cloud, data, spec) - 0.5).epsilon(1e-15));
  }

  TEST_CASE("Gaussian KL and relative Fisher information against quadrature") {
    for (const auto& g : {GaussianState<double>::from_variance(0, 100),
                          GaussianState<double>::from_variance(3, 2),
                          GaussianState<double>::from_variance(-1, 0.5)}) {
      const double lo = g.mean - 12 * g.stddev, hi = g.mean + 12 * g.stddev;
      const double kl = oracle::simpson(
          [&](double x) {
            const double z = (x - g.mean) / g.stddev;
            const double log_ratio = -0.5 * z * z - std::log(g.stddev) + 0.5 * x * x;
            return oracle::normal_pdf(x, g.mean, g.stddev) * log_ratio;
          },
          lo, hi);
      const double fisher = oracle::simpson(
          [&](double x) {
            // d/dx log(p/nu) = -(x - m)/s^2 + x
            const double slope = -(x - g.mean) / g.variance() + x;
            return oracle::normal_pdf(x, g.mean, g.stddev) * slope * slope;
          },
          lo, hi);
      CHECK(kl_gaussian(g) == doctest::Approx(kl).epsilon(1e-8));
      CHECK(relative_fisher_gaussian(g) == doctest::Approx(fisher).epsilon(1e-8));
      CHECK(pl_residual(g, 1.0) >= 0.0);
    }
    CHECK(kl_gaussian(GaussianState<double>{0, 1}) == 0.0);
    CHECK(pl_residual(GaussianState<double>{0, 1}, 1.0) == 0.0);
  }
}
