#include <doctest.h>

#include <Eigen/LU>

#include "oracles.hpp"
#include "wprox/objectives.hpp"
#include "wprox/transport_flow.hpp"

using namespace wprox;

namespace {

FlowParams random_flow(Eigen::Index dim, int blocks, Eigen::Index hidden, double spread,
                       SeededRng& rng) {
  FlowParams p = init_near_identity(dim, blocks, hidden, 1.0, rng);
  const Eigen::VectorXd flat = to_vector(p);
  const double step = spread / std::sqrt(static_cast<double>(hidden));
  assign_from_vector(p, flat + step * Eigen::VectorXd(rng.normal_matrix(flat.size(), 1)));
  return p;
}

Eigen::MatrixXd numerical_jacobian(const FlowParams& p, const Eigen::VectorXd& x) {
  const double h = 1e-6;
  Eigen::MatrixXd jac(x.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd up = x, down = x;
    up(k) += h;
    down(k) -= h;
    jac.col(k) = (flow_forward(p, up).image - flow_forward(p, down).image) / (2 * h);
  }
  return jac;
}

}  // namespace

TEST_SUITE("transport_flow") {
  TEST_CASE("fresh flow is the identity") {
    SeededRng rng(1);
    const FlowParams p = init_near_identity(2, 2, 100, 0.5, rng);
    CHECK(p.blocks.size() == 2);
    CHECK(p.blocks[0].pass_offset == 0);
    CHECK(p.blocks[0].pass_size == 1);
    CHECK(p.blocks[1].pass_offset == 1);
    CHECK(p.parameter_count() == 2 * 2 * (100 + 100 + 100 + 1));
    const Eigen::MatrixXd pts = rng.normal_matrix(10, 2);
    const FlowBatchImage out = flow_forward(p, pts);
    CHECK(out.images == pts);
    CHECK(out.logdets.isZero(0));
  }

  TEST_CASE("forward/inverse round trip") {
    SeededRng rng(2);
    for (Eigen::Index d : {1, 2, 3, 5}) {
      const FlowParams p = random_flow(d, 3, 8, 0.2, rng);
      const Eigen::MatrixXd pts = rng.normal_matrix(1000, d);
      const Eigen::MatrixXd images = flow_forward(p, pts).images;
      CHECK((images - pts).cwiseAbs().maxCoeff() > 0.05);
      CHECK((flow_inverse(p, images) - pts).cwiseAbs().maxCoeff() < 1e-9);
      const Eigen::VectorXd one = pts.row(0).transpose();
      CHECK((flow_inverse(p, flow_forward(p, one).image) - one).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("log-determinant against the numerical Jacobian") {
    SeededRng rng(3);
    for (Eigen::Index d : {2, 3, 4}) {
      const FlowParams p = random_flow(d, 2, 6, 0.5, rng);
      for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd x = rng.normal_matrix(d, 1);
        const double numeric = std::log(std::abs(numerical_jacobian(p, x).determinant()));
        const double analytic = flow_forward(p, x).logdet;
        CHECK(std::abs(analytic - numeric) <= 1e-6 * std::max(1.0, std::abs(numeric)));
      }
    }
  }

  TEST_CASE("batch and single-point evaluation agree") {
    SeededRng rng(4);
    const FlowParams p = random_flow(3, 2, 5, 0.5, rng);
    const Eigen::MatrixXd pts = rng.normal_matrix(6, 3);
    const FlowBatchImage batch = flow_forward(p, pts);
    for (Eigen::Index j = 0; j < 6; ++j) {
      const FlowImage single = flow_forward(p, Eigen::VectorXd(pts.row(j).transpose()));
      CHECK((single.image - batch.images.row(j).transpose()).norm() < 1e-14);
      CHECK(single.logdet == doctest::Approx(batch.logdets(j)).epsilon(1e-14));
    }
  }

  TEST_CASE("loss gradient against central finite differences") {
    SeededRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform() * 4);
      const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 6);
      const Dataset<double> data = generate_teacher_dataset<double>(n, 2, 100 + trial);
      const Eigen::MatrixXd cloud = rng.normal_matrix(m, 2);
      const FlowParams p = random_flow(2, 2, 3, 0.5, rng);
      const MfldSpec<double> spec{0.1 + rng.uniform(), 0.05 + rng.uniform()};
      const double xi = 0.1 + rng.uniform();
      const FlowLossAndGradient lg = flow_loss_gradient(p, cloud, data, spec, xi);
      CHECK(lg.loss == doctest::Approx(flow_loss(p, cloud, data, spec, xi)).epsilon(1e-13));
      const Eigen::VectorXd flat = to_vector(p), g = to_vector(lg.gradient);
      Eigen::VectorXd fd(flat.size());
      const double h = 1e-6;
      for (Eigen::Index k = 0; k < flat.size(); ++k) {
        FlowParams up = p, down = p;
        Eigen::VectorXd a = flat, b = flat;
        a(k) += h;
        b(k) -= h;
        assign_from_vector(up, a);
        assign_from_vector(down, b);
        fd(k) = (flow_loss(up, cloud, data, spec, xi) - flow_loss(down, cloud, data, spec, xi)) / (2 * h);
      }
      CHECK((g - fd).norm() / fd.norm() < 1e-4);
    }
  }

  TEST_CASE("loss at the identity: data risk, penalty, no displacement") {
    SeededRng rng(6);
    const Dataset<double> data = generate_teacher_dataset<double>(30, 2, 1);
    const Eigen::MatrixXd cloud = rng.normal_matrix(8, 2);
    const MfldSpec<double> spec{0.1, 0.1};
    const FlowParams p = init_near_identity(2, 2, 10, 1.0, rng);
    CHECK(flow_loss(p, cloud, data, spec, 0.2) == doctest::Approx(risk(cloud, data, spec)).epsilon(1e-12));
  }

  TEST_CASE("gradient descent decreases the loss at a small rate") {
    const Dataset<double> data = generate_teacher_dataset<double>(100, 2, 2);
    SeededRng rng(7);
    const Eigen::MatrixXd cloud = rng.normal_matrix(20, 2);
    const MfldSpec<double> spec{0.1, 0.1};
    const FlowParams p = init_near_identity(2, 2, 20, 0.5, rng);
    const double start = flow_loss(p, cloud, data, spec, 0.2);
    const FitResult fit = sgd_fit(p, cloud, data, spec, 0.2, 1e-4, 20);
    CHECK(fit.final_loss <= start);
    CHECK(fit.loss_trace.size() == 21);
    CHECK(fit.loss_trace.front() == start);
    CHECK(fit.loss_trace.back() == fit.final_loss);
  }

  TEST_CASE("paper-sized fit stays finite and improves on the identity") {
    const Dataset<double> data = generate_teacher_dataset<double>(1000, 2, 0);
    SeededRng rng(8);
    const Eigen::MatrixXd cloud = rng.normal_matrix(100, 2);
    const MfldSpec<double> spec{0.1, 0.1};
    const FlowParams p = init_near_identity(2, 2, 100, 0.5, rng);
    const double start = flow_loss(p, cloud, data, spec, 0.2);
    const FitResult fit = sgd_fit(p, cloud, data, spec, 0.2, 0.005, 150);
    CHECK(std::isfinite(fit.final_loss));
    CHECK(fit.final_loss < start);
  }

  TEST_CASE("minibatch fit is reproducible from the rng") {
    const Dataset<double> data = generate_teacher_dataset<double>(200, 2, 0);
    SeededRng rng(9);
    const Eigen::MatrixXd cloud = rng.normal_matrix(10, 2);
    const FlowParams p = init_near_identity(2, 2, 10, 0.5, rng);
    SeededRng r1(1), r2(1);
    const MfldSpec<double> spec{0.1, 0.1};
    const FitResult a = sgd_fit(p, cloud, data, spec, 0.2, 0.005, 10, 32, &r1);
    const FitResult b = sgd_fit(p, cloud, data, spec, 0.2, 0.005, 10, 32, &r2);
    CHECK(to_vector(a.params) == to_vector(b.params));
    CHECK_THROWS_AS(sgd_fit(p, cloud, data, spec, 0.2, 0.005, 10, 32), std::invalid_argument);
  }

  TEST_CASE("divergence and argument errors") {
    const Dataset<double> data = generate_teacher_dataset<double>(50, 2, 0);
    SeededRng rng(10);
    const Eigen::MatrixXd cloud = rng.normal_matrix(10, 2);
    const MfldSpec<double> spec{0.1, 0.1};
    const FlowParams p = init_near_identity(2, 2, 50, 1.0, rng);
    CHECK_THROWS_AS(sgd_fit(p, cloud, data, spec, 0.2, 1e6, 50), DivergenceError);
    CHECK_THROWS_AS(sgd_fit(p, cloud, data, spec, 0.2, 0.01, 0), std::invalid_argument);
    CHECK_THROWS_AS(sgd_fit(p, cloud, data, spec, 0.2, -1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(flow_loss(p, cloud, data, spec, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(flow_forward(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3))), std::invalid_argument);
  }
}
