#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gimspg/error.hpp"
#include "gimspg/problems.hpp"
#include "gimspg/smoothing.hpp"
#include "oracles.hpp"

using namespace gimspg;

namespace {

ObservationSet small_set() {
  return ObservationSet(3, 2, {{0, 0, 1.0}, {2, 1, -0.5}, {1, 0, 0.25}});
}

}  // namespace

TEST_CASE("ObservationSet validation") {
  CHECK_THROWS_AS(ObservationSet(2, 3, {{0, 0, 1.0}}), Error);
  CHECK_THROWS_AS(ObservationSet(3, 2, {}), Error);
  CHECK_THROWS_AS(ObservationSet(3, 2, {{3, 0, 1.0}}), Error);
  CHECK_THROWS_AS(ObservationSet(3, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), Error);
  CHECK_THROWS_AS(ObservationSet(3, 2, {{0, 0, std::nan("")}}), Error);

  const auto obs = small_set();
  CHECK(obs.size() == 3);
  CHECK(obs.entries()[0].row == 0);
  CHECK(obs.entries()[1].row == 1);  // column-major order
  const Matrix p = obs.project_values();
  CHECK(p(2, 1) == -0.5);
  CHECK(p(1, 1) == 0.0);
  CHECK(obs.mask().sum() == 3.0);
  CHECK_THROWS_AS(obs.check_shape(Matrix::Zero(2, 2)), Error);
}

TEST_CASE("huber pieces") {
  CHECK(huber(2.0, 0.5) == 2.0);
  CHECK(huber(-2.0, 0.5) == 2.0);
  CHECK(huber(0.0, 0.5) == doctest::Approx(0.25));
  CHECK(huber(0.5, 0.5) == doctest::Approx(0.5));
  CHECK(huber_grad(0.25, 0.5) == doctest::Approx(0.5));
  CHECK(huber_grad(-3.0, 0.5) == -1.0);
}

TEST_CASE("loss constants") {
  const auto c = loss_constants(small_set());
  CHECK(c.kappa == doctest::Approx(1.5));
  CHECK(c.lipschitz_scale == 1.0);
  CHECK(c.lipschitz_f == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("smoothed value and gradient against oracles") {
  auto problem = make_synthetic(12, 8, 2, 0.5, GmmNoiseParams{}, 1.0, 3);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double mu : {1e-1, 1e-2}) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix x = problem.obs.project_values();
      for (long i = 0; i < x.size(); ++i) x.data()[i] += 0.2 * normal(gen);
      CHECK(smoothed_loss_value(x, problem.obs, mu) ==
            doctest::Approx(oracle::smoothed_l1(x, problem.obs, mu)).epsilon(1e-13));
      const Matrix g = smoothed_loss_gradient(x, problem.obs, mu);
      const Matrix fd = oracle::fd_gradient(x, problem.obs, mu, 1e-7 * mu);
      CHECK((g - fd).norm() / std::max(1.0, fd.norm()) <= 1e-5);
    }
  }
}

TEST_CASE("HuberL1Loss wraps the free functions") {
  const auto obs = small_set();
  HuberL1Loss loss(obs);
  Matrix x = Matrix::Ones(3, 2);
  CHECK(loss.exact(x) == doctest::Approx(oracle::l1(x, obs)));
  CHECK(loss.value(x, 0.1) == doctest::Approx(smoothed_loss_value(x, obs, 0.1)));
  CHECK(loss.kappa() == doctest::Approx(1.5));
  CHECK_THROWS_AS(smoothed_loss_value(x, obs, 0.0), Error);
}
