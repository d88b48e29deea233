#include <doctest.h>

#include <cmath>

#include "hubreg/huber.hpp"
#include "hubreg/rng.hpp"
#include "hubreg/solver.hpp"
#include "oracles.hpp"

using namespace hubreg;

namespace {

Dataset orthogonal_design(double c, const Vector& y) {
  Dataset data;
  data.X = c * Matrix::Identity(y.size(), y.size());
  data.y = y;
  return data;
}

}  // namespace

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(2.0, 0.5) == 1.5);
  CHECK(soft_threshold(-0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-2.0, 0.5) == -1.5);
  CHECK(soft_threshold(0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(soft_threshold(std::nan(""), 1.0), DomainError);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), DomainError);
}

TEST_CASE("lipschitz bound on identity designs") {
  Dataset data;
  data.X = Matrix::Identity(5, 5);
  data.y = Vector::Zero(5);
  auto bound = lipschitz_upper_bound(data);
  CHECK_FALSE(bound.degenerate);
  CHECK(bound.value == doctest::Approx(1.01 / 5.0).epsilon(1e-6));

  data.X = std::sqrt(5.0) * Matrix::Identity(5, 5);
  bound = lipschitz_upper_bound(data);
  CHECK(bound.value == doctest::Approx(1.01).epsilon(1e-6));
}

TEST_CASE("lipschitz bound brackets the dense SVD value") {
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset data = oracle::random_dataset(40 + rep, 20, 5);
    const double exact = oracle::spectral_sq_oracle(data.X) / 20.0;
    const double bound = lipschitz_upper_bound(data).value;
    CHECK(bound >= exact * (1.0 - 1e-9));
    CHECK(bound <= exact * 1.0102);
  }
}

TEST_CASE("lipschitz bound flags the zero matrix") {
  Dataset data;
  data.X = Matrix::Zero(4, 3);
  data.y = Vector::Ones(4);
  const auto bound = lipschitz_upper_bound(data);
  CHECK(bound.degenerate);
  CHECK(bound.value == 1e-12);
}

TEST_CASE("fit solves the orthogonal design in closed form") {
  Vector y(4);
  y << 4.0, -1.0, 0.5, 0.0;
  const Dataset data = orthogonal_design(2.0, y);
  const PenaltyConfig cfg{100.0, 0.6};  // lambda_o sqrt(n) = 200: quadratic region
  const FitResult res = fit(data, cfg, SmoothLossKind::huber);
  CHECK(res.converged);
  Vector expected(4);
  expected << 1.4, 0.0, 0.0, 0.0;
  CHECK((res.beta_hat - expected).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((res.beta_hat -
         oracle::orthogonal_design_solution(y, 2.0, cfg.lambda_s))
            .lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(kkt_residual(expected, data, cfg, SmoothLossKind::huber) <= 1e-10);
}

TEST_CASE("penalty dominating the gradient at zero gives the zero solution") {
  const Dataset data = oracle::random_dataset(21, 30, 8, 2.0);
  PenaltyConfig cfg{1.0, 0.0};
  const double g0 = gradient_smooth(Vector::Zero(8), data, cfg)
                        .lpNorm<Eigen::Infinity>();
  cfg.lambda_s = g0 * 1.0001;
  const FitResult res = fit(data, cfg, SmoothLossKind::huber);
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(res.beta_hat.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(kkt_residual(res.beta_hat, data, cfg, SmoothLossKind::huber) == 0.0);
}

TEST_CASE("huber and squared fits agree when nothing saturates") {
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data = oracle::random_dataset(60 + rep, 50, 20, 3.0);
    PenaltyConfig cfg;
    cfg.lambda_o = 1e6 / std::sqrt(50.0);
    cfg.lambda_s = 0.05;
    const FitResult hub = fit(data, cfg, SmoothLossKind::huber);
    const FitResult sq = fit(data, cfg, SmoothLossKind::squared);
    CHECK(hub.converged);
    CHECK(sq.converged);
    CHECK((hub.beta_hat - sq.beta_hat).lpNorm<Eigen::Infinity>() <= 1e-7);
  }
}

TEST_CASE("ista trace never increases") {
  SolverOptions opts;
  opts.acceleration = Acceleration::ista;
  opts.max_iter = 400;
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data = oracle::random_dataset(80 + rep, 25, 10, 2.0);
    const PenaltyConfig cfg{0.4, 0.02};
    const FitResult res = fit(data, cfg, SmoothLossKind::huber, opts);
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k) {
      const double prev = res.objective_trace[k - 1];
      CHECK(res.objective_trace[k] <= prev + 1e-12 * std::max(1.0, prev));
    }
  }
}

TEST_CASE("fista with restart ends at least as low as ista") {
  SolverOptions ista;
  ista.acceleration = Acceleration::ista;
  ista.max_iter = 300;
  ista.tol_kkt = 1e-13;  // exhaust the budget
  SolverOptions fista = ista;
  fista.acceleration = Acceleration::fista_restart;
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data = oracle::random_dataset(90 + rep, 25, 10, 2.0);
    const PenaltyConfig cfg{0.4, 0.02};
    const double fi =
        fit(data, cfg, SmoothLossKind::huber, fista).objective_trace.back();
    const double is =
        fit(data, cfg, SmoothLossKind::huber, ista).objective_trace.back();
    CHECK(fi <= is * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("solution does not depend on the starting point") {
  const Dataset data = oracle::random_dataset(33, 40, 10, 2.0);
  const PenaltyConfig cfg{0.5, 0.05};
  const FitResult from_zero = fit(data, cfg, SmoothLossKind::huber);
  const Vector start = 5.0 * oracle::random_vector(34, 10);
  const FitResult from_rand =
      fit(data, cfg, SmoothLossKind::huber, SolverOptions{}, start);
  CHECK(from_zero.converged);
  CHECK(from_rand.converged);
  const double f0 = objective(from_zero.beta_hat, data, cfg).total;
  const double f1 = objective(from_rand.beta_hat, data, cfg).total;
  CHECK(std::abs(f0 - f1) <= 1e-8 * std::max(1.0, std::abs(f0)));
}

TEST_CASE("backtracking accepts only majorized steps") {
  SolverOptions opts;
  opts.step_rule = StepRule::backtracking;
  int checked = 0;
  opts.on_iteration = [&](const IterationInfo& info) {
    CHECK(info.majorization_gap >= -1e-12 * std::max(1.0, info.objective));
    ++checked;
  };
  const Dataset data = oracle::random_dataset(35, 30, 8, 2.0);
  const PenaltyConfig cfg{0.5, 0.03};
  const FitResult res = fit(data, cfg, SmoothLossKind::huber, opts);
  CHECK(res.converged);
  CHECK(checked == res.iterations);
}

TEST_CASE("kkt residual detects perturbations of the optimum") {
  Vector y(4);
  y << 4.0, -1.0, 0.5, 0.0;
  const Dataset data = orthogonal_design(2.0, y);
  const PenaltyConfig cfg{100.0, 0.6};
  Vector beta = oracle::orthogonal_design_solution(y, 2.0, cfg.lambda_s);
  CHECK(kkt_residual(beta, data, cfg, SmoothLossKind::huber) <= 1e-10);
  beta[0] += 0.1;
  CHECK(kkt_residual(beta, data, cfg, SmoothLossKind::huber) > 1e-3);
}

TEST_CASE("fit is deterministic and reports its own kkt residual") {
  const Dataset data = oracle::random_dataset(36, 40, 12, 2.0);
  const PenaltyConfig cfg{0.4, 0.04};
  const FitResult a = fit(data, cfg, SmoothLossKind::huber);
  const FitResult b = fit(data, cfg, SmoothLossKind::huber);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.beta_hat.size() == b.beta_hat.size());
  for (Index j = 0; j < a.beta_hat.size(); ++j)
    CHECK(a.beta_hat[j] == b.beta_hat[j]);
  // the stored residual is exactly what recomputation at beta_hat gives
  CHECK(kkt_residual(a.beta_hat, data, cfg, SmoothLossKind::huber) ==
        a.kkt_residual);
}

TEST_CASE("solver input validation") {
  const Dataset data = oracle::random_dataset(37, 10, 4);
  const PenaltyConfig cfg{1.0, 0.1};
  CHECK_THROWS_AS(
      fit(data, cfg, SmoothLossKind::huber, SolverOptions{}, Vector::Zero(3)),
      ShapeError);
  SolverOptions bad;
  bad.max_iter = 0;
  CHECK_THROWS_AS(fit(data, cfg, SmoothLossKind::huber, bad), ConfigError);
  bad = SolverOptions{};
  bad.backtrack_factor = 1.5;
  CHECK_THROWS_AS(fit(data, cfg, SmoothLossKind::huber, bad), ConfigError);
}
