#include "hubreg/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hubreg/huber.hpp"
#include "hubreg/parallel.hpp"
#include "hubreg/rng.hpp"

namespace hubreg {

void ProblemShape::validate() const {
  if (n < 1 || d < 1 || s < 1)
    throw DomainError("ProblemShape: n, d, s must be positive");
  if (s > d) throw DomainError("ProblemShape: s must not exceed d");
  if (d < 3 * s) throw DomainError("ProblemShape: requires d/s >= 3");
}

void TheoryConstants::validate() const {
  if (!(L > 0.0) || !(sigma > 0.0))
    throw DomainError("TheoryConstants: L and sigma must be positive");
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(c_s > 0.0))
    throw DomainError("TheoryConstants: c1, c2, c_s must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("TheoryConstants: delta must lie in (0,1)");
}

double rate_ds(const ProblemShape& shape) {
  shape.validate();
  const double ratio = static_cast<double>(shape.d) / static_cast<double>(shape.s);
  return std::sqrt(static_cast<double>(shape.s) * std::log(ratio) /
                   static_cast<double>(shape.n));
}

double rate_delta(std::int64_t n, double delta) {
  if (n < 1) throw DomainError("rate_delta: n must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("rate_delta: delta must lie in (0,1)");
  return std::sqrt(std::log(1.0 / delta) / static_cast<double>(n));
}

double lambda_o_theory(const TheoryConstants& consts, std::int64_t n) {
  consts.validate();
  if (n < 1) throw DomainError("lambda_o_theory: n must be positive");
  return 576.0 * consts.sigma * consts.L * consts.L /
         std::sqrt(static_cast<double>(n));
}

double lambda_s_theory(const TheoryConstants& consts, const ProblemShape& shape,
                       double lambda_o) {
  consts.validate();
  shape.validate();
  const double sqrt_n = std::sqrt(static_cast<double>(shape.n));
  const double rates = rate_ds(shape) + rate_delta(shape.n, consts.delta);
  return consts.c_s * lambda_o * sqrt_n * consts.L * rates /
         std::sqrt(static_cast<double>(shape.s));
}

RateQuantities radii_theory(const TheoryConstants& consts,
                            const ProblemShape& shape, double lambda_o) {
  consts.validate();
  shape.validate();
  RateQuantities q;
  q.r_ds = rate_ds(shape);
  q.r_delta = rate_delta(shape.n, consts.delta);
  const double sqrt_n = std::sqrt(static_cast<double>(shape.n));
  q.r_2 = 5.0 * consts.L * lambda_o * sqrt_n * (consts.c1 + consts.c2 + consts.c_s) *
          (q.r_ds + q.r_delta);
  q.r_1 = 3.0 * std::sqrt(static_cast<double>(shape.s)) * q.r_2;
  return q;
}

bool ConditionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConditionCheck& c) { return c.pass; });
}

ConditionReport check_theorem_conditions(const TheoryConstants& consts,
                                         const ProblemShape& shape,
                                         double lambda_o, double lambda_s) {
  consts.validate();
  shape.validate();
  const double sqrt_n = std::sqrt(static_cast<double>(shape.n));
  const RateQuantities q = radii_theory(consts, shape, lambda_o);
  const double csum = consts.c1 + consts.c2 + consts.c_s;

  ConditionReport report;
  auto ge = [&](std::string name, double value, double threshold) {
    report.checks.push_back({std::move(name), value, threshold,
                             value - threshold, value - threshold >= 0.0});
  };
  auto le = [&](std::string name, double value, double threshold) {
    report.checks.push_back({std::move(name), value, threshold,
                             threshold - value, threshold - value >= 0.0});
  };

  ge("lambda_o*sqrt(n) >= 576*sigma*L^2", lambda_o * sqrt_n,
     576.0 * consts.sigma * consts.L * consts.L);
  ge("c_s >= 5*c1", consts.c_s, 5.0 * consts.c1);
  le("r_ds <= 1", q.r_ds, 1.0);
  le("r_delta <= 1", q.r_delta, 1.0);
  le("r_2 <= 1", q.r_2, 1.0);
  le("320*L^4*(c1+c2+c_s)*(r_ds+r_delta) <= 1",
     320.0 * std::pow(consts.L, 4) * csum * (q.r_ds + q.r_delta), 1.0);
  const double target = consts.c_s * lambda_o * sqrt_n * consts.L *
                        (q.r_ds + q.r_delta);
  const double dev =
      std::abs(lambda_s * std::sqrt(static_cast<double>(shape.s)) - target) /
      std::max(target, std::numeric_limits<double>::min());
  le("lambda_s*sqrt(s) == c_s*lambda_o*sqrt(n)*L*(r_ds+r_delta)", dev, 1e-9);

  report.error_bound = 2880.0 * std::pow(consts.L, 3) * consts.sigma * csum *
                       (q.r_ds + q.r_delta);
  return report;
}

SolverOptions cv_solver_options() {
  SolverOptions opts;
  opts.tol_kkt = 1e-6;
  return opts;
}

namespace {

std::vector<int> fold_assignment(std::uint64_t seed, Index n, int folds) {
  auto eng = rng::stream_engine(seed, rng::Stream::folds);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(eng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % folds);
  return fold;
}

double heldout_score(double residual, const PenaltyConfig& cfg,
                     SmoothLossKind loss, Index n_train) {
  if (loss == SmoothLossKind::squared) return residual * residual;
  const double tau = cfg.lambda_o * std::sqrt(static_cast<double>(n_train));
  return tau * tau * huber_loss(residual / tau);
}

}  // namespace

PenaltyConfig lambda_grid_cv(const Dataset& data, SmoothLossKind loss,
                             int folds, const std::vector<PenaltyConfig>& grid,
                             std::uint64_t seed, const SolverOptions& opts,
                             int threads) {
  data.validate();
  if (folds < 2) throw ConfigError("lambda_grid_cv: folds must be >= 2");
  if (grid.empty()) throw ConfigError("lambda_grid_cv: empty grid");
  if (data.n() < folds)
    throw ConfigError("lambda_grid_cv: fewer rows than folds");
  for (const auto& cfg : grid) cfg.validate();

  const Index n = data.n();
  const Index d = data.d();
  const auto fold = fold_assignment(seed, n, folds);

  // score_by_fold[f][g]: summed held-out loss, filled independently per fold.
  std::vector<std::vector<double>> score_by_fold(
      static_cast<std::size_t>(folds),
      std::vector<double>(grid.size(), 0.0));

  parallel_for(folds, threads, [&](std::int64_t f) {
    std::vector<Index> train_rows, held_rows;
    for (Index i = 0; i < n; ++i)
      (fold[static_cast<std::size_t>(i)] == f ? held_rows : train_rows)
          .push_back(i);

    Dataset train;
    train.X.resize(static_cast<Index>(train_rows.size()), d);
    train.y.resize(static_cast<Index>(train_rows.size()));
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      train.X.row(static_cast<Index>(i)) = data.X.row(train_rows[i]);
      train.y[static_cast<Index>(i)] = data.y[train_rows[i]];
    }

    SolverOptions fold_opts = opts;
    fold_opts.lipschitz_bound = lipschitz_upper_bound(train).value;

    std::optional<Vector> warm;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const FitResult res = fit(train, grid[g], loss, fold_opts, warm);
      warm = res.beta_hat;
      double acc = 0.0;
      for (const Index i : held_rows) {
        const double r = data.y[i] - data.X.row(i).dot(res.beta_hat);
        acc += heldout_score(r, grid[g], loss, train.n());
      }
      score_by_fold[static_cast<std::size_t>(f)][g] = acc;
    }
  });

  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f)
      total += score_by_fold[static_cast<std::size_t>(f)][g];
    if (total < best_score) {
      best_score = total;
      best = g;
    }
  }
  return grid[best];
}

}  // namespace hubreg
