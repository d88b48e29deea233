#include "hubreg/solver.hpp"

#include <cmath>

#include "hubreg/huber.hpp"
#include "hubreg/rng.hpp"

namespace hubreg {

void SolverOptions::validate() const {
  if (max_iter < 1) throw ConfigError("SolverOptions: max_iter must be >= 1");
  if (!(tol_kkt > 0.0) || !(tol_obj > 0.0))
    throw ConfigError("SolverOptions: tolerances must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ConfigError("SolverOptions: backtrack_factor must lie in (0,1)");
  if (lipschitz_bound && !(*lipschitz_bound > 0.0))
    throw ConfigError("SolverOptions: lipschitz_bound must be positive");
}

double soft_threshold(double v, double t) {
  if (!std::isfinite(v) || !std::isfinite(t))
    throw DomainError("soft_threshold: non-finite input");
  if (t < 0.0) throw DomainError("soft_threshold: negative threshold");
  const double a = std::abs(v) - t;
  return a > 0.0 ? (v < 0.0 ? -a : a) : 0.0;
}

Vector soft_threshold(const Vector& v, double t) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], t);
  return out;
}

LipschitzBound lipschitz_upper_bound(const Dataset& data) {
  data.validate();
  const auto n = data.n();
  const auto d = data.d();
  const double fro2 = data.X.squaredNorm();
  if (fro2 == 0.0) return {1e-12, true};

  // Power iteration on X'X with a fixed-seed random start, so the estimate
  // is deterministic and almost surely not orthogonal to the top eigenvector.
  rng::Engine eng(rng::derive_key(0x5ca1ab1e, rng::Stream::start_vector));
  Vector v(d);
  for (Index j = 0; j < d; ++j) v[j] = eng.normal();
  v.normalize();

  double lambda = 0.0;
  constexpr double rel_tol = 1e-6;
  constexpr int max_pi_iter = 20000;
  int settled = 0;
  for (int it = 0; it < max_pi_iter; ++it) {
    Vector w = data.X.transpose() * (data.X * v);
    const double norm = w.norm();
    if (norm == 0.0) break;  // v fell in the null space
    const double lambda_new = v.dot(w);
    w /= norm;
    v.swap(w);
    settled = (it > 0 && std::abs(lambda_new - lambda) <= rel_tol * lambda_new)
                  ? settled + 1
                  : 0;
    lambda = lambda_new;
    if (settled >= 3) break;
  }
  const double bound = 1.01 * std::max(lambda, fro2 / static_cast<double>(d)) /
                       static_cast<double>(n);
  return {std::max(bound, 1e-12), false};
}

namespace {

struct SmoothEval {
  double value = 0.0;
  Vector gradient;
};

// Smooth part of either loss kind, staged so one residual matvec feeds both
// the value and the gradient.
class SmoothModel {
 public:
  SmoothModel(const Dataset& data, const PenaltyConfig& cfg,
              SmoothLossKind loss)
      : data_(data),
        cfg_(cfg),
        loss_(loss),
        n_(static_cast<double>(data.n())),
        scale_(cfg.lambda_o * std::sqrt(n_)) {}

  Vector residual(const Vector& beta) const {
    return data_.y - data_.X * beta;
  }

  double value(const Vector& r) const {
    if (loss_ == SmoothLossKind::squared) return r.squaredNorm() / (2.0 * n_);
    double acc = 0.0;
    for (Index i = 0; i < r.size(); ++i) acc += huber_loss(r[i] / scale_);
    return cfg_.lambda_o * cfg_.lambda_o * acc;
  }

  Vector gradient(Vector r) const {  // consumes the residual
    if (loss_ == SmoothLossKind::squared)
      return -(data_.X.transpose() * r) / n_;
    for (Index i = 0; i < r.size(); ++i) r[i] = huber_score(r[i] / scale_);
    return -(cfg_.lambda_o / std::sqrt(n_)) * (data_.X.transpose() * r);
  }

  SmoothEval eval(const Vector& beta) const {
    Vector r = residual(beta);
    SmoothEval out;
    out.value = value(r);
    out.gradient = gradient(std::move(r));
    return out;
  }

 private:
  const Dataset& data_;
  const PenaltyConfig& cfg_;
  SmoothLossKind loss_;
  double n_;
  double scale_;
};

double kkt_from_gradient(const Vector& beta, const Vector& g, double lambda_s) {
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double viol =
        beta[j] != 0.0
            ? std::abs(g[j] + (beta[j] > 0.0 ? lambda_s : -lambda_s))
            : std::max(0.0, std::abs(g[j]) - lambda_s);
    worst = std::max(worst, viol);
  }
  return worst;
}

}  // namespace

double kkt_residual(const Vector& beta, const Dataset& data,
                    const PenaltyConfig& cfg, SmoothLossKind loss) {
  data.validate();
  cfg.validate();
  if (beta.size() != data.d())
    throw ShapeError("kkt_residual: beta/X dimension mismatch");
  const SmoothModel model(data, cfg, loss);
  return kkt_from_gradient(beta, model.eval(beta).gradient, cfg.lambda_s);
}

FitResult fit(const Dataset& data, const PenaltyConfig& cfg,
              SmoothLossKind loss, const SolverOptions& opts,
              const std::optional<Vector>& init) {
  data.validate();
  cfg.validate();
  opts.validate();
  const Index d = data.d();
  if (init && init->size() != d)
    throw ShapeError("fit: init/X dimension mismatch");

  FitResult res;
  res.loss_kind = loss;

  const double lip = opts.lipschitz_bound ? *opts.lipschitz_bound
                                          : lipschitz_upper_bound(data).value;
  const bool backtrack = opts.step_rule == StepRule::backtracking;
  // Backtracking probes steps above 1/L; the fixed rule stays at the bound.
  double step = backtrack ? 10.0 / lip : 1.0 / lip;

  const SmoothModel model(data, cfg, loss);
  Vector x = init ? *init : Vector::Zero(d);
  Vector y = x;
  double t = 1.0;

  SmoothEval ex = model.eval(x);
  double fx = ex.value + cfg.lambda_s * x.lpNorm<1>();
  res.objective_trace.push_back(fx);
  res.kkt_residual = kkt_from_gradient(x, ex.gradient, cfg.lambda_s);
  if (res.kkt_residual <= opts.tol_kkt) {
    res.beta_hat = x;
    res.converged = true;
    return res;
  }

  // Near the optimum the objective change underflows a few dozen iterations
  // before the KKT residual crosses a tight tolerance; the stall verdict
  // waits that out.
  int stall_count = 0;
  constexpr int stall_limit = 50;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    // Under ISTA (and on the first step) y coincides with x, whose
    // gradient is already in hand.
    const SmoothEval ey =
        (opts.acceleration == Acceleration::ista || iter == 1)
            ? ex
            : model.eval(y);

    Vector x_new;
    Vector r_new;
    double smooth_new = 0.0;
    double gap = 0.0;
    for (;;) {
      x_new = soft_threshold(y - step * ey.gradient, step * cfg.lambda_s);
      r_new = model.residual(x_new);
      smooth_new = model.value(r_new);
      if (!backtrack) break;
      const Vector diff = x_new - y;
      const double bound = ey.value + ey.gradient.dot(diff) +
                           diff.squaredNorm() / (2.0 * step);
      gap = bound - smooth_new;
      if (gap >= -1e-12 * std::max(1.0, std::abs(bound))) break;
      step *= opts.backtrack_factor;
    }

    SmoothEval ex_new;
    ex_new.value = smooth_new;
    ex_new.gradient = model.gradient(std::move(r_new));
    const double f_new = ex_new.value + cfg.lambda_s * x_new.lpNorm<1>();
    const double kkt = kkt_from_gradient(x_new, ex_new.gradient, cfg.lambda_s);

    if (opts.acceleration == Acceleration::ista) {
      y = x_new;
      t = 1.0;
    } else if (f_new > fx) {
      // Function-value adaptive restart: drop the momentum.
      t = 1.0;
      y = x_new;
    } else {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_new) * (x_new - x);
      t = t_new;
    }

    const double obj_change = std::abs(f_new - fx);
    x = std::move(x_new);
    ex = std::move(ex_new);
    res.objective_trace.push_back(f_new);
    res.iterations = iter;
    res.kkt_residual = kkt;

    if (opts.on_iteration)
      opts.on_iteration({iter, f_new, kkt, step, backtrack ? gap : 0.0});

    if (kkt <= opts.tol_kkt) {
      res.converged = true;
      break;
    }
    if (obj_change <= opts.tol_obj * std::abs(f_new)) {
      if (++stall_count >= stall_limit) {
        res.stalled = true;
        break;
      }
    } else {
      stall_count = 0;
    }
    fx = f_new;
  }

  res.beta_hat = x;
  return res;
}

}  // namespace hubreg
