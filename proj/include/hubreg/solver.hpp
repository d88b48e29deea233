#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hubreg/types.hpp"

namespace hubreg {

/// Smooth data-fit term of the penalized program. `squared` is the plain
/// least-squares term sum_i r_i^2/(2n); `huber` is the scaled Huber term.
enum class SmoothLossKind { huber, squared };

enum class Acceleration { ista, fista_restart };
enum class StepRule { fixed_lipschitz, backtracking };

/// Per-iteration diagnostics delivered to SolverOptions::on_iteration.
struct IterationInfo {
  int iteration = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double step_size = 0.0;
  /// Slack of the accepted quadratic upper bound (model - actual); only
  /// meaningful under backtracking, where accepted steps keep it >= 0.
  double majorization_gap = 0.0;
};

struct SolverOptions {
  int max_iter = 100000;
  double tol_kkt = 1e-8;
  double tol_obj = 1e-12;
  Acceleration acceleration = Acceleration::fista_restart;
  StepRule step_rule = StepRule::fixed_lipschitz;
  double backtrack_factor = 0.5;
  /// Caller-supplied gradient Lipschitz bound; skips the power iteration.
  /// Useful when many fits share one design matrix (CV grids, warm paths).
  std::optional<double> lipschitz_bound;
  std::function<void(const IterationInfo&)> on_iteration;

  void validate() const;
};

struct FitResult {
  Vector beta_hat;
  int iterations = 0;
  bool converged = false;
  /// Set when the objective stalled (relative change below tol_obj for
  /// several iterations) before the KKT residual reached tol_kkt.
  bool stalled = false;
  double kkt_residual = 0.0;
  std::vector<double> objective_trace;
  SmoothLossKind loss_kind = SmoothLossKind::huber;
};

struct LipschitzBound {
  double value = 0.0;
  bool degenerate = false;
};

/// Proximal operator of t|.|: sign(v) * max(|v| - t, 0).
double soft_threshold(double v, double t);

/// Componentwise soft threshold.
Vector soft_threshold(const Vector& v, double t);

/// Upper bound on the largest eigenvalue of X'X/n (a gradient Lipschitz
/// constant for both loss kinds), via power iteration to 1e-6 relative
/// accuracy inflated by 1.01. A zero matrix yields a tiny positive floor
/// with the degenerate flag set.
LipschitzBound lipschitz_upper_bound(const Dataset& data);

/// Violation of the l1 subgradient optimality condition at beta:
/// max_j |g_j + lambda_s sign(beta_j)| over active coordinates and
/// max(0, |g_j| - lambda_s) over zero coordinates.
double kkt_residual(const Vector& beta, const Dataset& data,
                    const PenaltyConfig& cfg, SmoothLossKind loss);

/// Solve min_beta smooth(beta) + lambda_s ||beta||_1 by proximal gradient
/// descent (FISTA with function-value restart by default). Deterministic
/// given identical inputs; init defaults to the zero vector.
FitResult fit(const Dataset& data, const PenaltyConfig& cfg,
              SmoothLossKind loss, const SolverOptions& opts = {},
              const std::optional<Vector>& init = std::nullopt);

}  // namespace hubreg
