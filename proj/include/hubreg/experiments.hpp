#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hubreg/datagen.hpp"
#include "hubreg/solver.hpp"
#include "hubreg/tuning.hpp"
#include "hubreg/types.hpp"

namespace hubreg {

/// theory: tuning parameters straight from the admissibility formulas.
/// practical: lambda_s by cross-validation, lambda_o at a fixed multiple of
/// the noise scale (the theory constants are far too conservative at desk
/// scale to leave nonzero solutions).
enum class TuningMode { theory, practical };

enum class EstimatorKind { huber_l1, lasso };

struct SweepGrid {
  ScenarioSpec base;
  std::vector<std::int64_t> n_values;  // strictly increasing
  int replicates = 1;
  TuningMode tuning_mode = TuningMode::practical;
  double delta = 0.05;
  /// When set, bypasses tuning_mode and fits every replicate with exactly
  /// these penalties.
  std::optional<PenaltyConfig> fixed_config;

  void validate() const;
};

struct SweepRow {
  EstimatorKind estimator = EstimatorKind::huber_l1;
  std::int64_t n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double l1_error = 0.0;
  double l2_error = 0.0;
  bool support_recovered = false;
  bool converged = false;
  double lambda_o = 0.0;
  double lambda_s = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct SweepAggregate {
  EstimatorKind estimator = EstimatorKind::huber_l1;
  std::int64_t n = 0;
  double median_l2 = 0.0;
  double iqr_l2 = 0.0;
  int converged_count = 0;
  int failed_count = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ordered by (n, replicate, estimator)
  std::vector<SweepAggregate> aggregates;
  SlopeFit slope_fit;        // huber_l1 log median l2 error vs log n
  SlopeFit slope_fit_lasso;
  int nonconverged = 0;
};

/// Replicate seeds are base.seed XOR mix(n, replicate); non-converged fits
/// stay in rows (flagged) but are excluded from aggregates and slopes.
SweepReport run_sweep(const SweepGrid& grid, const TheoryConstants& consts,
                      int threads = 1);

struct SupportFunctionResult {
  double value = 0.0;
  Vector argmax;
};

/// Exact maximum of <g, v> over {||v||_1 <= r1} intersect {||v||_2 <= r2},
/// through the dual  min_{mu >= 0} mu r1 + r2 ||soft_threshold(g, mu)||_2,
/// solved by bisection (absolute tolerance 1e-10 in units of ||g||_inf).
/// The argmax is reconstructed from the optimal multiplier and `value`
/// equals <g, argmax> of the returned feasible point.
SupportFunctionResult support_function_l1l2(const Vector& g, double r1,
                                            double r2);

enum class ProbeKind { multiplier, curvature };

struct ProbeRecord {
  std::int64_t n = 0;
  int index = 0;       // replicate (multiplier) or direction index (curvature)
  double value = 0.0;  // scaled supremum (multiplier) or LHS (curvature)
  double v_norm2_sq = 0.0;  // curvature only
  double margin = 0.0;      // curvature only
};

struct ProbeReport {
  ProbeKind kind = ProbeKind::multiplier;
  std::vector<ProbeRecord> records;
  std::vector<std::pair<std::int64_t, double>> per_n;  // median value per n
  double slope = 0.0;  // multiplier only; NaN when undefined
  double r1 = 0.0;     // radii actually probed
  double r2 = 0.0;
  double r2_theory = 0.0;  // curvature: radius before the unit cap
  double deviation_allowance = 0.0;  // curvature deviation term
  double min_margin = 0.0;
  double min_lhs_ratio = 0.0;        // curvature: min LHS / ||v||_2^2
  double frac_lhs_ge_quarter = 0.0;  // curvature: share with LHS >= 0.25||v||_2^2
  int summand_sign_violations = 0;   // curvature: negative summands observed
};

/// Empirical multiplier process: per (n, replicate), the exact supremum of
/// (1/n) sum_i h(xi_i/(lambda_o sqrt(n))) <x_i, v> over the l1/l2
/// intersection, scaled by lambda_o sqrt(n). The radii come from the base
/// scenario shape and stay fixed across the n grid so the statistic's decay
/// in n is isolated.
ProbeReport probe_multiplier_process(const ScenarioSpec& spec,
                                     const TheoryConstants& consts,
                                     const std::vector<std::int64_t>& n_values,
                                     int replicates, int threads = 1);

/// Curvature probe: one instance, v_samples random s-sparse directions on
/// the sphere of radius min(r_2, 1) (the admissible range caps the radius;
/// beyond it the Huber score saturates and the bound is not claimed).
/// Records per-sample LHS and its margin over ||v||^2/2 minus the deviation
/// allowance.
ProbeReport probe_restricted_curvature(const ScenarioSpec& spec,
                                       const TheoryConstants& consts,
                                       int v_samples);

struct ComparePair {
  std::uint64_t seed = 0;
  double huber_l2 = 0.0;
  double lasso_l2 = 0.0;
};

struct CompareReport {
  std::vector<ComparePair> pairs;  // paired by seed
  double ratio_median = 0.0;       // median huber l2 / median lasso l2
  double ci_lo = 0.0;              // 95% bootstrap interval for the ratio
  double ci_hi = 0.0;
};

/// Practical-mode tuning knobs shared by sweeps, comparisons and the CLI.
struct PracticalTuningOptions {
  int folds = 5;
  int grid_size = 8;
  double lambda_min_ratio = 1e-3;
  /// Huber residual threshold in noise-scale units:
  /// lambda_o sqrt(n) = threshold_sigmas * sigma.
  double threshold_sigmas = 2.0;
};

CompareReport compare_estimators(const ScenarioSpec& spec, int replicates,
                                 TuningMode mode, const TheoryConstants& consts,
                                 int threads = 1,
                                 const PracticalTuningOptions& topts = {});

/// lambda_s by K-fold CV on a geometric grid below lambda_max (the smallest
/// penalty with an all-zero solution); lambda_o from the noise-scale rule.
PenaltyConfig tune_practical(const Dataset& data, SmoothLossKind loss,
                             double sigma_hint, std::uint64_t seed,
                             const PracticalTuningOptions& topts = {},
                             int threads = 1);

PenaltyConfig tune_theory(const TheoryConstants& consts,
                          const ProblemShape& shape);

/// Least-squares fit of log(value) against log(n).
SlopeFit fit_power_law(const std::vector<std::pair<double, double>>& n_value);

const char* to_string(EstimatorKind kind);
const char* to_string(TuningMode mode);
const char* to_string(ProbeKind kind);
TuningMode tuning_mode_from_string(const std::string& name);
ProbeKind probe_kind_from_string(const std::string& name);

}  // namespace hubreg
