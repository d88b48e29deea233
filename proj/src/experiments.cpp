#include "hubreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hubreg/huber.hpp"
#include "hubreg/parallel.hpp"
#include "hubreg/rng.hpp"
#include "hubreg/stats.hpp"

namespace hubreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool support_matches(const Vector& beta_hat, const Vector& beta_star,
                     double magnitude) {
  const double cutoff = 1e-6 * magnitude;
  for (Index j = 0; j < beta_hat.size(); ++j) {
    const bool est = std::abs(beta_hat[j]) > cutoff;
    const bool truth = beta_star[j] != 0.0;
    if (est != truth) return false;
  }
  return true;
}

std::uint64_t replicate_seed(std::uint64_t base, std::int64_t n, int replicate) {
  return base ^ rng::mix(static_cast<std::uint64_t>(n),
                         static_cast<std::uint64_t>(replicate));
}

}  // namespace

void SweepGrid::validate() const {
  base.validate();
  if (n_values.empty()) throw ConfigError("SweepGrid: n_values is empty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw ConfigError("SweepGrid: n values must be positive");
    if (i > 0 && n_values[i] <= n_values[i - 1])
      throw ConfigError("SweepGrid: n_values must be strictly increasing");
  }
  if (replicates < 1) throw ConfigError("SweepGrid: replicates must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("SweepGrid: delta must lie in (0,1)");
  if (fixed_config) fixed_config->validate();
}

PenaltyConfig tune_theory(const TheoryConstants& consts,
                          const ProblemShape& shape) {
  PenaltyConfig cfg;
  cfg.lambda_o = lambda_o_theory(consts, shape.n);
  cfg.lambda_s = lambda_s_theory(consts, shape, cfg.lambda_o);
  return cfg;
}

PenaltyConfig tune_practical(const Dataset& data, SmoothLossKind loss,
                             double sigma_hint, std::uint64_t seed,
                             const PracticalTuningOptions& topts, int threads) {
  data.validate();
  if (topts.folds < 2) throw ConfigError("tune_practical: folds must be >= 2");
  if (topts.grid_size < 1)
    throw ConfigError("tune_practical: grid_size must be >= 1");
  if (!(topts.lambda_min_ratio > 0.0 && topts.lambda_min_ratio <= 1.0))
    throw ConfigError("tune_practical: lambda_min_ratio must lie in (0,1]");
  if (!(topts.threshold_sigmas > 0.0))
    throw ConfigError("tune_practical: threshold_sigmas must be positive");

  const double n = static_cast<double>(data.n());
  const double sigma = std::max(sigma_hint, 1e-6);

  PenaltyConfig base;
  base.lambda_o = loss == SmoothLossKind::huber
                      ? topts.threshold_sigmas * sigma / std::sqrt(n)
                      : 1.0;
  base.lambda_s = 0.0;

  const Vector zero = Vector::Zero(data.d());
  const double lambda_max =
      loss == SmoothLossKind::huber
          ? gradient_smooth(zero, data, base).lpNorm<Eigen::Infinity>()
          : ((data.X.transpose() * data.y) / n).lpNorm<Eigen::Infinity>();
  if (lambda_max <= 0.0) return base;  // y is identically zero

  std::vector<PenaltyConfig> grid;
  grid.reserve(static_cast<std::size_t>(topts.grid_size));
  for (int k = 0; k < topts.grid_size; ++k) {
    const double expo = topts.grid_size == 1
                            ? 1.0
                            : static_cast<double>(k) /
                                  static_cast<double>(topts.grid_size - 1);
    PenaltyConfig cfg = base;
    cfg.lambda_s = lambda_max * std::pow(topts.lambda_min_ratio, expo);
    grid.push_back(cfg);
  }
  return lambda_grid_cv(data, loss, topts.folds, grid, seed,
                        cv_solver_options(), threads);
}

SlopeFit fit_power_law(const std::vector<std::pair<double, double>>& n_value) {
  SlopeFit out{kNaN, kNaN, kNaN};
  if (n_value.size() < 2) return out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [n, value] : n_value) {
    if (!(n > 0.0) || !(value > 0.0)) return out;
    const double x = std::log(n);
    const double y = std::log(value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double m = static_cast<double>(n_value.size());
  const double vx = sxx - sx * sx / m;
  const double vy = syy - sy * sy / m;
  const double cxy = sxy - sx * sy / m;
  if (vx <= 0.0) return out;
  out.slope = cxy / vx;
  out.intercept = (sy - out.slope * sx) / m;
  out.r_squared = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return out;
}

namespace {

struct FittedRow {
  double l1 = 0.0;
  double l2 = 0.0;
  bool support = false;
  bool converged = false;
  PenaltyConfig cfg;
};

FittedRow fit_one_estimator(const GeneratedInstance& inst,
                            const ScenarioSpec& sc, EstimatorKind kind,
                            TuningMode mode, const TheoryConstants& consts,
                            const std::optional<PenaltyConfig>& fixed,
                            const PracticalTuningOptions& topts = {}) {
  const SmoothLossKind loss = kind == EstimatorKind::huber_l1
                                  ? SmoothLossKind::huber
                                  : SmoothLossKind::squared;
  FittedRow out;
  if (fixed) {
    out.cfg = *fixed;
  } else if (mode == TuningMode::theory) {
    out.cfg = tune_theory(consts, sc.shape);
  } else {
    const std::uint64_t tune_seed =
        rng::mix(sc.seed, kind == EstimatorKind::huber_l1 ? 1 : 2);
    out.cfg = tune_practical(inst.data, loss, sc.noise.sigma, tune_seed, topts);
  }
  const FitResult res = fit(inst.data, out.cfg, loss);
  const Vector err = res.beta_hat - inst.beta_star;
  out.l1 = err.lpNorm<1>();
  out.l2 = err.norm();
  out.support = support_matches(res.beta_hat, inst.beta_star, sc.beta_magnitude);
  out.converged = res.converged;
  return out;
}

}  // namespace

SweepReport run_sweep(const SweepGrid& grid, const TheoryConstants& consts,
                      int threads) {
  grid.validate();
  consts.validate();
  TheoryConstants cdelta = consts;
  cdelta.delta = grid.delta;

  const auto& ns = grid.n_values;
  const int reps = grid.replicates;
  const std::int64_t items = static_cast<std::int64_t>(ns.size()) * reps;

  SweepReport report;
  report.rows.resize(static_cast<std::size_t>(2 * items));

  parallel_for(items, threads, [&](std::int64_t item) {
    const std::int64_t ni = item / reps;
    const int rep = static_cast<int>(item % reps);
    ScenarioSpec sc = grid.base;
    sc.shape.n = ns[static_cast<std::size_t>(ni)];
    sc.seed = replicate_seed(grid.base.seed, sc.shape.n, rep);
    const GeneratedInstance inst = sample_instance(sc);

    for (int e = 0; e < 2; ++e) {
      const EstimatorKind kind =
          e == 0 ? EstimatorKind::huber_l1 : EstimatorKind::lasso;
      const FittedRow fitted =
          fit_one_estimator(inst, sc, kind, grid.tuning_mode, cdelta,
                            grid.fixed_config);
      SweepRow row;
      row.estimator = kind;
      row.n = sc.shape.n;
      row.replicate = rep;
      row.seed = sc.seed;
      row.l1_error = fitted.l1;
      row.l2_error = fitted.l2;
      row.support_recovered = fitted.support;
      row.converged = fitted.converged;
      row.lambda_o = fitted.cfg.lambda_o;
      row.lambda_s = fitted.cfg.lambda_s;
      report.rows[static_cast<std::size_t>(2 * item + e)] = row;
    }
  });

  for (const auto& row : report.rows)
    if (!row.converged) ++report.nonconverged;

  for (int e = 0; e < 2; ++e) {
    const EstimatorKind kind =
        e == 0 ? EstimatorKind::huber_l1 : EstimatorKind::lasso;
    std::vector<std::pair<double, double>> med_points;
    for (const std::int64_t n : ns) {
      std::vector<double> l2s;
      int failed = 0;
      for (const auto& row : report.rows) {
        if (row.estimator != kind || row.n != n) continue;
        if (row.converged)
          l2s.push_back(row.l2_error);
        else
          ++failed;
      }
      SweepAggregate agg;
      agg.estimator = kind;
      agg.n = n;
      agg.converged_count = static_cast<int>(l2s.size());
      agg.failed_count = failed;
      agg.median_l2 = l2s.empty() ? kNaN : median(l2s);
      agg.iqr_l2 = l2s.empty() ? kNaN : interquartile_range(l2s);
      report.aggregates.push_back(agg);
      if (!l2s.empty())
        med_points.emplace_back(static_cast<double>(n), agg.median_l2);
    }
    const SlopeFit sf = fit_power_law(med_points);
    (e == 0 ? report.slope_fit : report.slope_fit_lasso) = sf;
  }
  return report;
}

SupportFunctionResult support_function_l1l2(const Vector& g, double r1,
                                            double r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0))
    throw DomainError("support_function_l1l2: radii must be positive");
  if (!g.allFinite())
    throw DomainError("support_function_l1l2: non-finite entries");

  SupportFunctionResult out;
  out.argmax = Vector::Zero(g.size());
  if (g.size() == 0) return out;
  const double gmax = g.cwiseAbs().maxCoeff();
  if (gmax == 0.0) return out;

  // Work on a = |g|/gmax so the bisection runs on [0, 1] regardless of the
  // scale of g (this also makes positive homogeneity hold to rounding).
  const Vector a = g.cwiseAbs() / gmax;

  // Sign of the dual derivative r1 - r2 * S1(mu)/sqrt(S2(mu)), where
  // S1, S2 are the soft-threshold partial sums; increasing in mu.
  auto deriv_nonneg = [&](double mu) {
    double s1 = 0.0, s2 = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
      const double w = a[i] - mu;
      if (w > 0.0) {
        s1 += w;
        s2 += w * w;
      }
    }
    if (s2 == 0.0) return true;  // past the last kink the dual only grows
    return r1 * std::sqrt(s2) >= r2 * s1;
  };

  double mu = 0.0;
  if (!deriv_nonneg(0.0)) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (deriv_nonneg(mid) ? hi : lo) = mid;
    }
    mu = 0.5 * (lo + hi);
  }

  double best = 0.0;
  Vector w(g.size());
  for (Index i = 0; i < g.size(); ++i) w[i] = soft_threshold(g[i], mu * gmax);
  const double wnorm = w.norm();
  if (wnorm > 0.0) {
    Vector v = (r2 / wnorm) * w;
    const double l1 = v.lpNorm<1>();
    if (l1 > r1) v *= r1 / l1;
    best = g.dot(v);
    out.argmax = v;
  }

  // When the optimal multiplier sits at the top kink the thresholded vector
  // vanishes; the maximizer then concentrates on the top-magnitude entries.
  {
    std::vector<Index> top;
    for (Index i = 0; i < a.size(); ++i)
      if (a[i] >= 1.0 - 1e-12) top.push_back(i);
    const double m = static_cast<double>(top.size());
    const double t = std::min(r1 / m, r2 / std::sqrt(m));
    Vector v = Vector::Zero(g.size());
    for (const Index i : top) v[i] = g[i] > 0.0 ? t : -t;
    const double val = g.dot(v);
    if (val > best) {
      best = val;
      out.argmax = v;
    }
  }

  out.value = best;
  return out;
}

ProbeReport probe_multiplier_process(const ScenarioSpec& spec,
                                     const TheoryConstants& consts,
                                     const std::vector<std::int64_t>& n_values,
                                     int replicates, int threads) {
  spec.validate();
  consts.validate();
  if (n_values.empty())
    throw ConfigError("probe_multiplier_process: n_values is empty");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw ConfigError("probe_multiplier_process: n_values must be increasing");
  if (replicates < 1)
    throw ConfigError("probe_multiplier_process: replicates must be >= 1");

  // Radii fixed from the base shape across the n grid: the statistic then
  // decays like the deviation bound's sqrt(log(d/s)/n) factor.
  const double lambda_o_base = lambda_o_theory(consts, spec.shape.n);
  const RateQuantities radii = radii_theory(consts, spec.shape, lambda_o_base);

  ProbeReport report;
  report.kind = ProbeKind::multiplier;
  report.r1 = radii.r_1;
  report.r2 = radii.r_2;
  report.r2_theory = radii.r_2;

  const std::int64_t items =
      static_cast<std::int64_t>(n_values.size()) * replicates;
  report.records.resize(static_cast<std::size_t>(items));

  parallel_for(items, threads, [&](std::int64_t item) {
    const std::int64_t ni = item / replicates;
    const int rep = static_cast<int>(item % replicates);
    ScenarioSpec sc = spec;
    sc.shape.n = n_values[static_cast<std::size_t>(ni)];
    sc.seed = replicate_seed(spec.seed, sc.shape.n, rep);
    const GeneratedInstance inst = sample_instance(sc);

    const double lambda_o = lambda_o_theory(consts, sc.shape.n);
    const double scale =
        lambda_o * std::sqrt(static_cast<double>(sc.shape.n));
    Vector h(sc.shape.n);
    for (std::int64_t i = 0; i < sc.shape.n; ++i)
      h[i] = huber_score(inst.xi[i] / scale);
    const Vector g = (inst.data.X.transpose() * h) /
                     static_cast<double>(sc.shape.n);
    const auto sf = support_function_l1l2(g, radii.r_1, radii.r_2);

    ProbeRecord rec;
    rec.n = sc.shape.n;
    rec.index = rep;
    rec.value = scale * sf.value;
    report.records[static_cast<std::size_t>(item)] = rec;
  });

  std::vector<std::pair<double, double>> med_points;
  for (const std::int64_t n : n_values) {
    std::vector<double> vals;
    for (const auto& rec : report.records)
      if (rec.n == n) vals.push_back(rec.value);
    const double med = median(vals);
    report.per_n.emplace_back(n, med);
    med_points.emplace_back(static_cast<double>(n), med);
  }
  report.slope = fit_power_law(med_points).slope;
  return report;
}

ProbeReport probe_restricted_curvature(const ScenarioSpec& spec,
                                       const TheoryConstants& consts,
                                       int v_samples) {
  spec.validate();
  consts.validate();
  if (v_samples < 1)
    throw ConfigError("probe_restricted_curvature: v_samples must be >= 1");

  const auto n = spec.shape.n;
  const auto d = spec.shape.d;
  const auto s = spec.shape.s;
  const double lambda_o = lambda_o_theory(consts, n);
  const double scale = lambda_o * std::sqrt(static_cast<double>(n));
  const RateQuantities radii = radii_theory(consts, spec.shape, lambda_o);

  ProbeReport report;
  report.kind = ProbeKind::curvature;
  report.r2_theory = radii.r_2;
  // Beyond the admissible range r_2 <= 1 the score saturates and the
  // curvature bound is not claimed; the probe stays inside it.
  report.r2 = std::min(radii.r_2, 1.0);
  report.r1 = 3.0 * std::sqrt(static_cast<double>(s)) * report.r2;
  report.slope = kNaN;

  const GeneratedInstance inst = sample_instance(spec);
  Vector u(n);
  for (std::int64_t i = 0; i < n; ++i) u[i] = inst.xi[i] / scale;

  report.deviation_allowance =
      consts.c2 * consts.L * scale *
      (std::sqrt(std::log(static_cast<double>(d) / static_cast<double>(s)) /
                 static_cast<double>(n)) *
           report.r1 +
       std::sqrt(std::log(1.0 / consts.delta) / static_cast<double>(n)) *
           report.r2);

  auto dir_eng = rng::stream_engine(spec.seed, rng::Stream::directions);
  std::vector<Index> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), Index{0});

  report.records.resize(static_cast<std::size_t>(v_samples));
  report.min_margin = std::numeric_limits<double>::infinity();
  report.min_lhs_ratio = std::numeric_limits<double>::infinity();
  int quarter_count = 0;
  std::vector<double> lhs_values;
  lhs_values.reserve(static_cast<std::size_t>(v_samples));

  for (int k = 0; k < v_samples; ++k) {
    // s-sparse direction: partial Fisher-Yates support, gaussian weights.
    for (std::int64_t j = 0; j < s; ++j) {
      const auto pick = static_cast<std::size_t>(
          j + static_cast<std::int64_t>(
                  dir_eng.below(static_cast<std::uint64_t>(d - j))));
      std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
    }
    Vector v = Vector::Zero(d);
    double norm = 0.0;
    do {
      for (std::int64_t j = 0; j < s; ++j)
        v[pool[static_cast<std::size_t>(j)]] = dir_eng.normal();
      norm = v.norm();
    } while (norm == 0.0);
    v *= report.r2 / norm;

    const Vector w = (inst.data.X * v) / scale;
    double lhs = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double term = (huber_score(u[i]) - huber_score(u[i] - w[i])) * w[i];
      if (term < 0.0) ++report.summand_sign_violations;
      lhs += term;
    }
    lhs *= lambda_o * lambda_o;

    const double vsq = report.r2 * report.r2;
    ProbeRecord rec;
    rec.n = n;
    rec.index = k;
    rec.value = lhs;
    rec.v_norm2_sq = vsq;
    rec.margin = lhs - (0.5 * vsq - report.deviation_allowance);
    report.records[static_cast<std::size_t>(k)] = rec;

    report.min_margin = std::min(report.min_margin, rec.margin);
    report.min_lhs_ratio = std::min(report.min_lhs_ratio, lhs / vsq);
    if (lhs >= 0.25 * vsq) ++quarter_count;
    lhs_values.push_back(lhs);
  }
  report.frac_lhs_ge_quarter =
      static_cast<double>(quarter_count) / static_cast<double>(v_samples);
  report.per_n.emplace_back(n, median(lhs_values));
  return report;
}

CompareReport compare_estimators(const ScenarioSpec& spec, int replicates,
                                 TuningMode mode, const TheoryConstants& consts,
                                 int threads,
                                 const PracticalTuningOptions& topts) {
  spec.validate();
  consts.validate();
  if (replicates < 1)
    throw ConfigError("compare_estimators: replicates must be >= 1");

  CompareReport report;
  report.pairs.resize(static_cast<std::size_t>(replicates));

  parallel_for(replicates, threads, [&](std::int64_t r) {
    ScenarioSpec sc = spec;
    sc.seed = replicate_seed(spec.seed, spec.shape.n, static_cast<int>(r));
    const GeneratedInstance inst = sample_instance(sc);
    ComparePair pair;
    pair.seed = sc.seed;
    pair.huber_l2 = fit_one_estimator(inst, sc, EstimatorKind::huber_l1, mode,
                                      consts, std::nullopt, topts)
                        .l2;
    pair.lasso_l2 = fit_one_estimator(inst, sc, EstimatorKind::lasso, mode,
                                      consts, std::nullopt, topts)
                        .l2;
    report.pairs[static_cast<std::size_t>(r)] = pair;
  });

  auto ratio_of = [](const std::vector<double>& h, const std::vector<double>& l) {
    const double ml = median(l);
    return ml > 0.0 ? median(h) / ml : kNaN;
  };

  std::vector<double> hub, las;
  for (const auto& p : report.pairs) {
    hub.push_back(p.huber_l2);
    las.push_back(p.lasso_l2);
  }
  report.ratio_median = ratio_of(hub, las);

  constexpr int kBoot = 2000;
  auto eng = rng::stream_engine(spec.seed, rng::Stream::bootstrap);
  std::vector<double> ratios;
  ratios.reserve(kBoot);
  std::vector<double> bh(hub.size()), bl(las.size());
  for (int b = 0; b < kBoot; ++b) {
    for (std::size_t i = 0; i < hub.size(); ++i) {
      const auto pick = static_cast<std::size_t>(
          eng.below(static_cast<std::uint64_t>(hub.size())));
      bh[i] = hub[pick];
      bl[i] = las[pick];
    }
    const double rb = ratio_of(bh, bl);
    if (std::isfinite(rb)) ratios.push_back(rb);
  }
  if (!ratios.empty()) {
    report.ci_lo = quantile(ratios, 0.025);
    report.ci_hi = quantile(ratios, 0.975);
  } else {
    report.ci_lo = report.ci_hi = kNaN;
  }
  return report;
}

const char* to_string(EstimatorKind kind) {
  return kind == EstimatorKind::huber_l1 ? "huber_l1" : "lasso";
}

const char* to_string(TuningMode mode) {
  return mode == TuningMode::theory ? "theory" : "practical";
}

const char* to_string(ProbeKind kind) {
  return kind == ProbeKind::multiplier ? "multiplier" : "curvature";
}

TuningMode tuning_mode_from_string(const std::string& name) {
  if (name == "theory") return TuningMode::theory;
  if (name == "practical") return TuningMode::practical;
  throw ConfigError("unknown tuning mode: " + name);
}

ProbeKind probe_kind_from_string(const std::string& name) {
  if (name == "multiplier") return ProbeKind::multiplier;
  if (name == "curvature") return ProbeKind::curvature;
  throw ConfigError("unknown probe kind: " + name);
}

}  // namespace hubreg
