#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "hubreg/csv.hpp"
#include "hubreg/datagen.hpp"
#include "hubreg/experiments.hpp"
#include "hubreg/huber.hpp"
#include "hubreg/solver.hpp"
#include "hubreg/stats.hpp"
#include "hubreg/tuning.hpp"
#include "hubreg/version.hpp"

namespace {

using json = nlohmann::json;
using namespace hubreg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("HUBREG_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 0;
}

json load_config_file(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw ConfigError(std::string("cannot open config file: ") + argv[i + 1]);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("config file must hold a flat JSON object");
      return j;
    }
  }
  return json::object();
}

std::string json_to_token(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ',';
      out += json_to_token(item);
    }
    return out;
  }
  return v.dump();
}

/// Expands config-file entries into command-line tokens placed before the
/// user's own flags; with take-last semantics explicit flags override them.
std::vector<std::string> expand_args(int argc, char** argv, const json& config) {
  std::vector<std::string> args;
  if (argc >= 2) args.emplace_back(argv[1]);
  for (auto it = config.begin(); it != config.end(); ++it) {
    if (it.value().is_boolean()) {
      if (it.value().get<bool>()) args.push_back("--" + it.key());
      continue;
    }
    args.push_back("--" + it.key());
    args.push_back(json_to_token(it.value()));
  }
  for (int i = 2; i < argc; ++i) args.emplace_back(argv[i]);
  return args;
}

// Scenario flags shared by simulate/sweep/probe.
struct ScenarioFlags {
  std::int64_t n = 200;
  std::int64_t d = 50;
  std::int64_t s = 5;
  double sigma = 1.0;
  std::string covariates = "laplace_iid";
  std::string noise = "gaussian";
  double df = 3.0;
  double beta_magnitude = 1.0;
  std::string sign_rule = "all_plus";
  std::uint64_t seed = default_seed();

  void add_options(CLI::App* cmd) {
    auto opt = [](CLI::Option* o) {
      return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };
    opt(cmd->add_option("--n", n, "sample size"));
    opt(cmd->add_option("--d", d, "ambient dimension"));
    opt(cmd->add_option("--s", s, "sparsity of beta*"));
    opt(cmd->add_option("--sigma", sigma, "noise scale"));
    opt(cmd->add_option("--covariates", covariates, "covariate family")
            ->check(CLI::IsMember({"gaussian", "laplace_iid", "subweibull_half"})));
    opt(cmd->add_option("--noise", noise, "noise family")
            ->check(CLI::IsMember({"gaussian", "laplace", "student_t"})));
    opt(cmd->add_option("--df", df, "student_t degrees of freedom"));
    opt(cmd->add_option("--beta-magnitude", beta_magnitude, "magnitude of nonzeros"));
    opt(cmd->add_option("--sign-rule", sign_rule, "sign pattern of beta*")
            ->check(CLI::IsMember({"all_plus", "alternating", "random"})));
    opt(cmd->add_option("--seed", seed, "base RNG seed (default: HUBREG_SEED or 0)"));
  }

  ScenarioSpec to_spec() const {
    ScenarioSpec spec;
    spec.shape = ProblemShape{n, d, s};
    spec.covariates.kind = covariate_kind_from_string(covariates);
    spec.noise.kind = noise_kind_from_string(noise);
    spec.noise.sigma = sigma;
    spec.noise.df = df;
    spec.beta_magnitude = beta_magnitude;
    spec.beta_sign_rule = sign_rule_from_string(sign_rule);
    spec.seed = seed;
    return spec;
  }

  json to_json() const {
    json j;
    j["n"] = n;
    j["d"] = d;
    j["s"] = s;
    j["sigma"] = sigma;
    j["covariates"] = covariates;
    j["noise"] = noise;
    j["df"] = df;
    j["beta-magnitude"] = beta_magnitude;
    j["sign-rule"] = sign_rule;
    j["seed"] = seed;
    return j;
  }
};

struct ConstantFlags {
  double L = 0.0;  // 0 means: family default
  double c1 = 1.0;
  double c2 = 1.0;
  double cs = 5.0;
  double delta = 0.05;

  void add_options(CLI::App* cmd) {
    auto opt = [](CLI::Option* o) {
      return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };
    opt(cmd->add_option("--L", L, "subexponential constant (default: family value)"));
    opt(cmd->add_option("--c1", c1, "numerical constant c1"));
    opt(cmd->add_option("--c2", c2, "numerical constant c2"));
    opt(cmd->add_option("--cs", cs, "numerical constant c_s (>= 5 c1 admissible)"));
    opt(cmd->add_option("--delta", delta, "confidence parameter"));
  }

  TheoryConstants to_constants(const ScenarioFlags& sc) const {
    TheoryConstants consts;
    CovariateFamily fam{covariate_kind_from_string(sc.covariates)};
    consts.L = L > 0.0 ? L : default_subexp_constant(fam);
    consts.sigma = sc.sigma > 0.0 ? sc.sigma : 1.0;
    consts.c1 = c1;
    consts.c2 = c2;
    consts.c_s = cs;
    consts.delta = delta;
    return consts;
  }

  json to_json(const ScenarioFlags& sc) const {
    json j;
    j["L"] = to_constants(sc).L;
    j["c1"] = c1;
    j["c2"] = c2;
    j["cs"] = cs;
    j["delta"] = delta;
    return j;
  }
};

std::vector<std::string> provenance_lines(const std::string& command,
                                          const json& resolved,
                                          std::uint64_t seed) {
  return {
      std::string("hubreg ") + kVersion,
      "command: " + command,
      "config: " + resolved.dump(),
      "seed: " + std::to_string(seed),
  };
}

void print_condition_report(const ConditionReport& report) {
  std::cout << "theorem conditions (c1, c2 are placeholder constants):\n";
  for (const auto& c : report.checks) {
    std::cout << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name
              << "  value=" << csv::format_double(c.value)
              << " margin=" << csv::format_double(c.margin) << "\n";
  }
  std::cout << "  error bound 2880 L^3 sigma (c1+c2+c_s)(r_ds+r_delta) = "
            << csv::format_double(report.error_bound) << "\n";
}

std::string plot_path_for(const std::string& out) {
  const std::filesystem::path p(out);
  std::filesystem::path q = p;
  q.replace_extension();
  return q.string() + ".plot" + (p.has_extension() ? p.extension().string() : ".csv");
}

std::string svg_path_for(const std::string& out) {
  std::filesystem::path q(out);
  q.replace_extension();
  return q.string() + ".svg";
}

// ---------------------------------------------------------------- simulate

int run_simulate(const ScenarioFlags& sc, const std::string& out) {
  const ScenarioSpec spec = sc.to_spec();
  const GeneratedInstance inst = sample_instance(spec);
  json resolved = sc.to_json();
  resolved["out"] = out;
  const auto prov = provenance_lines("simulate", resolved, spec.seed);
  csv::write_dataset(out + ".data.csv", inst.data, prov);
  csv::write_indexed_vector(out + ".beta.csv", inst.beta_star, prov);
  csv::write_indexed_vector(out + ".xi.csv", inst.xi, prov);
  if (spec.covariates.kind == CovariateKind::subweibull_half)
    std::cout << "note: subweibull_half lies outside the subexponential "
                 "assumption set (stress family)\n";
  std::cout << "wrote " << out << ".data.csv (" << inst.data.n() << "x"
            << inst.data.d() << "), " << out << ".beta.csv, " << out
            << ".xi.csv\n";
  return kExitOk;
}

// --------------------------------------------------------------------- fit

double mad_sigma(const Vector& y) {
  std::vector<double> v(y.data(), y.data() + y.size());
  const double med = median(v);
  for (auto& x : v) x = std::abs(x - med);
  return 1.4826 * median(v);
}

struct FitFlags {
  std::string dataset;
  std::string out = "beta_hat.csv";
  double lambda_o = 0.0;  // 0: MAD-based default
  double lambda_s = -1.0; // <0: requires --cv
  bool cv = false;
  std::string loss = "huber";
  std::uint64_t seed = default_seed();
  int folds = 5;
  int max_iter = 100000;
  double tol_kkt = 1e-8;
  double tol_obj = 1e-12;
  std::string acceleration = "fista_restart";
  std::string step_rule = "fixed_lipschitz";
  int threads = static_cast<int>(std::thread::hardware_concurrency());
};

int run_fit(const FitFlags& ff) {
  const Dataset data = csv::read_dataset(ff.dataset);
  const double sqrt_n = std::sqrt(static_cast<double>(data.n()));
  const SmoothLossKind loss = ff.loss == "squared" ? SmoothLossKind::squared
                                                   : SmoothLossKind::huber;

  SolverOptions opts;
  opts.max_iter = ff.max_iter;
  opts.tol_kkt = ff.tol_kkt;
  opts.tol_obj = ff.tol_obj;
  opts.acceleration = ff.acceleration == "ista" ? Acceleration::ista
                                                : Acceleration::fista_restart;
  opts.step_rule = ff.step_rule == "backtracking" ? StepRule::backtracking
                                                  : StepRule::fixed_lipschitz;

  PenaltyConfig cfg;
  const double sigma_hint = mad_sigma(data.y);
  cfg.lambda_o = ff.lambda_o > 0.0
                     ? ff.lambda_o
                     : 2.0 * std::max(sigma_hint, 1e-6) / sqrt_n;
  if (ff.cv) {
    PracticalTuningOptions topts;
    topts.folds = ff.folds;
    // An explicit --lambda-o is threaded through the CV grid unchanged.
    const double hint = ff.lambda_o > 0.0
                            ? ff.lambda_o * sqrt_n / topts.threshold_sigmas
                            : sigma_hint;
    cfg = tune_practical(data, loss, hint, ff.seed, topts, ff.threads);
  } else {
    if (ff.lambda_s < 0.0)
      throw ConfigError("fit: provide --lambda-s or use --cv");
    cfg.lambda_s = ff.lambda_s;
  }

  const FitResult res = fit(data, cfg, loss, opts);

  json resolved;
  resolved["dataset"] = ff.dataset;
  resolved["out"] = ff.out;
  resolved["loss"] = ff.loss;
  resolved["lambda-o"] = cfg.lambda_o;
  resolved["lambda-s"] = cfg.lambda_s;
  resolved["cv"] = ff.cv;
  resolved["folds"] = ff.folds;
  resolved["seed"] = ff.seed;
  resolved["max-iter"] = ff.max_iter;
  resolved["tol-kkt"] = ff.tol_kkt;
  resolved["tol-obj"] = ff.tol_obj;
  resolved["acceleration"] = ff.acceleration;
  resolved["step-rule"] = ff.step_rule;
  csv::write_indexed_vector(ff.out, res.beta_hat,
                            provenance_lines("fit", resolved, ff.seed));

  std::cout << "lambda_o=" << csv::format_double(cfg.lambda_o)
            << " lambda_s=" << csv::format_double(cfg.lambda_s)
            << "\niterations=" << res.iterations
            << " kkt_residual=" << csv::format_double(res.kkt_residual)
            << " converged=" << (res.converged ? "yes" : "no")
            << (res.stalled ? " (stalled)" : "") << "\nwrote " << ff.out
            << "\n";
  return res.converged ? kExitOk : kExitNoConvergence;
}

// ------------------------------------------------------------------- sweep

struct SweepFlags {
  std::vector<std::int64_t> n_values = {500, 1000, 2000, 4000};
  int replicates = 50;
  std::string mode = "practical";
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  std::string out = "sweep.csv";
  bool svg = false;
};

int run_sweep_cmd(const ScenarioFlags& sc, const ConstantFlags& cf,
                  const SweepFlags& sw) {
  SweepGrid grid;
  grid.base = sc.to_spec();
  grid.base.shape.n = sw.n_values.front();
  grid.n_values = sw.n_values;
  grid.replicates = sw.replicates;
  grid.tuning_mode = tuning_mode_from_string(sw.mode);
  grid.delta = cf.delta;
  const TheoryConstants consts = cf.to_constants(sc);

  const SweepReport report = run_sweep(grid, consts, sw.threads);

  json resolved = sc.to_json();
  resolved.update(cf.to_json(sc));
  resolved["n-values"] = sw.n_values;
  resolved["replicates"] = sw.replicates;
  resolved["mode"] = sw.mode;
  resolved["out"] = sw.out;
  const auto prov = provenance_lines("sweep", resolved, grid.base.seed);

  csv::write_sweep_rows(sw.out, report, prov);
  csv::write_sweep_plot(plot_path_for(sw.out), report, prov);
  if (sw.svg) csv::write_sweep_svg(svg_path_for(sw.out), report);

  std::cout << std::left << std::setw(10) << "estimator" << std::setw(8) << "n"
            << std::setw(14) << "median_l2" << std::setw(14) << "iqr_l2"
            << "failed\n";
  for (const auto& a : report.aggregates) {
    std::cout << std::left << std::setw(10) << to_string(a.estimator)
              << std::setw(8) << a.n << std::setw(14)
              << csv::format_double(a.median_l2).substr(0, 12) << std::setw(14)
              << csv::format_double(a.iqr_l2).substr(0, 12) << a.failed_count
              << "\n";
  }
  std::cout << "log-log slope huber_l1: "
            << csv::format_double(report.slope_fit.slope)
            << " (r^2=" << csv::format_double(report.slope_fit.r_squared)
            << ")\nlog-log slope lasso:    "
            << csv::format_double(report.slope_fit_lasso.slope)
            << " (r^2=" << csv::format_double(report.slope_fit_lasso.r_squared)
            << ")\n";
  if (report.nonconverged > 0)
    std::cout << "non-converged fits: " << report.nonconverged
              << " (excluded from aggregates)\n";

  for (const std::int64_t n : sw.n_values) {
    ProblemShape shape{n, sc.d, sc.s};
    const double lo = lambda_o_theory(consts, n);
    const double ls = lambda_s_theory(consts, shape, lo);
    std::cout << "n=" << n << " ";
    print_condition_report(check_theorem_conditions(consts, shape, lo, ls));
  }
  std::cout << "wrote " << sw.out << " and " << plot_path_for(sw.out) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- probe

struct ProbeFlags {
  std::string kind = "multiplier";
  std::vector<std::int64_t> n_values = {500, 1000, 2000, 4000};
  int replicates = 100;
  int v_samples = 200;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  std::string out = "probe.csv";
};

int run_probe(const ScenarioFlags& sc, const ConstantFlags& cf,
              const ProbeFlags& pf) {
  const ScenarioSpec spec = sc.to_spec();
  const TheoryConstants consts = cf.to_constants(sc);
  const ProbeKind kind = probe_kind_from_string(pf.kind);

  json resolved = sc.to_json();
  resolved.update(cf.to_json(sc));
  resolved["kind"] = pf.kind;
  resolved["out"] = pf.out;

  if (kind == ProbeKind::multiplier) {
    resolved["n-values"] = pf.n_values;
    resolved["replicates"] = pf.replicates;
    const ProbeReport report = probe_multiplier_process(
        spec, consts, pf.n_values, pf.replicates, pf.threads);
    csv::write_probe_rows(pf.out, report,
                          provenance_lines("probe", resolved, spec.seed));
    std::cout << "multiplier probe, radii r1="
              << csv::format_double(report.r1)
              << " r2=" << csv::format_double(report.r2) << "\n";
    for (const auto& [n, med] : report.per_n)
      std::cout << "  n=" << n << " median=" << csv::format_double(med) << "\n";
    std::cout << "log-log slope: " << csv::format_double(report.slope)
              << "\nwrote " << pf.out << "\n";
  } else {
    resolved["v-samples"] = pf.v_samples;
    const ProbeReport report =
        probe_restricted_curvature(spec, consts, pf.v_samples);
    csv::write_probe_rows(pf.out, report,
                          provenance_lines("probe", resolved, spec.seed));
    std::cout << "curvature probe, radius r2="
              << csv::format_double(report.r2) << " (theory r2="
              << csv::format_double(report.r2_theory)
              << ", capped at 1)\n"
              << "deviation allowance: "
              << csv::format_double(report.deviation_allowance) << "\n"
              << "min margin: " << csv::format_double(report.min_margin)
              << "\nmin LHS/||v||^2: "
              << csv::format_double(report.min_lhs_ratio)
              << "\nshare with LHS >= 0.25||v||^2: "
              << csv::format_double(report.frac_lhs_ge_quarter)
              << "\nnegative summands: " << report.summand_sign_violations
              << "\nwrote " << pf.out << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const json config = load_config_file(argc, argv);
    const auto args = expand_args(argc, argv, config);

    CLI::App app{"l1-penalized Huber regression for heavy-tailed covariates",
                 "hubreg"};
    app.require_subcommand(1);
    std::string config_path;

    ScenarioFlags sim_sc, swp_sc, prb_sc;
    ConstantFlags swp_cf, prb_cf;
    std::string sim_out = "instance";
    FitFlags ff;
    SweepFlags sw;
    ProbeFlags pf;

    auto opt = [](CLI::Option* o) {
      return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic instance");
    sim_sc.add_options(sim);
    opt(sim->add_option("--out", sim_out, "output file prefix"));
    opt(sim->add_option("--config", config_path, "flat JSON config file"));

    CLI::App* fitc = app.add_subcommand("fit", "fit one dataset from CSV");
    opt(fitc->add_option("dataset", ff.dataset, "dataset CSV (y,x1,...,xd)")
            ->required());
    opt(fitc->add_option("--out", ff.out, "output CSV for beta_hat"));
    opt(fitc->add_option("--lambda-o", ff.lambda_o, "Huber scale (default: MAD rule)"));
    opt(fitc->add_option("--lambda-s", ff.lambda_s, "l1 weight"));
    fitc->add_flag("--cv", ff.cv, "choose lambda_s by cross-validation");
    opt(fitc->add_option("--loss", ff.loss, "smooth loss")
            ->check(CLI::IsMember({"huber", "squared"})));
    opt(fitc->add_option("--seed", ff.seed, "seed for CV folds"));
    opt(fitc->add_option("--folds", ff.folds, "CV folds"));
    opt(fitc->add_option("--max-iter", ff.max_iter, "iteration cap"));
    opt(fitc->add_option("--tol-kkt", ff.tol_kkt, "KKT residual tolerance"));
    opt(fitc->add_option("--tol-obj", ff.tol_obj, "objective stall tolerance"));
    opt(fitc->add_option("--acceleration", ff.acceleration, "ista|fista_restart")
            ->check(CLI::IsMember({"ista", "fista_restart"})));
    opt(fitc->add_option("--step-rule", ff.step_rule, "fixed_lipschitz|backtracking")
            ->check(CLI::IsMember({"fixed_lipschitz", "backtracking"})));
    opt(fitc->add_option("--threads", ff.threads, "CV parallelism"));
    opt(fitc->add_option("--config", config_path, "flat JSON config file"));

    CLI::App* swc = app.add_subcommand("sweep", "Monte Carlo error sweep over n");
    swp_sc.add_options(swc);
    swp_cf.add_options(swc);
    opt(swc->add_option("--n-values", sw.n_values, "sample sizes, ascending")
            ->delimiter(','));
    opt(swc->add_option("--replicates", sw.replicates, "replicates per n"));
    opt(swc->add_option("--mode", sw.mode, "tuning mode")
            ->check(CLI::IsMember({"theory", "practical"})));
    opt(swc->add_option("--threads", sw.threads, "replicate parallelism"));
    opt(swc->add_option("--out", sw.out, "report CSV path"));
    swc->add_flag("--svg", sw.svg, "also write an SVG chart");
    opt(swc->add_option("--config", config_path, "flat JSON config file"));

    CLI::App* prc = app.add_subcommand("probe", "empirical process probes");
    prb_sc.add_options(prc);
    prb_cf.add_options(prc);
    opt(prc->add_option("--kind", pf.kind, "multiplier|curvature")
            ->check(CLI::IsMember({"multiplier", "curvature"})));
    opt(prc->add_option("--n-values", pf.n_values, "sample sizes (multiplier)")
            ->delimiter(','));
    opt(prc->add_option("--replicates", pf.replicates, "replicates per n (multiplier)"));
    opt(prc->add_option("--v-samples", pf.v_samples, "sampled directions (curvature)"));
    opt(prc->add_option("--threads", pf.threads, "replicate parallelism"));
    opt(prc->add_option("--out", pf.out, "report CSV path"));
    opt(prc->add_option("--config", config_path, "flat JSON config file"));

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? kExitOk : kExitUsage;
    }

    if (sim->parsed()) return run_simulate(sim_sc, sim_out);
    if (fitc->parsed()) return run_fit(ff);
    if (swc->parsed()) return run_sweep_cmd(swp_sc, swp_cf, sw);
    if (prc->parsed()) return run_probe(prb_sc, prb_cf, pf);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
