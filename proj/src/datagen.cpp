#include "hubreg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hubreg/rng.hpp"

namespace hubreg {

void NoiseFamily::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ConfigError("NoiseFamily: sigma must be nonnegative and finite");
  if (kind == NoiseKind::student_t && !(df > 2.0))
    throw ConfigError("NoiseFamily: student_t requires df > 2");
}

void ScenarioSpec::validate() const {
  shape.validate();
  noise.validate();
  if (!(beta_magnitude > 0.0) || !std::isfinite(beta_magnitude))
    throw ConfigError("ScenarioSpec: beta_magnitude must be positive");
}

namespace {

double draw_covariate(rng::Engine& eng, CovariateKind kind) {
  switch (kind) {
    case CovariateKind::gaussian:
      return eng.normal();
    case CovariateKind::laplace_iid:
      // Laplace(0, 1/sqrt(2)) has unit variance.
      return eng.laplace(1.0 / std::sqrt(2.0));
    case CovariateKind::subweibull_half: {
      // sign * Exp(1)^2 has variance E[Exp^4] = 24.
      const double sign = eng.uniform01() < 0.5 ? -1.0 : 1.0;
      const double e = eng.exponential();
      return sign * e * e / std::sqrt(24.0);
    }
  }
  throw ConfigError("unknown covariate family");
}

double draw_noise(rng::Engine& eng, const NoiseFamily& family) {
  switch (family.kind) {
    case NoiseKind::gaussian:
      return family.sigma * eng.normal();
    case NoiseKind::laplace:
      return eng.laplace(family.sigma / std::sqrt(2.0));
    case NoiseKind::student_t:
      return family.sigma * eng.student_t_unit_variance(family.df);
  }
  throw ConfigError("unknown noise family");
}

std::vector<std::int64_t> support_permutation(std::uint64_t seed,
                                              std::int64_t d) {
  auto eng = rng::stream_engine(seed, rng::Stream::support);
  std::vector<std::int64_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::int64_t{0});
  for (std::int64_t i = d - 1; i > 0; --i) {
    const std::int64_t j = static_cast<std::int64_t>(
        eng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

Vector random_unit_direction(rng::Engine& eng, int dim) {
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int j = 0; j < dim; ++j) v[j] = eng.normal();
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

/// Smallest eta with mean exp(|z|/eta) <= 2, evaluated through log-sum-exp.
double empirical_psi1(const std::vector<double>& abs_z) {
  const std::int64_t m = static_cast<std::int64_t>(abs_z.size());
  const double max_a = *std::max_element(abs_z.begin(), abs_z.end());
  if (max_a == 0.0) return 0.0;

  const double log_target = std::log(2.0) + std::log(static_cast<double>(m));
  auto exceeds = [&](double eta) {
    const double shift = max_a / eta;
    double acc = 0.0;
    for (double a : abs_z) acc += std::exp(a / eta - shift);
    return shift + std::log(acc) > log_target;
  };

  double hi = max_a;  // exp(max/eta) <= 2m at eta = max/log(2m) <= max
  int doublings = 0;
  while (exceeds(hi)) {
    hi *= 2.0;
    if (++doublings > 200)
      throw DomainError("estimate_psi1_constant: bisection bracket diverged");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (exceeds(mid) ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

GeneratedInstance sample_instance(const ScenarioSpec& spec) {
  spec.validate();
  const auto n = spec.shape.n;
  const auto d = spec.shape.d;
  const auto s = spec.shape.s;

  GeneratedInstance out;
  out.data.X.resize(n, d);
  auto cov_eng = rng::stream_engine(spec.seed, rng::Stream::covariates);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      out.data.X(i, j) = draw_covariate(cov_eng, spec.covariates.kind);

  const auto perm = support_permutation(spec.seed, d);
  std::vector<std::int64_t> support(perm.begin(), perm.begin() + s);
  std::sort(support.begin(), support.end());

  auto sign_eng = rng::stream_engine(spec.seed, rng::Stream::signs);
  out.beta_star = Vector::Zero(d);
  for (std::int64_t k = 0; k < s; ++k) {
    double sign = 1.0;
    switch (spec.beta_sign_rule) {
      case SignRule::all_plus:
        break;
      case SignRule::alternating:
        sign = (k % 2 == 0) ? 1.0 : -1.0;
        break;
      case SignRule::random:
        sign = sign_eng.uniform01() < 0.5 ? -1.0 : 1.0;
        break;
    }
    out.beta_star[support[k]] = sign * spec.beta_magnitude;
  }

  out.xi = Vector::Zero(n);
  if (spec.noise.sigma > 0.0) {
    auto noise_eng = rng::stream_engine(spec.seed, rng::Stream::noise);
    for (std::int64_t i = 0; i < n; ++i)
      out.xi[i] = draw_noise(noise_eng, spec.noise);
  }

  out.data.y = out.data.X * out.beta_star + out.xi;
  return out;
}

Matrix empirical_second_moment(const Matrix& X) {
  if (X.rows() < 1 || X.cols() < 1)
    throw ShapeError("empirical_second_moment: empty matrix");
  if (!X.allFinite())
    throw DomainError("empirical_second_moment: non-finite entries");
  return (X.transpose() * X) / static_cast<double>(X.rows());
}

double estimate_psi1_constant(const CovariateFamily& family, int directions,
                              std::int64_t samples, std::uint64_t seed,
                              int dim) {
  if (directions < 1)
    throw ConfigError("estimate_psi1_constant: directions must be >= 1");
  if (samples < 1)
    throw ConfigError("estimate_psi1_constant: samples must be >= 1");
  if (dim < 1) throw ConfigError("estimate_psi1_constant: dim must be >= 1");

  auto dir_eng = rng::stream_engine(seed, rng::Stream::directions);
  auto cov_eng = rng::stream_engine(seed, rng::Stream::covariates);
  Vector x(dim);
  std::vector<double> abs_z(static_cast<std::size_t>(samples));

  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    Vector v = k == 0 ? Vector::Unit(dim, 0) : random_unit_direction(dir_eng, dim);
    for (std::int64_t i = 0; i < samples; ++i) {
      for (int j = 0; j < dim; ++j) x[j] = draw_covariate(cov_eng, family.kind);
      abs_z[static_cast<std::size_t>(i)] = std::abs(x.dot(v));
    }
    worst = std::max(worst, empirical_psi1(abs_z));
  }
  return worst;
}

MomentRatioReport moment_ratio_diagnostic(const CovariateFamily& family, int p,
                                          std::int64_t samples,
                                          std::uint64_t seed, int dim) {
  if (p < 4) throw DomainError("moment_ratio_diagnostic: requires p >= 4");
  if (samples < 1)
    throw ConfigError("moment_ratio_diagnostic: samples must be >= 1");

  constexpr int kDirections = 5;
  auto dir_eng = rng::stream_engine(seed, rng::Stream::directions);
  auto cov_eng = rng::stream_engine(seed, rng::Stream::covariates);
  Vector x(dim);

  double worst = 0.0;
  for (int k = 0; k < kDirections; ++k) {
    Vector v = k == 0 ? Vector::Unit(dim, 0) : random_unit_direction(dir_eng, dim);
    double acc = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
      for (int j = 0; j < dim; ++j) x[j] = draw_covariate(cov_eng, family.kind);
      acc += std::pow(std::abs(x.dot(v)), p);
    }
    worst = std::max(worst,
                     std::pow(acc / static_cast<double>(samples), 1.0 / p));
  }

  MomentRatioReport report;
  report.psi1_hat = estimate_psi1_constant(
      family, 3, std::min<std::int64_t>(samples, 100000),
      rng::mix(seed, 0x715), dim);
  report.ratio = worst;
  report.bound = 2.0 * report.psi1_hat * static_cast<double>(p);
  return report;
}

double default_subexp_constant(const CovariateFamily& family) {
  switch (family.kind) {
    case CovariateKind::gaussian:
      return 1.5;
    case CovariateKind::laplace_iid:
      return 2.0;
    case CovariateKind::subweibull_half:
      return 3.0;
  }
  throw ConfigError("unknown covariate family");
}

const char* to_string(CovariateKind kind) {
  switch (kind) {
    case CovariateKind::gaussian:
      return "gaussian";
    case CovariateKind::laplace_iid:
      return "laplace_iid";
    case CovariateKind::subweibull_half:
      return "subweibull_half";
  }
  return "?";
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian:
      return "gaussian";
    case NoiseKind::laplace:
      return "laplace";
    case NoiseKind::student_t:
      return "student_t";
  }
  return "?";
}

const char* to_string(SignRule rule) {
  switch (rule) {
    case SignRule::all_plus:
      return "all_plus";
    case SignRule::alternating:
      return "alternating";
    case SignRule::random:
      return "random";
  }
  return "?";
}

CovariateKind covariate_kind_from_string(const std::string& name) {
  if (name == "gaussian") return CovariateKind::gaussian;
  if (name == "laplace_iid") return CovariateKind::laplace_iid;
  if (name == "subweibull_half") return CovariateKind::subweibull_half;
  throw ConfigError("unknown covariate family: " + name);
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "laplace") return NoiseKind::laplace;
  if (name == "student_t") return NoiseKind::student_t;
  throw ConfigError("unknown noise family: " + name);
}

SignRule sign_rule_from_string(const std::string& name) {
  if (name == "all_plus") return SignRule::all_plus;
  if (name == "alternating") return SignRule::alternating;
  if (name == "random") return SignRule::random;
  throw ConfigError("unknown sign rule: " + name);
}

}  // namespace hubreg
