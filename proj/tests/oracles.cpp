#include "oracles.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "hubreg/huber.hpp"
#include "hubreg/rng.hpp"
#include "hubreg/solver.hpp"

namespace oracle {

using hubreg::Dataset;
using hubreg::Index;
using hubreg::Matrix;
using hubreg::PenaltyConfig;
using hubreg::Vector;

Vector finite_difference_gradient(const Vector& beta, const Dataset& data,
                                  const PenaltyConfig& cfg, double step) {
  Vector g(beta.size());
  Vector probe = beta;
  for (Index j = 0; j < beta.size(); ++j) {
    probe[j] = beta[j] + step;
    const double up = hubreg::objective(probe, data, cfg).smooth;
    probe[j] = beta[j] - step;
    const double down = hubreg::objective(probe, data, cfg).smooth;
    probe[j] = beta[j];
    g[j] = (up - down) / (2.0 * step);
  }
  return g;
}

long double rate_ds_ld(long long n, long long d, long long s) {
  const long double lg = logl(static_cast<long double>(d)) -
                         logl(static_cast<long double>(s));
  return sqrtl(lg * static_cast<long double>(s) / static_cast<long double>(n));
}

long double rate_delta_ld(long long n, long double delta) {
  return sqrtl(-logl(delta) / static_cast<long double>(n));
}

long double lambda_o_ld(long double sigma, long double L, long long n) {
  return 576.0L * sigma * L * L / sqrtl(static_cast<long double>(n));
}

long double lambda_s_ld(long double c_s, long double L, long double delta,
                        long long n, long long d, long long s,
                        long double lambda_o) {
  const long double rates = rate_ds_ld(n, d, s) + rate_delta_ld(n, delta);
  return c_s * lambda_o * sqrtl(static_cast<long double>(n)) * L * rates /
         sqrtl(static_cast<long double>(s));
}

RadiiLd radii_ld(long double c1, long double c2, long double c_s,
                 long double L, long double delta, long long n, long long d,
                 long long s, long double lambda_o) {
  RadiiLd out;
  out.r_ds = rate_ds_ld(n, d, s);
  out.r_delta = rate_delta_ld(n, delta);
  out.r_2 = 5.0L * L * lambda_o * sqrtl(static_cast<long double>(n)) *
            (c1 + c2 + c_s) * (out.r_ds + out.r_delta);
  out.r_1 = 3.0L * sqrtl(static_cast<long double>(s)) * out.r_2;
  return out;
}

Vector orthogonal_design_solution(const Vector& y, double c, double lambda_s) {
  const double n = static_cast<double>(y.size());
  Vector beta(y.size());
  for (Index i = 0; i < y.size(); ++i)
    beta[i] = hubreg::soft_threshold(y[i] / c, n * lambda_s / (c * c));
  return beta;
}

double support_function_oracle(const Vector& g, double r1, double r2) {
  const Index d = g.size();
  std::vector<double> a(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) a[static_cast<std::size_t>(i)] = std::abs(g[i]);
  std::sort(a.begin(), a.end(), std::greater<double>());
  if (a.empty() || a.front() == 0.0) return 0.0;

  double best = 0.0;

  // l1 constraint slack: v proportional to g on the l2 sphere.
  {
    double l1 = 0.0, l2sq = 0.0;
    for (const double ai : a) {
      l1 += ai;
      l2sq += ai * ai;
    }
    const double l2 = std::sqrt(l2sq);
    if (r2 * l1 / l2 <= r1 * (1.0 + 1e-12)) best = std::max(best, r2 * l2);
  }

  // Equal mass on the top-m magnitudes (l2 slack / tie corners).
  {
    double t1 = 0.0;
    for (std::size_t m = 1; m <= a.size(); ++m) {
      t1 += a[m - 1];
      const double t = std::min(r1 / static_cast<double>(m),
                                r2 / std::sqrt(static_cast<double>(m)));
      best = std::max(best, t * t1);
    }
  }

  // Both constraints active on a top-k support: the stationarity system
  //   v_i = (a_i - mu)/(2 nu),  sum v = r1,  sum v^2 = r2^2
  // reduces to  k(1 - rho k) mu^2 - 2 T1 (1 - rho k) mu + (T2 - rho T1^2) = 0
  // with rho = (r2/r1)^2.
  {
    const double rho = (r2 / r1) * (r2 / r1);
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t k = 1; k <= a.size(); ++k) {
      t1 += a[k - 1];
      t2 += a[k - 1] * a[k - 1];
      const double kk = static_cast<double>(k);
      const double fac = 1.0 - rho * kk;
      if (std::abs(fac) < 1e-14) continue;  // degenerate; tie loop covers it
      const double A = kk * fac;
      const double B = -2.0 * t1 * fac;
      const double C = t2 - rho * t1 * t1;
      const double disc = B * B - 4.0 * A * C;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      for (const double mu : {(-B + sq) / (2.0 * A), (-B - sq) / (2.0 * A)}) {
        const double next = k < a.size() ? a[k] : 0.0;
        const double tol = 1e-12 * a.front();
        if (!(mu >= -tol && mu >= next - tol && mu <= a[k - 1] + tol)) continue;
        const double s1 = t1 - kk * mu;
        if (s1 <= 0.0) continue;
        const double nu = s1 / (2.0 * r1);
        double value = 0.0, norm2 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const double vi = std::max(a[i] - mu, 0.0) / (2.0 * nu);
          value += a[i] * vi;
          norm2 += vi * vi;
        }
        if (norm2 > r2 * r2 * (1.0 + 1e-9)) continue;
        best = std::max(best, value);
      }
    }
  }
  return best;
}

double spectral_sq_oracle(const Matrix& X) {
  Eigen::JacobiSVD<Matrix> svd(X);
  const double s = svd.singularValues()(0);
  return s * s;
}

Dataset random_dataset(std::uint64_t seed, Index n, Index d, double y_scale) {
  auto eng = hubreg::rng::Engine(seed);
  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) data.X(i, j) = eng.normal();
  for (Index i = 0; i < n; ++i) data.y[i] = y_scale * eng.normal();
  return data;
}

Vector random_vector(std::uint64_t seed, Index d) {
  auto eng = hubreg::rng::Engine(seed);
  Vector v(d);
  for (Index j = 0; j < d; ++j) v[j] = eng.normal();
  return v;
}

}  // namespace oracle
