#include "hubreg/rng.hpp"

#include <numbers>

namespace hubreg::rng {

double Engine::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Engine::laplace(double scale) {
  const double u = uniform01() - 0.5;
  const double sign = (u < 0.0) ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

double Engine::gamma(double shape) {
  // Marsaglia & Tsang (2000); valid for shape >= 1.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Engine::student_t_unit_variance(double df) {
  const double z = normal();
  const double chi2 = 2.0 * gamma(df / 2.0);
  const double t = z / std::sqrt(chi2 / df);
  return t * std::sqrt((df - 2.0) / df);
}

std::uint64_t Engine::below(std::uint64_t bound) {
  // Discard the low residue class so the remaining range is a multiple of bound.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t r;
  do {
    r = gen_();
  } while (r < threshold);
  return r % bound;
}

}  // namespace hubreg::rng
