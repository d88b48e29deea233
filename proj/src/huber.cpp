#include "hubreg/huber.hpp"

#include <algorithm>
#include <cmath>

namespace hubreg {

void PenaltyConfig::validate() const {
  if (!(lambda_o > 0.0) || !std::isfinite(lambda_o))
    throw DomainError("PenaltyConfig: lambda_o must be positive and finite");
  if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s))
    throw DomainError("PenaltyConfig: lambda_s must be nonnegative and finite");
}

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1)
    throw ShapeError("Dataset: X must be at least 1x1");
  if (y.size() != X.rows())
    throw ShapeError("Dataset: y has " + std::to_string(y.size()) +
                     " entries but X has " + std::to_string(X.rows()) + " rows");
  if (!X.allFinite() || !y.allFinite())
    throw DomainError("Dataset: entries must be finite");
}

double huber_loss(double t) {
  if (!std::isfinite(t)) throw DomainError("huber_loss: non-finite input");
  const double a = std::abs(t);
  return a <= 1.0 ? 0.5 * t * t : a - 0.5;
}

double huber_score(double t) {
  if (!std::isfinite(t)) throw DomainError("huber_score: non-finite input");
  return std::clamp(t, -1.0, 1.0);
}

namespace {

void check_dims(const Vector& beta, const Dataset& data) {
  if (beta.size() != data.d())
    throw ShapeError("beta has " + std::to_string(beta.size()) +
                     " entries but X has " + std::to_string(data.d()) +
                     " columns");
}

}  // namespace

ObjectiveValue objective(const Vector& beta, const Dataset& data,
                         const PenaltyConfig& cfg) {
  check_dims(beta, data);
  cfg.validate();
  const double scale = cfg.lambda_o * std::sqrt(static_cast<double>(data.n()));
  const Vector u = (data.y - data.X * beta) / scale;
  double smooth = 0.0;
  for (Index i = 0; i < u.size(); ++i) smooth += huber_loss(u[i]);
  smooth *= cfg.lambda_o * cfg.lambda_o;
  ObjectiveValue out;
  out.smooth = smooth;
  out.penalty = cfg.lambda_s * beta.lpNorm<1>();
  out.total = out.smooth + out.penalty;
  return out;
}

Vector gradient_smooth(const Vector& beta, const Dataset& data,
                       const PenaltyConfig& cfg) {
  check_dims(beta, data);
  cfg.validate();
  const double sqrt_n = std::sqrt(static_cast<double>(data.n()));
  const double scale = cfg.lambda_o * sqrt_n;
  Vector score = (data.y - data.X * beta) / scale;
  for (Index i = 0; i < score.size(); ++i) score[i] = huber_score(score[i]);
  return -(cfg.lambda_o / sqrt_n) * (data.X.transpose() * score);
}

}  // namespace hubreg
