#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace hubreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A matrix/vector dimension disagreement.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite or out-of-range numeric input.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration (fold counts, family parameters, file contents, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tuning parameters of the penalized Huber program: lambda_o sets the Huber
/// scale (the effective residual threshold is lambda_o * sqrt(n)); lambda_s
/// weights the l1 penalty.
struct PenaltyConfig {
  double lambda_o = 1.0;
  double lambda_s = 0.0;

  void validate() const;
};

/// Observed sample: rows of X are covariate vectors, y the responses.
struct Dataset {
  Matrix X;
  Vector y;

  Index n() const { return X.rows(); }
  Index d() const { return X.cols(); }

  void validate() const;
};

struct ObjectiveValue {
  double smooth = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

}  // namespace hubreg
