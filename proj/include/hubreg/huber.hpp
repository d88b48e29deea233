#pragma once

#include "hubreg/types.hpp"

namespace hubreg {

/// Huber loss: t^2/2 on |t| <= 1, |t| - 1/2 outside. Throws DomainError on
/// non-finite input.
double huber_loss(double t);

/// Derivative of huber_loss: t clamped to [-1, 1].
double huber_score(double t);

/// Penalized objective
///   sum_i lambda_o^2 * H((y_i - x_i'beta) / (lambda_o sqrt(n))) + lambda_s ||beta||_1.
/// The smooth term is evaluated in the scaled residual u_i = r_i/(lambda_o sqrt(n))
/// so large lambda_o never overflows.
ObjectiveValue objective(const Vector& beta, const Dataset& data,
                         const PenaltyConfig& cfg);

/// Gradient of the smooth term: -(lambda_o/sqrt(n)) * sum_i h(u_i) x_i.
Vector gradient_smooth(const Vector& beta, const Dataset& data,
                       const PenaltyConfig& cfg);

}  // namespace hubreg
