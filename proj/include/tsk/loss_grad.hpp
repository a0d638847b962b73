#pragma once

#include <span>
#include <vector>

#include "tsk/data.hpp"
#include "tsk/model.hpp"

namespace tsk {

/// Flat gradient, index-aligned with TskModel::flatten().
using GradientVector = std::vector<double>;

/// 1/2 sum_n (y_n - y(x_n))^2 + lambda/2 sum_r sum_{m>=1} b_{r,m}^2 over
/// `rows` of `data`. Biases b_{r,0} are not penalized. Throws EmptyBatch.
double loss(const TskModel& model, const Dataset& data, std::span<const std::size_t> rows,
            double lambda);
double loss(const TskModel& model, const Dataset& data, double lambda);

/// Loss with a training-time drop mask per example (masks[k] goes with rows[k]).
double masked_loss(const TskModel& model, const Dataset& data, std::span<const std::size_t> rows,
                   std::span<const DropMask> masks, double lambda);

/// Penalty term alone: lambda/2 * sum of squared non-bias consequents.
double penalty(const TskModel& model, double lambda);

/// Analytic gradient of the summed batch loss.
///
/// Firing levels are the masked ones. A parameter that does not take part in
/// y(x_n) for example n (consequents of a dropped rule, an MF grade replaced
/// by 1) gets no contribution from that example. The lambda * b_{r,m} term is
/// added once for every non-bias consequent regardless of masks. An empty
/// `masks` span means no masks. Throws MaskShapeMismatch, EmptyBatch.
GradientVector gradients(const TskModel& model, const Dataset& data,
                         std::span<const std::size_t> rows, double lambda,
                         std::span<const DropMask> masks = {});

/// Batch loss and gradient from a single forward pass per example.
struct LossAndGradient {
  double loss = 0.0;
  GradientVector gradient;
};
LossAndGradient loss_and_gradients(const TskModel& model, const Dataset& data,
                                   std::span<const std::size_t> rows, double lambda,
                                   std::span<const DropMask> masks = {});

/// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h of the
/// unmasked loss, coordinate by coordinate. Verification oracle: the loss is
/// re-evaluated from the model equations in long double, so cancellation in
/// the difference does not swamp small gradient entries.
GradientVector finite_diff_grad(const TskModel& model, const Dataset& data,
                                std::span<const std::size_t> rows, double lambda, double h);

/// Coordinate-wise comparison against a reference gradient. Coordinates with
/// |reference| >= abs_floor are compared relatively (|a - r| / |r|), the rest
/// absolutely.
struct GradientComparison {
  double max_relative = 0.0;
  double max_absolute = 0.0;  // over the small-reference coordinates only
  std::vector<double> relative;

  bool within(double rel_tol, double abs_tol) const {
    return max_relative <= rel_tol && max_absolute <= abs_tol;
  }
};
GradientComparison compare_gradients(std::span<const double> analytic,
                                     std::span<const double> reference,
                                     double abs_floor = 1e-8);

}  // namespace tsk
