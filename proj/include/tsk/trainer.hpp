#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsk/data.hpp"
#include "tsk/model.hpp"
#include "tsk/optim.hpp"

namespace tsk {

enum class LrScheme { FixedJang, Adam, AdaBound };

/// Defaults are the MBGD-RDA settings: Mm=2, batch 64, 500 iterations,
/// alpha=0.01, lambda=0.05, DropRule with P=0.5 and AdaBound.
struct TrainConfig {
  std::size_t mfs_per_input = 2;
  std::size_t iterations = 500;
  std::size_t batch_size = 64;
  double keep_prob = 0.5;
  double alpha = 0.01;
  double lambda = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double alpha_final = 0.01;
  DropVariant drop = DropVariant::Rule;
  LrScheme lr_scheme = LrScheme::AdaBound;
  std::uint64_t seed = 0;

  AdaBoundHyper hyper() const { return {alpha, beta1, beta2, epsilon, alpha_final}; }
};

/// One entry per iteration. lr_lower/lr_upper are the clipping bounds in
/// force at that iteration (0 and +inf when the scheme is unbounded);
/// min_lr/max_lr are the extreme realized per-coordinate rates.
struct TrainHistory {
  std::vector<double> train_rmse;
  std::vector<double> test_rmse;
  std::vector<double> loss;
  std::vector<double> mean_lr;
  std::vector<double> min_lr;
  std::vector<double> max_lr;
  std::vector<double> lr_lower;
  std::vector<double> lr_upper;
  double seconds = 0.0;

  std::size_t size() const { return test_rmse.size(); }
  void reserve(std::size_t n);
};

struct TrainResult {
  TskModel model;
  TrainHistory history;
};

/// Mini-batch training of a freshly initialized TSK model.
///
/// Each iteration draws a batch without replacement, one drop mask per
/// example, takes the summed masked gradient plus lambda * b on non-bias
/// consequents, applies the configured step and floors the sigmas. Batches
/// and masks come from two separate streams seeded from config.seed, so a
/// run without drop draws exactly the same batches as a run with drop.
/// The final model is returned, not the best one.
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set);

/// sqrt(mean squared residual). Throws EmptyDataset.
double rmse(const TskModel& model, const Dataset& data);

/// 100 * (baseline - other) / baseline, element-wise. Throws ZeroBaseline
/// and LengthMismatch.
std::vector<double> percent_improvement(std::span<const double> baseline,
                                        std::span<const double> other);

}  // namespace tsk
