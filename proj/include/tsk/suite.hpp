#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsk/data.hpp"
#include "tsk/trainer.hpp"

namespace tsk {

/// A named training configuration. Ridge entries use only config.lambda.
struct Algorithm {
  std::string name;
  bool ridge = false;
  TrainConfig config;
};

/// RR, MBGD, MBGD-R, MBGD-D, MBGD-RD, MBGD-A, MBGD-RDA.
std::vector<Algorithm> default_algorithms();

/// The seven defaults plus MBGD-RDA-MF, MBGD-RDA-Membership and MBGD-RD-Adam.
std::vector<Algorithm> known_algorithms();

/// Throws InvalidArgument for an unknown name.
Algorithm algorithm_by_name(std::string_view name);

struct AlgorithmResult {
  std::string name;
  bool ridge = false;
  TrainHistory mean_history;            // empty for ridge
  std::vector<double> ridge_test_rmse;  // one per repeat, ridge only
  double mean_seconds = 0.0;
  std::optional<TskModel> first_model;  // model of repeat 0, if requested

  /// Mean test RMSE of ridge, or the minimum of the mean test curve.
  double best_test_rmse() const;
  /// 1-based iteration of the best mean test RMSE; 0 for ridge.
  std::size_t best_iter() const;
  double mean_final_test_rmse() const;
};

struct SuiteOptions {
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t max_dims = kMaxInputDims;
  double train_ratio = 0.7;
  bool keep_first_models = false;
};

/// Runs every algorithm on `repeats` fresh splits of `raw`. Each repeat draws
/// its own split, fits the preprocessor on the training part only and runs all
/// algorithms on that identical split with the same run seed. Histories are
/// averaged point-wise over repeats.
std::vector<AlgorithmResult> run_suite(const std::vector<Algorithm>& algorithms,
                                       const Dataset& raw, const SuiteOptions& options);

/// Point-wise mean of equally long histories (seconds averaged too).
TrainHistory mean_history(std::span<const TrainHistory> runs);

}  // namespace tsk
