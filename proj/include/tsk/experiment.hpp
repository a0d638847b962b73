#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tsk/data.hpp"
#include "tsk/suite.hpp"

namespace tsk {

struct ExperimentSpec {
  std::filesystem::path data;
  TargetColumn target = std::string("y");
  std::vector<std::string> algorithms;  // empty: the seven defaults
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  /// "key=value" applies to every algorithm, "ALGO.key=value" to one.
  std::vector<std::string> overrides;
  bool save_models = false;
};

/// Applies one hyperparameter override. Keys: Mm, K, batch_size (N_bs), P,
/// alpha, lambda, beta1, beta2, epsilon, alpha_final, drop
/// (none|rule|mf|membership), lr (jang|adam|adabound). Throws InvalidArgument.
void apply_override(TrainConfig& config, const std::string& key, const std::string& value);

/// Resolves the algorithm list and applies the overrides.
std::vector<Algorithm> resolve_algorithms(const ExperimentSpec& spec);

/// Loads, preprocesses, runs the suite and writes
///   history_<algo>.csv, summary.csv, improvement_<algo>.csv (when MBGD ran)
/// into spec.out. Returns 0 on success; on failure prints the failing stage
/// (load / preprocess / train / write) to `err` and returns nonzero.
int run_experiment(const ExperimentSpec& spec, std::ostream& err);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
void write_summary_csv(const std::vector<AlgorithmResult>& results,
                       const std::filesystem::path& path);
void write_improvement_csv(std::span<const double> percent, const std::filesystem::path& path);

/// Decimal (non-exponent) rendering with at least 12 significant digits.
std::string format_decimal(double value);

/// Analytic-vs-finite-difference gradient agreement over random instances.
struct GradCheckReport {
  std::size_t num_inputs = 0;
  std::size_t mfs_per_input = 0;
  std::size_t trials = 0;
  double step = 1e-6;
  double max_relative_error = 0.0;
  double median_relative_error = 0.0;
  double max_absolute_error = 0.0;  // coordinates with |reference| < 1e-8
};

/// Random model, a batch of 4 standard-normal examples and lambda alternating
/// between 0 and 0.05 by trial. Throws GridTooLarge when Mm^M > 1024.
GradCheckReport gradient_check(std::size_t num_inputs, std::size_t mfs_per_input,
                               std::size_t trials, std::uint64_t seed, double step = 1e-6);

void write_grad_check_report(const GradCheckReport& report, const std::filesystem::path& path);

struct GradientInstance {
  TskModel model;
  Dataset batch;
  double lambda = 0.0;
};
GradientInstance random_gradient_instance(std::size_t num_inputs, std::size_t mfs_per_input,
                                          std::size_t batch_size, double lambda, Rng& rng);

inline constexpr std::size_t kMaxGradCheckRules = 1024;

}  // namespace tsk
