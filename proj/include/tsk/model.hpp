#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tsk/error.hpp"

namespace tsk {

// Floor applied to every MF width after an update (normalized feature units).
inline constexpr double kSigmaMin = 1e-4;

struct GaussianMF {
  double center = 0.0;
  double sigma = 1.0;
};

/// Membership grade exp(-(x - c)^2 / (2 sigma^2)).
double membership(const GaussianMF& mf, double x);

/// Full grid partition: every combination of one MF per input is a rule.
///
/// Rules are numbered in mixed radix with the first input as the most
/// significant digit, so for M=2, Mm=2 the rules are (0,0), (0,1), (1,0), (1,1).
class RuleGrid {
 public:
  RuleGrid(std::size_t num_inputs, std::size_t mfs_per_input);

  std::size_t num_inputs() const { return num_inputs_; }
  std::size_t mfs_per_input() const { return mfs_per_input_; }
  std::size_t num_rules() const { return num_rules_; }

  /// MF index used by `rule` for input `input`.
  std::size_t antecedent(std::size_t rule, std::size_t input) const {
    return antecedents_[rule * num_inputs_ + input];
  }

  /// Rules whose antecedent for `input` is MF `mf` (the set Phi(m, i)).
  std::vector<std::size_t> rules_using(std::size_t input, std::size_t mf) const;

  friend bool operator==(const RuleGrid&, const RuleGrid&) = default;

 private:
  std::size_t num_inputs_;
  std::size_t mfs_per_input_;
  std::size_t num_rules_;
  std::vector<std::uint32_t> antecedents_;
};

/// 2*M*Mm + (M+1)*Mm^M. Throws Error(Overflow) if it does not fit in size_t.
std::size_t param_count(std::size_t num_inputs, std::size_t mfs_per_input);

enum class DropVariant { None, Rule, MF, Membership };

/// Per-example keep flags. Layout depends on the variant:
///   Rule:       [R]
///   MF:         [M x Mm], input-major
///   Membership: [R x M], rule-major
struct DropMask {
  DropVariant variant = DropVariant::None;
  std::vector<std::uint8_t> keep;

  static DropMask none() { return {}; }
  static DropMask all_keep(DropVariant variant, const RuleGrid& grid);

  /// Throws MaskShapeMismatch if `keep` has the wrong size for `grid`.
  void check_shape(const RuleGrid& grid) const;
};

/// Grid-partition TSK system with shared Gaussian MFs.
///
/// Parameters are stored flat in the order used by every optimizer and
/// checkpoint: all centers (input-major, MF-minor), then all sigmas in the
/// same order, then consequents (rule-major, coefficient 0..M minor, where
/// coefficient 0 is the bias).
class TskModel {
 public:
  TskModel(std::size_t num_inputs, std::size_t mfs_per_input);
  /// Rebuilds a model from a flat parameter vector. Throws LengthMismatch.
  static TskModel unflatten(std::size_t num_inputs, std::size_t mfs_per_input,
                            std::span<const double> theta);

  const RuleGrid& grid() const { return grid_; }
  std::size_t num_inputs() const { return grid_.num_inputs(); }
  std::size_t mfs_per_input() const { return grid_.mfs_per_input(); }
  std::size_t num_rules() const { return grid_.num_rules(); }
  std::size_t size() const { return theta_.size(); }

  GaussianMF mf(std::size_t input, std::size_t i) const {
    return {theta_[center_index(input, i)], theta_[sigma_index(input, i)]};
  }
  void set_mf(std::size_t input, std::size_t i, GaussianMF mf);

  double consequent(std::size_t rule, std::size_t coef) const {
    return theta_[consequent_index(rule, coef)];
  }
  double& consequent(std::size_t rule, std::size_t coef) {
    return theta_[consequent_index(rule, coef)];
  }

  std::size_t center_index(std::size_t input, std::size_t i) const {
    return input * mfs_per_input() + i;
  }
  std::size_t sigma_index(std::size_t input, std::size_t i) const {
    return num_inputs() * mfs_per_input() + center_index(input, i);
  }
  std::size_t consequent_index(std::size_t rule, std::size_t coef) const {
    return 2 * num_inputs() * mfs_per_input() + rule * (num_inputs() + 1) + coef;
  }
  std::size_t consequent_offset() const { return consequent_index(0, 0); }

  std::span<const double> flatten() const { return theta_; }
  /// Mutable view for optimizers. Call clamp_sigmas() after writing.
  std::span<double> parameters() { return theta_; }
  void clamp_sigmas();

  /// Output of rule r: b_{r,0} + sum_m b_{r,m} x_m.
  double rule_output(std::size_t rule, std::span<const double> x) const;

  friend bool operator==(const TskModel&, const TskModel&) = default;

 private:
  RuleGrid grid_;
  std::vector<double> theta_;
};

/// Firing levels with the drop semantics of `mask` applied.
std::vector<double> firing_levels(const TskModel& model, std::span<const double> x,
                                  const DropMask& mask = DropMask::none());

/// Firing-level weighted average of the rule outputs, no drop. If every firing
/// level underflows to zero the unweighted mean of the rule outputs is used.
double predict(const TskModel& model, std::span<const double> x);

/// Same weighted average but with a training-time drop mask.
double predict_masked(const TskModel& model, std::span<const double> x, const DropMask& mask);

struct FeatureStats {
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;
};

/// Centers evenly spaced over [min, max] (endpoints inclusive), sigmas equal
/// to the feature std, consequents zero. Throws ConstantFeature.
TskModel init_model(std::span<const FeatureStats> stats, std::size_t mfs_per_input);

/// Text checkpoint: "M=<int>", "Mm=<int>", then one parameter per line.
void save_checkpoint(const TskModel& model, const std::filesystem::path& path);
TskModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tsk
