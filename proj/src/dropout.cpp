#include "tsk/dropout.hpp"

#include <algorithm>
#include <random>

namespace tsk {

namespace {

void fill_keep(std::vector<std::uint8_t>& keep, double keep_prob, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (auto& flag : keep) flag = uniform(rng) <= keep_prob ? 1 : 0;
}

void check_prob(double keep_prob) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "keep probability must be in (0, 1]");
}

}  // namespace

DropMask sample_rule_mask(std::size_t num_rules, double keep_prob, Rng& rng) {
  check_prob(keep_prob);
  DropMask mask;
  mask.variant = DropVariant::Rule;
  mask.keep.resize(num_rules);
  for (int attempt = 0; attempt <= kMaxRuleMaskRedraws; ++attempt) {
    fill_keep(mask.keep, keep_prob, rng);
    if (std::any_of(mask.keep.begin(), mask.keep.end(), [](auto f) { return f != 0; }))
      return mask;
  }
  std::fill(mask.keep.begin(), mask.keep.end(), std::uint8_t{1});
  return mask;
}

DropMask sample_mf_mask(std::size_t num_inputs, std::size_t mfs_per_input, double keep_prob,
                        Rng& rng) {
  check_prob(keep_prob);
  DropMask mask;
  mask.variant = DropVariant::MF;
  mask.keep.resize(num_inputs * mfs_per_input);
  fill_keep(mask.keep, keep_prob, rng);
  return mask;
}

DropMask sample_membership_mask(std::size_t num_rules, std::size_t num_inputs, double keep_prob,
                                Rng& rng) {
  check_prob(keep_prob);
  DropMask mask;
  mask.variant = DropVariant::Membership;
  mask.keep.resize(num_rules * num_inputs);
  fill_keep(mask.keep, keep_prob, rng);
  return mask;
}

DropMask sample_mask(DropVariant variant, const RuleGrid& grid, double keep_prob, Rng& rng) {
  switch (variant) {
    case DropVariant::Rule:
      return sample_rule_mask(grid.num_rules(), keep_prob, rng);
    case DropVariant::MF:
      return sample_mf_mask(grid.num_inputs(), grid.mfs_per_input(), keep_prob, rng);
    case DropVariant::Membership:
      return sample_membership_mask(grid.num_rules(), grid.num_inputs(), keep_prob, rng);
    case DropVariant::None:
      break;
  }
  return DropMask::none();
}

}  // namespace tsk
