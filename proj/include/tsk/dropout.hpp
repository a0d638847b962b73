#pragma once

#include <cstddef>

#include "tsk/data.hpp"
#include "tsk/model.hpp"

namespace tsk {

// Each slot draws p ~ U[0, 1) and is kept when p <= keep_prob.

/// Keep each rule with probability keep_prob. A mask that would drop every
/// rule is redrawn up to kMaxRuleMaskRedraws times, then replaced by all-keep.
DropMask sample_rule_mask(std::size_t num_rules, double keep_prob, Rng& rng);

/// Keep each of the M x Mm input MFs with probability keep_prob.
DropMask sample_mf_mask(std::size_t num_inputs, std::size_t mfs_per_input, double keep_prob,
                        Rng& rng);

/// Keep each (rule, input) membership slot with probability keep_prob.
DropMask sample_membership_mask(std::size_t num_rules, std::size_t num_inputs, double keep_prob,
                                Rng& rng);

/// Dispatches on `variant`; None consumes no random numbers.
DropMask sample_mask(DropVariant variant, const RuleGrid& grid, double keep_prob, Rng& rng);

inline constexpr int kMaxRuleMaskRedraws = 16;

}  // namespace tsk
