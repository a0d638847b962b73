#pragma once

#include <span>
#include <vector>

#include "tsk/model.hpp"

namespace tsk::detail {

// Scratch for one forward pass; reused across examples to avoid allocation.
struct ForwardPass {
  std::vector<double> grades;    // [M x Mm]
  std::vector<double> firing;    // [R], masked
  std::vector<double> rule_out;  // [R]
  std::vector<double> weights;   // [R], normalized firing (or fallback weights)
  double firing_sum = 0.0;
  double output = 0.0;
  bool degenerate = false;
};

inline bool rule_kept(const DropMask& mask, std::size_t rule) {
  return mask.variant != DropVariant::Rule || mask.keep[rule] != 0;
}

// True when the grade of (rule, input) enters the firing level, i.e. it was
// not replaced by 1 through an MF or membership drop.
inline bool slot_used(const DropMask& mask, const RuleGrid& grid, std::size_t rule,
                      std::size_t input) {
  switch (mask.variant) {
    case DropVariant::MF:
      return mask.keep[input * grid.mfs_per_input() + grid.antecedent(rule, input)] != 0;
    case DropVariant::Membership:
      return mask.keep[rule * grid.num_inputs() + input] != 0;
    default:
      return true;
  }
}

void forward(const TskModel& model, std::span<const double> x, const DropMask& mask,
             ForwardPass& pass);

}  // namespace tsk::detail
