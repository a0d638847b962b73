#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace tsk {

/// theta - alpha * g, element-wise. Throws LengthMismatch.
std::vector<double> sgd_step(std::span<const double> theta, std::span<const double> g,
                             double alpha);

/// Global learning rate adapted by the ANFIS heuristic: x1.1 after four
/// successive loss decreases, x0.9 after two successive increase-then-decrease
/// pairs. The pattern window restarts from the latest loss after either fires.
class JangLrState {
 public:
  explicit JangLrState(double alpha, double grow = 1.1, double shrink = 0.9);

  double alpha() const { return alpha_; }
  /// Feeds the newest loss and returns the (possibly updated) rate.
  double update(double new_loss);

 private:
  double alpha_;
  double grow_;
  double shrink_;
  std::vector<double> window_;
};

struct AdaBoundHyper {
  double alpha = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double alpha_final = 0.01;
};

struct LrBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  static LrBounds unbounded() { return {}; }
};

/// l(k) = a - a / ((1 - beta2) k + 1); l(0) = 0.
double bound_lower(std::uint64_t k, double beta2, double alpha_final);
/// u(k) = a + a / ((1 - beta2) k); u(0) = +inf.
double bound_upper(std::uint64_t k, double beta2, double alpha_final);
LrBounds adabound_bounds(std::uint64_t k, const AdaBoundHyper& hyper);

struct MomentState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t k = 0;

  explicit MomentState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

/// Realized per-coordinate rates of one step.
struct StepRates {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// One AdaBound step in place. `bounds` must be for the post-increment k
/// (pass adabound_bounds(state.k + 1, hyper), or LrBounds::unbounded() for
/// Adam). Throws LengthMismatch and NonFiniteGradient.
StepRates adabound_step(MomentState& state, std::span<double> theta, std::span<const double> g,
                        const AdaBoundHyper& hyper, LrBounds bounds);

}  // namespace tsk
