#include "tsk/optim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "tsk/error.hpp"

namespace tsk {

std::vector<double> sgd_step(std::span<const double> theta, std::span<const double> g,
                             double alpha) {
  if (theta.size() != g.size())
    throw Error(ErrorKind::LengthMismatch, "theta has " + std::to_string(theta.size()) +
                                               " entries, gradient " + std::to_string(g.size()));
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - alpha * g[i];
  return out;
}

JangLrState::JangLrState(double alpha, double grow, double shrink)
    : alpha_(alpha), grow_(grow), shrink_(shrink) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be > 0");
  window_.reserve(5);
}

double JangLrState::update(double new_loss) {
  if (!std::isfinite(new_loss))
    throw Error(ErrorKind::InvalidArgument, "non-finite loss fed to learning-rate rule");
  if (window_.size() == 5) window_.erase(window_.begin());
  window_.push_back(new_loss);
  if (window_.size() < 5) return alpha_;

  // Transition t compares window_[t+1] with window_[t].
  auto down = [&](std::size_t t) { return window_[t + 1] < window_[t]; };
  auto up = [&](std::size_t t) { return window_[t + 1] > window_[t]; };

  bool fired = false;
  if (down(0) && down(1) && down(2) && down(3)) {
    alpha_ *= grow_;
    fired = true;
  } else if (up(0) && down(1) && up(2) && down(3)) {
    alpha_ *= shrink_;
    fired = true;
  }
  if (fired) window_.assign(1, new_loss);
  return alpha_;
}

double bound_lower(std::uint64_t k, double beta2, double alpha_final) {
  if (k == 0) return 0.0;
  return alpha_final - alpha_final / ((1.0 - beta2) * static_cast<double>(k) + 1.0);
}

double bound_upper(std::uint64_t k, double beta2, double alpha_final) {
  if (k == 0) return std::numeric_limits<double>::infinity();
  return alpha_final + alpha_final / ((1.0 - beta2) * static_cast<double>(k));
}

LrBounds adabound_bounds(std::uint64_t k, const AdaBoundHyper& hyper) {
  return {bound_lower(k, hyper.beta2, hyper.alpha_final),
          bound_upper(k, hyper.beta2, hyper.alpha_final)};
}

StepRates adabound_step(MomentState& state, std::span<double> theta, std::span<const double> g,
                        const AdaBoundHyper& hyper, LrBounds bounds) {
  const std::size_t n = theta.size();
  if (g.size() != n || state.m.size() != n || state.v.size() != n)
    throw Error(ErrorKind::LengthMismatch, "theta, gradient and moment sizes differ");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(g[i]))
      throw Error(ErrorKind::NonFiniteGradient,
                  "gradient entry " + std::to_string(i) + " is " + std::to_string(g[i]));

  state.k += 1;
  const double k = static_cast<double>(state.k);
  const double c1 = 1.0 - std::pow(hyper.beta1, k);
  const double c2 = 1.0 - std::pow(hyper.beta2, k);

  StepRates rates;
  rates.min = std::numeric_limits<double>::infinity();
  rates.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    const double rate =
        std::max(bounds.lower, std::min(bounds.upper, hyper.alpha / (std::sqrt(v_hat) + hyper.epsilon)));
    assert(rate >= bounds.lower && rate <= bounds.upper);
    theta[i] -= rate * m_hat;
    sum += rate;
    rates.min = std::min(rates.min, rate);
    rates.max = std::max(rates.max, rate);
  }
  rates.mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
  if (n == 0) rates.min = rates.max = 0.0;
  return rates;
}

}  // namespace tsk
