#include "tsk/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "tsk/dropout.hpp"
#include "tsk/loss_grad.hpp"

namespace tsk {

void TrainHistory::reserve(std::size_t n) {
  for (auto* v : {&train_rmse, &test_rmse, &loss, &mean_lr, &min_lr, &max_lr, &lr_lower, &lr_upper})
    v->reserve(n);
}

double rmse(const TskModel& model, const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "cannot compute RMSE of no examples");
  double sse = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double e = data.y[static_cast<Eigen::Index>(n)] - predict(model, data.row(n));
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(data.size()));
}

std::vector<double> percent_improvement(std::span<const double> baseline,
                                        std::span<const double> other) {
  if (baseline.size() != other.size())
    throw Error(ErrorKind::LengthMismatch, "curves have different lengths");
  std::vector<double> out(baseline.size());
  for (std::size_t k = 0; k < baseline.size(); ++k) {
    if (!(baseline[k] > 0.0))
      throw Error(ErrorKind::ZeroBaseline, "baseline RMSE at index " + std::to_string(k) +
                                               " is not positive");
    out[k] = 100.0 * (baseline[k] - other[k]) / baseline[k];
  }
  return out;
}

namespace {

void validate(const TrainConfig& c) {
  if (c.mfs_per_input == 0) throw Error(ErrorKind::InvalidArgument, "Mm must be >= 1");
  if (c.batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
  if (!(c.alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be > 0");
  if (!(c.lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0))
    throw Error(ErrorKind::InvalidArgument, "beta1 and beta2 must be in [0, 1)");
  if (!(c.epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
  if (!(c.alpha_final > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha_final must be > 0");
  if (c.drop != DropVariant::None && !(c.keep_prob > 0.0 && c.keep_prob <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "P must be in (0, 1]");
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set) {
  validate(config);
  if (train_set.size() == 0) throw Error(ErrorKind::EmptyTrainingSet, "training set is empty");
  if (test_set.size() == 0) throw Error(ErrorKind::EmptyDataset, "test set is empty");
  if (test_set.num_features() != train_set.num_features())
    throw Error(ErrorKind::DimensionMismatch, "train and test feature counts differ");

  const auto start = std::chrono::steady_clock::now();
  const auto stats = train_set.feature_stats();
  TrainResult result{init_model(stats, config.mfs_per_input), {}};
  TskModel& model = result.model;
  TrainHistory& history = result.history;
  history.reserve(config.iterations);

  std::seed_seq batch_seed{config.seed, std::uint64_t{0x6261746368}};
  std::seed_seq mask_seed{config.seed, std::uint64_t{0x6d61736b}};
  Rng batch_rng(batch_seed);
  Rng mask_rng(mask_seed);

  const AdaBoundHyper hyper = config.hyper();
  MomentState moments(model.size());
  JangLrState jang(config.alpha);
  std::vector<DropMask> masks;

  for (std::size_t k = 1; k <= config.iterations; ++k) {
    const auto rows = sample_batch(train_set.size(), config.batch_size, batch_rng);
    masks.clear();
    if (config.drop != DropVariant::None) {
      masks.reserve(rows.size());
      for (std::size_t n = 0; n < rows.size(); ++n)
        masks.push_back(sample_mask(config.drop, model.grid(), config.keep_prob, mask_rng));
    }

    const LossAndGradient lg = loss_and_gradients(model, train_set, rows, config.lambda, masks);
    auto theta = model.parameters();
    StepRates rates;
    LrBounds bounds = LrBounds::unbounded();

    switch (config.lr_scheme) {
      case LrScheme::FixedJang: {
        for (std::size_t i = 0; i < lg.gradient.size(); ++i)
          if (!std::isfinite(lg.gradient[i]))
            throw Error(ErrorKind::NonFiniteGradient,
                        "gradient entry " + std::to_string(i) + " at iteration " + std::to_string(k));
        const double step = jang.alpha();
        const auto next = sgd_step(theta, lg.gradient, step);
        std::copy(next.begin(), next.end(), theta.begin());
        jang.update(lg.loss);
        rates = {step, step, step};
        break;
      }
      case LrScheme::Adam:
        rates = adabound_step(moments, theta, lg.gradient, hyper, bounds);
        break;
      case LrScheme::AdaBound:
        bounds = adabound_bounds(moments.k + 1, hyper);
        rates = adabound_step(moments, theta, lg.gradient, hyper, bounds);
        break;
    }
    model.clamp_sigmas();

    history.train_rmse.push_back(rmse(model, train_set));
    history.test_rmse.push_back(rmse(model, test_set));
    history.loss.push_back(lg.loss);
    history.mean_lr.push_back(rates.mean);
    history.min_lr.push_back(rates.min);
    history.max_lr.push_back(rates.max);
    history.lr_lower.push_back(bounds.lower);
    history.lr_upper.push_back(bounds.upper);
  }

  history.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tsk
