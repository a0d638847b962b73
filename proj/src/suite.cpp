#include "tsk/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsk/baseline.hpp"

namespace tsk {

namespace {

Algorithm mbgd(std::string name, double lambda, DropVariant drop, LrScheme scheme) {
  Algorithm a;
  a.name = std::move(name);
  a.config.lambda = lambda;
  a.config.drop = drop;
  a.config.lr_scheme = scheme;
  return a;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<Algorithm> default_algorithms() {
  Algorithm rr;
  rr.name = "RR";
  rr.ridge = true;
  rr.config.lambda = 0.05;
  return {
      rr,
      mbgd("MBGD", 0.0, DropVariant::None, LrScheme::FixedJang),
      mbgd("MBGD-R", 0.05, DropVariant::None, LrScheme::FixedJang),
      mbgd("MBGD-D", 0.0, DropVariant::Rule, LrScheme::FixedJang),
      mbgd("MBGD-RD", 0.05, DropVariant::Rule, LrScheme::FixedJang),
      mbgd("MBGD-A", 0.0, DropVariant::None, LrScheme::AdaBound),
      mbgd("MBGD-RDA", 0.05, DropVariant::Rule, LrScheme::AdaBound),
  };
}

std::vector<Algorithm> known_algorithms() {
  auto all = default_algorithms();
  all.push_back(mbgd("MBGD-RDA-MF", 0.05, DropVariant::MF, LrScheme::AdaBound));
  all.push_back(mbgd("MBGD-RDA-Membership", 0.05, DropVariant::Membership, LrScheme::AdaBound));
  all.push_back(mbgd("MBGD-RD-Adam", 0.05, DropVariant::Rule, LrScheme::Adam));
  return all;
}

Algorithm algorithm_by_name(std::string_view name) {
  for (auto& a : known_algorithms())
    if (a.name == name) return a;
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

double AlgorithmResult::best_test_rmse() const {
  if (ridge) return mean_of(ridge_test_rmse);
  const auto& t = mean_history.test_rmse;
  if (t.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::min_element(t.begin(), t.end());
}

std::size_t AlgorithmResult::best_iter() const {
  if (ridge) return 0;
  const auto& t = mean_history.test_rmse;
  if (t.empty()) return 0;
  return static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin()) + 1;
}

double AlgorithmResult::mean_final_test_rmse() const {
  if (ridge) return mean_of(ridge_test_rmse);
  const auto& t = mean_history.test_rmse;
  return t.empty() ? std::numeric_limits<double>::quiet_NaN() : t.back();
}

TrainHistory mean_history(std::span<const TrainHistory> runs) {
  TrainHistory mean;
  if (runs.empty()) return mean;
  const std::size_t len = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != len) throw Error(ErrorKind::LengthMismatch, "histories differ in length");

  auto average = [&](auto member) {
    std::vector<double> out(len, 0.0);
    for (const auto& r : runs)
      for (std::size_t k = 0; k < len; ++k) out[k] += (r.*member)[k];
    for (double& v : out) v /= static_cast<double>(runs.size());
    return out;
  };
  mean.train_rmse = average(&TrainHistory::train_rmse);
  mean.test_rmse = average(&TrainHistory::test_rmse);
  mean.loss = average(&TrainHistory::loss);
  mean.mean_lr = average(&TrainHistory::mean_lr);
  mean.min_lr = average(&TrainHistory::min_lr);
  mean.max_lr = average(&TrainHistory::max_lr);
  mean.lr_lower = average(&TrainHistory::lr_lower);
  mean.lr_upper = average(&TrainHistory::lr_upper);
  for (const auto& r : runs) mean.seconds += r.seconds;
  mean.seconds /= static_cast<double>(runs.size());
  return mean;
}

std::vector<AlgorithmResult> run_suite(const std::vector<Algorithm>& algorithms,
                                       const Dataset& raw, const SuiteOptions& options) {
  if (options.repeats == 0) throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");

  std::vector<AlgorithmResult> results(algorithms.size());
  std::vector<std::vector<TrainHistory>> runs(algorithms.size());
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    results[a].name = algorithms[a].name;
    results[a].ridge = algorithms[a].ridge;
  }

  Rng master(options.seed);
  for (std::size_t rep = 0; rep < options.repeats; ++rep) {
    const std::uint64_t run_seed = master();
    Rng split_rng(run_seed);
    const Split parts = split(raw, split_rng, options.train_ratio);
    const Preprocessor prep = fit_preprocessor(parts.train, options.max_dims);
    const Dataset train_set = apply_preprocessor(prep, parts.train.data());
    const Dataset test_set = apply_preprocessor(prep, parts.test);

    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      const Algorithm& algo = algorithms[a];
      AlgorithmResult& res = results[a];
      if (algo.ridge) {
        const auto start = std::chrono::steady_clock::now();
        const LinearModel lm = ridge_fit(train_set.X, train_set.y, algo.config.lambda);
        const Eigen::VectorXd resid = test_set.y - ridge_predict(lm, test_set.X);
        res.ridge_test_rmse.push_back(std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size())));
        res.mean_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        continue;
      }
      TrainConfig config = algo.config;
      config.seed = run_seed;
      TrainResult tr = train(config, train_set, test_set);
      res.mean_seconds += tr.history.seconds;
      if (rep == 0 && options.keep_first_models) res.first_model = std::move(tr.model);
      runs[a].push_back(std::move(tr.history));
    }
  }

  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    results[a].mean_seconds /= static_cast<double>(options.repeats);
    if (!results[a].ridge) results[a].mean_history = mean_history(runs[a]);
  }
  return results;
}

}  // namespace tsk
