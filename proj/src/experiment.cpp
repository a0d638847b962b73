#include "tsk/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "tsk/loss_grad.hpp"

namespace tsk {

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorKind::InvalidArgument, "bad value '" + value + "' for '" + key + "'");
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

class OutFile {
 public:
  explicit OutFile(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  }
  std::ofstream& stream() { return out_; }
  void close() {
    out_.close();
    if (!out_) throw Error(ErrorKind::Io, "write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

void apply_override(TrainConfig& c, const std::string& key, const std::string& value) {
  const std::string k = lower(key);
  if (k == "mm" || k == "mfs_per_input") {
    c.mfs_per_input = parse_value<std::size_t>(key, value);
  } else if (k == "k" || k == "iterations") {
    c.iterations = parse_value<std::size_t>(key, value);
  } else if (k == "batch_size" || k == "n_bs" || k == "nbs") {
    c.batch_size = parse_value<std::size_t>(key, value);
  } else if (k == "p" || k == "keep_prob") {
    c.keep_prob = parse_value<double>(key, value);
  } else if (k == "alpha") {
    c.alpha = parse_value<double>(key, value);
  } else if (k == "lambda") {
    c.lambda = parse_value<double>(key, value);
  } else if (k == "beta1") {
    c.beta1 = parse_value<double>(key, value);
  } else if (k == "beta2") {
    c.beta2 = parse_value<double>(key, value);
  } else if (k == "epsilon") {
    c.epsilon = parse_value<double>(key, value);
  } else if (k == "alpha_final") {
    c.alpha_final = parse_value<double>(key, value);
  } else if (k == "drop") {
    const std::string v = lower(value);
    if (v == "none") c.drop = DropVariant::None;
    else if (v == "rule") c.drop = DropVariant::Rule;
    else if (v == "mf") c.drop = DropVariant::MF;
    else if (v == "membership") c.drop = DropVariant::Membership;
    else throw Error(ErrorKind::InvalidArgument, "unknown drop variant '" + value + "'");
  } else if (k == "lr" || k == "lr_scheme") {
    const std::string v = lower(value);
    if (v == "jang" || v == "fixed") c.lr_scheme = LrScheme::FixedJang;
    else if (v == "adam") c.lr_scheme = LrScheme::Adam;
    else if (v == "adabound") c.lr_scheme = LrScheme::AdaBound;
    else throw Error(ErrorKind::InvalidArgument, "unknown learning-rate scheme '" + value + "'");
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown hyperparameter '" + key + "'");
  }
}

std::vector<Algorithm> resolve_algorithms(const ExperimentSpec& spec) {
  std::vector<Algorithm> algos;
  if (spec.algorithms.empty()) {
    algos = default_algorithms();
  } else {
    for (const auto& name : spec.algorithms) algos.push_back(algorithm_by_name(name));
  }

  for (const auto& entry : spec.overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::InvalidArgument, "override '" + entry + "' is not key=value");
    std::string key = entry.substr(0, eq);
    const std::string value = entry.substr(eq + 1);

    // Algorithm names contain '-' but never '.', so "ALGO.key" is unambiguous.
    std::string scope;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      scope = key.substr(0, dot);
      key = key.substr(dot + 1);
      algorithm_by_name(scope);
    }
    for (auto& a : algos)
      if (scope.empty() || a.name == scope) apply_override(a.config, key, value);
  }
  return algos;
}

std::string format_decimal(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
  const int decimals = std::max(0, 11 - exponent);
  std::string buf(static_cast<std::size_t>(decimals + std::abs(exponent) + 32), '\0');
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

void write_history_csv(const TrainHistory& h, const std::filesystem::path& path) {
  OutFile file(path);
  auto& out = file.stream();
  out << "iter,train_rmse,test_rmse,loss,mean_lr\n";
  for (std::size_t k = 0; k < h.size(); ++k) {
    out << (k + 1) << ',' << format_decimal(h.train_rmse[k]) << ','
        << format_decimal(h.test_rmse[k]) << ',' << format_decimal(h.loss[k]) << ','
        << format_decimal(h.mean_lr[k]) << '\n';
  }
  file.close();
}

void write_summary_csv(const std::vector<AlgorithmResult>& results,
                       const std::filesystem::path& path) {
  OutFile file(path);
  auto& out = file.stream();
  out << "algo,best_test_rmse,best_iter,mean_final_test_rmse,seconds\n";
  char seconds[64];
  for (const auto& r : results) {
    std::snprintf(seconds, sizeof seconds, "%.3f", r.mean_seconds);
    out << r.name << ',' << format_decimal(r.best_test_rmse()) << ',' << r.best_iter() << ','
        << format_decimal(r.mean_final_test_rmse()) << ',' << seconds << '\n';
  }
  file.close();
}

void write_improvement_csv(std::span<const double> percent, const std::filesystem::path& path) {
  OutFile file(path);
  auto& out = file.stream();
  out << "iter,percent\n";
  for (std::size_t k = 0; k < percent.size(); ++k)
    out << (k + 1) << ',' << format_decimal(percent[k]) << '\n';
  file.close();
}

int run_experiment(const ExperimentSpec& spec, std::ostream& err) {
  std::string stage = "load";
  try {
    std::vector<Algorithm> algos = resolve_algorithms(spec);
    const Dataset raw = load_csv(spec.data, spec.target);

    stage = "train";
    SuiteOptions options;
    options.repeats = spec.repeats;
    options.seed = spec.seed;
    options.keep_first_models = spec.save_models;
    const auto results = run_suite(algos, raw, options);

    stage = "write";
    std::filesystem::create_directories(spec.out);
    for (const auto& r : results) {
      if (r.ridge) continue;
      write_history_csv(r.mean_history, spec.out / ("history_" + r.name + ".csv"));
      if (r.first_model) save_checkpoint(*r.first_model, spec.out / ("model_" + r.name + ".txt"));
    }
    write_summary_csv(results, spec.out / "summary.csv");

    const auto base = std::find_if(results.begin(), results.end(),
                                   [](const auto& r) { return r.name == "MBGD"; });
    if (base != results.end()) {
      for (const auto& r : results) {
        if (r.ridge || r.name == "MBGD") continue;
        if (r.mean_history.size() != base->mean_history.size()) {
          err << "warning: skipping improvement curve for " << r.name
              << " (iteration count differs from MBGD)\n";
          continue;
        }
        write_improvement_csv(percent_improvement(base->mean_history.test_rmse, r.mean_history.test_rmse),
                              spec.out / ("improvement_" + r.name + ".csv"));
      }
    }
  } catch (const std::exception& e) {
    // The suite fits the preprocessor inside training; report it by kind.
    if (const auto* te = dynamic_cast<const Error*>(&e);
        te && stage == "train" &&
        (te->kind() == ErrorKind::ConstantFeature || te->kind() == ErrorKind::TooSmall ||
         te->kind() == ErrorKind::SchemaMismatch))
      stage = "preprocess";
    err << "error [" << stage << "]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

GradientInstance random_gradient_instance(std::size_t num_inputs, std::size_t mfs_per_input,
                                          std::size_t batch_size, double lambda, Rng& rng) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::uniform_real_distribution<double> width(0.6, 1.4);
  std::normal_distribution<double> normal(0.0, 1.0);

  GradientInstance inst{TskModel(num_inputs, mfs_per_input), {}, lambda};
  for (std::size_t m = 0; m < num_inputs; ++m)
    for (std::size_t i = 0; i < mfs_per_input; ++i) {
      const double base =
          mfs_per_input > 1
              ? -1.5 + 3.0 * static_cast<double>(i) / static_cast<double>(mfs_per_input - 1)
              : 0.0;
      inst.model.set_mf(m, i, {base + jitter(rng), width(rng)});
    }
  for (std::size_t r = 0; r < inst.model.num_rules(); ++r)
    for (std::size_t j = 0; j <= num_inputs; ++j) inst.model.consequent(r, j) = normal(rng);

  inst.batch.X.resize(static_cast<Eigen::Index>(batch_size), static_cast<Eigen::Index>(num_inputs));
  inst.batch.y.resize(static_cast<Eigen::Index>(batch_size));
  for (Eigen::Index n = 0; n < inst.batch.X.rows(); ++n) {
    for (Eigen::Index m = 0; m < inst.batch.X.cols(); ++m) inst.batch.X(n, m) = normal(rng);
    inst.batch.y[n] = normal(rng);
  }
  return inst;
}

GradCheckReport gradient_check(std::size_t num_inputs, std::size_t mfs_per_input,
                               std::size_t trials, std::uint64_t seed, double step) {
  std::size_t rules = 1;
  for (std::size_t m = 0; m < num_inputs; ++m) {
    rules *= mfs_per_input;
    if (rules > kMaxGradCheckRules)
      throw Error(ErrorKind::GridTooLarge, std::to_string(mfs_per_input) + "^" +
                                               std::to_string(num_inputs) + " rules exceeds " +
                                               std::to_string(kMaxGradCheckRules));
  }

  GradCheckReport report;
  report.num_inputs = num_inputs;
  report.mfs_per_input = mfs_per_input;
  report.trials = trials;
  report.step = step;

  Rng rng(seed);
  std::vector<double> all_relative;
  for (std::size_t t = 0; t < trials; ++t) {
    const double lambda = t % 2 == 0 ? 0.0 : 0.05;
    const GradientInstance inst = random_gradient_instance(num_inputs, mfs_per_input, 4, lambda, rng);
    std::vector<std::size_t> rows(inst.batch.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto analytic = gradients(inst.model, inst.batch, rows, lambda);
    const auto oracle = finite_diff_grad(inst.model, inst.batch, rows, lambda, step);
    const auto cmp = compare_gradients(analytic, oracle);
    report.max_relative_error = std::max(report.max_relative_error, cmp.max_relative);
    report.max_absolute_error = std::max(report.max_absolute_error, cmp.max_absolute);
    all_relative.insert(all_relative.end(), cmp.relative.begin(), cmp.relative.end());
  }
  if (!all_relative.empty()) {
    const auto mid = all_relative.begin() + static_cast<std::ptrdiff_t>(all_relative.size() / 2);
    std::nth_element(all_relative.begin(), mid, all_relative.end());
    report.median_relative_error = *mid;
  }
  return report;
}

void write_grad_check_report(const GradCheckReport& r, const std::filesystem::path& path) {
  OutFile file(path);
  auto& out = file.stream();
  out << "M=" << r.num_inputs << '\n' << "Mm=" << r.mfs_per_input << '\n' << "trials=" << r.trials << '\n';
  if (r.trials > 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.step);
    out << "step=" << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.6e", r.max_relative_error);
    out << "max_relative_error=" << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.6e", r.median_relative_error);
    out << "median_relative_error=" << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.6e", r.max_absolute_error);
    out << "max_absolute_error_small_coords=" << buf << '\n';
  }
  file.close();
}

}  // namespace tsk
