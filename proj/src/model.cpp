#include "tsk/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "forward.hpp"

namespace tsk {

double membership(const GaussianMF& mf, double x) {
  const double d = x - mf.center;
  return std::exp(-(d * d) / (2.0 * mf.sigma * mf.sigma));
}

namespace {

std::size_t checked_pow(std::size_t base, std::size_t exp) {
  std::size_t result = 1;
  for (std::size_t k = 0; k < exp; ++k) {
    if (base != 0 && result > std::numeric_limits<std::size_t>::max() / base)
      throw Error(ErrorKind::Overflow, "rule count Mm^M exceeds size_t");
    result *= base;
  }
  return result;
}

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a)
    throw Error(ErrorKind::Overflow, "parameter count exceeds size_t");
  return a * b;
}

std::size_t checked_add(std::size_t a, std::size_t b) {
  if (b > std::numeric_limits<std::size_t>::max() - a)
    throw Error(ErrorKind::Overflow, "parameter count exceeds size_t");
  return a + b;
}

}  // namespace

std::size_t param_count(std::size_t num_inputs, std::size_t mfs_per_input) {
  if (num_inputs == 0 || mfs_per_input == 0)
    throw Error(ErrorKind::InvalidArgument, "M and Mm must be at least 1");
  const std::size_t antecedent = checked_mul(checked_mul(2, num_inputs), mfs_per_input);
  const std::size_t rules = checked_pow(mfs_per_input, num_inputs);
  return checked_add(antecedent, checked_mul(checked_add(num_inputs, 1), rules));
}

RuleGrid::RuleGrid(std::size_t num_inputs, std::size_t mfs_per_input)
    : num_inputs_(num_inputs), mfs_per_input_(mfs_per_input) {
  if (num_inputs == 0 || mfs_per_input == 0)
    throw Error(ErrorKind::InvalidArgument, "M and Mm must be at least 1");
  num_rules_ = checked_pow(mfs_per_input, num_inputs);
  antecedents_.resize(checked_mul(num_rules_, num_inputs));
  for (std::size_t r = 0; r < num_rules_; ++r) {
    std::size_t rest = r;
    for (std::size_t m = num_inputs; m-- > 0;) {
      antecedents_[r * num_inputs + m] = static_cast<std::uint32_t>(rest % mfs_per_input);
      rest /= mfs_per_input;
    }
  }
}

std::vector<std::size_t> RuleGrid::rules_using(std::size_t input, std::size_t mf) const {
  std::vector<std::size_t> rules;
  for (std::size_t r = 0; r < num_rules_; ++r)
    if (antecedent(r, input) == mf) rules.push_back(r);
  return rules;
}

DropMask DropMask::all_keep(DropVariant variant, const RuleGrid& grid) {
  DropMask mask;
  mask.variant = variant;
  switch (variant) {
    case DropVariant::None:
      break;
    case DropVariant::Rule:
      mask.keep.assign(grid.num_rules(), 1);
      break;
    case DropVariant::MF:
      mask.keep.assign(grid.num_inputs() * grid.mfs_per_input(), 1);
      break;
    case DropVariant::Membership:
      mask.keep.assign(grid.num_rules() * grid.num_inputs(), 1);
      break;
  }
  return mask;
}

void DropMask::check_shape(const RuleGrid& grid) const {
  std::size_t expected = 0;
  switch (variant) {
    case DropVariant::None: expected = 0; break;
    case DropVariant::Rule: expected = grid.num_rules(); break;
    case DropVariant::MF: expected = grid.num_inputs() * grid.mfs_per_input(); break;
    case DropVariant::Membership: expected = grid.num_rules() * grid.num_inputs(); break;
  }
  if (keep.size() != expected)
    throw Error(ErrorKind::MaskShapeMismatch,
                "mask has " + std::to_string(keep.size()) + " flags, expected " +
                    std::to_string(expected));
}

TskModel::TskModel(std::size_t num_inputs, std::size_t mfs_per_input)
    : grid_(num_inputs, mfs_per_input), theta_(param_count(num_inputs, mfs_per_input), 0.0) {
  for (std::size_t m = 0; m < num_inputs; ++m)
    for (std::size_t i = 0; i < mfs_per_input; ++i) theta_[sigma_index(m, i)] = 1.0;
}

TskModel TskModel::unflatten(std::size_t num_inputs, std::size_t mfs_per_input,
                             std::span<const double> theta) {
  TskModel model(num_inputs, mfs_per_input);
  if (theta.size() != model.size())
    throw Error(ErrorKind::LengthMismatch, "got " + std::to_string(theta.size()) +
                                               " parameters, expected " +
                                               std::to_string(model.size()));
  model.theta_.assign(theta.begin(), theta.end());
  model.clamp_sigmas();
  return model;
}

void TskModel::set_mf(std::size_t input, std::size_t i, GaussianMF mf) {
  theta_[center_index(input, i)] = mf.center;
  theta_[sigma_index(input, i)] = std::max(mf.sigma, kSigmaMin);
}

void TskModel::clamp_sigmas() {
  const std::size_t n = num_inputs() * mfs_per_input();
  for (std::size_t k = n; k < 2 * n; ++k) theta_[k] = std::max(theta_[k], kSigmaMin);
}

double TskModel::rule_output(std::size_t rule, std::span<const double> x) const {
  const double* b = theta_.data() + consequent_index(rule, 0);
  double y = b[0];
  for (std::size_t m = 0; m < x.size(); ++m) y += b[m + 1] * x[m];
  return y;
}

namespace detail {

void forward(const TskModel& model, std::span<const double> x, const DropMask& mask,
             ForwardPass& pass) {
  const RuleGrid& grid = model.grid();
  const std::size_t M = grid.num_inputs();
  const std::size_t Mm = grid.mfs_per_input();
  const std::size_t R = grid.num_rules();
  if (x.size() != M)
    throw Error(ErrorKind::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(M));

  pass.grades.resize(M * Mm);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t i = 0; i < Mm; ++i) pass.grades[m * Mm + i] = membership(model.mf(m, i), x[m]);

  pass.firing.resize(R);
  pass.rule_out.resize(R);
  pass.weights.resize(R);
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    pass.rule_out[r] = model.rule_output(r, x);
    double f = 0.0;
    if (rule_kept(mask, r)) {
      f = 1.0;
      for (std::size_t m = 0; m < M; ++m)
        if (slot_used(mask, grid, r, m)) f *= pass.grades[m * Mm + grid.antecedent(r, m)];
    }
    pass.firing[r] = f;
    sum += f;
    weighted += f * pass.rule_out[r];
  }
  pass.firing_sum = sum;
  pass.degenerate = !(sum > 0.0);

  if (!pass.degenerate) {
    pass.output = weighted / sum;
    for (std::size_t r = 0; r < R; ++r) pass.weights[r] = pass.firing[r] / sum;
    return;
  }

  // Every firing level underflowed: fall back to the plain mean over the
  // rules that were not dropped.
  std::size_t kept = 0;
  for (std::size_t r = 0; r < R; ++r) kept += rule_kept(mask, r) ? 1 : 0;
  const bool use_all = kept == 0;
  const double w = 1.0 / static_cast<double>(use_all ? R : kept);
  double out = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    pass.weights[r] = (use_all || rule_kept(mask, r)) ? w : 0.0;
    out += pass.weights[r] * pass.rule_out[r];
  }
  pass.output = out;
}

}  // namespace detail

std::vector<double> firing_levels(const TskModel& model, std::span<const double> x,
                                  const DropMask& mask) {
  mask.check_shape(model.grid());
  detail::ForwardPass pass;
  detail::forward(model, x, mask, pass);
  return pass.firing;
}

double predict(const TskModel& model, std::span<const double> x) {
  detail::ForwardPass pass;
  detail::forward(model, x, DropMask::none(), pass);
  return pass.output;
}

double predict_masked(const TskModel& model, std::span<const double> x, const DropMask& mask) {
  mask.check_shape(model.grid());
  detail::ForwardPass pass;
  detail::forward(model, x, mask, pass);
  return pass.output;
}

TskModel init_model(std::span<const FeatureStats> stats, std::size_t mfs_per_input) {
  if (stats.empty()) throw Error(ErrorKind::InvalidArgument, "no input features");
  TskModel model(stats.size(), mfs_per_input);
  for (std::size_t m = 0; m < stats.size(); ++m) {
    const FeatureStats& s = stats[m];
    if (!(s.max > s.min) || !(s.std > 0.0))
      throw Error(ErrorKind::ConstantFeature, "input " + std::to_string(m) + " is constant");
    for (std::size_t i = 0; i < mfs_per_input; ++i) {
      double center = s.min;
      if (mfs_per_input > 1) {
        const double t = static_cast<double>(i) / static_cast<double>(mfs_per_input - 1);
        center = i + 1 == mfs_per_input ? s.max : s.min + t * (s.max - s.min);
      }
      model.set_mf(m, i, {center, s.std});
    }
  }
  return model;
}

void save_checkpoint(const TskModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "M=" << model.num_inputs() << '\n' << "Mm=" << model.mfs_per_input() << '\n';
  char buf[32];
  for (double v : model.flatten()) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, end - buf);
    out.put('\n');
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

namespace {

std::size_t parse_header(const std::string& line, const std::string& key) {
  const std::string prefix = key + "=";
  std::size_t value = 0;
  if (line.rfind(prefix, 0) != 0)
    throw Error(ErrorKind::ParseError, "expected '" + prefix + "<int>', got '" + line + "'");
  const char* first = line.data() + prefix.size();
  const char* last = line.data() + line.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorKind::ParseError, "bad integer in '" + line + "'");
  return value;
}

}  // namespace

TskModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const std::size_t M = parse_header(line, "M");
  std::getline(in, line);
  const std::size_t Mm = parse_header(line, "Mm");

  std::vector<double> theta;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(lineno) +
                                             ": not a number: '" + line + "'");
    theta.push_back(v);
  }
  return TskModel::unflatten(M, Mm, theta);
}

}  // namespace tsk
