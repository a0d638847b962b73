#include "tsk/loss_grad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "forward.hpp"

namespace tsk {

namespace {

void check_batch(const TskModel& model, const Dataset& data, std::span<const std::size_t> rows,
                 std::span<const DropMask> masks) {
  if (rows.empty()) throw Error(ErrorKind::EmptyBatch, "batch has no examples");
  if (data.num_features() != model.num_inputs())
    throw Error(ErrorKind::DimensionMismatch,
                "dataset has " + std::to_string(data.num_features()) + " features, model expects " +
                    std::to_string(model.num_inputs()));
  if (!masks.empty()) {
    if (masks.size() != rows.size())
      throw Error(ErrorKind::MaskShapeMismatch, std::to_string(masks.size()) + " masks for " +
                                                    std::to_string(rows.size()) + " examples");
    for (const DropMask& mask : masks) mask.check_shape(model.grid());
  }
}

std::vector<std::size_t> all_rows(const Dataset& data) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

const DropMask kNoMask{};

}  // namespace

double penalty(const TskModel& model, double lambda) {
  double sum = 0.0;
  for (std::size_t r = 0; r < model.num_rules(); ++r)
    for (std::size_t m = 1; m <= model.num_inputs(); ++m) {
      const double b = model.consequent(r, m);
      sum += b * b;
    }
  return 0.5 * lambda * sum;
}

double masked_loss(const TskModel& model, const Dataset& data, std::span<const std::size_t> rows,
                   std::span<const DropMask> masks, double lambda) {
  check_batch(model, data, rows, masks);
  detail::ForwardPass pass;
  double sse = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    detail::forward(model, data.row(rows[k]), masks.empty() ? kNoMask : masks[k], pass);
    const double e = pass.output - data.y[static_cast<Eigen::Index>(rows[k])];
    sse += e * e;
  }
  return 0.5 * sse + penalty(model, lambda);
}

double loss(const TskModel& model, const Dataset& data, std::span<const std::size_t> rows,
            double lambda) {
  return masked_loss(model, data, rows, {}, lambda);
}

double loss(const TskModel& model, const Dataset& data, double lambda) {
  const auto rows = all_rows(data);
  return loss(model, data, rows, lambda);
}

LossAndGradient loss_and_gradients(const TskModel& model, const Dataset& data,
                                   std::span<const std::size_t> rows, double lambda,
                                   std::span<const DropMask> masks) {
  check_batch(model, data, rows, masks);
  const RuleGrid& grid = model.grid();
  const std::size_t M = grid.num_inputs();
  const std::size_t R = grid.num_rules();

  LossAndGradient out;
  GradientVector& g = out.gradient;
  g.assign(model.size(), 0.0);
  detail::ForwardPass pass;
  double sse = 0.0;

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const DropMask& mask = masks.empty() ? kNoMask : masks[k];
    const auto x = data.row(rows[k]);
    detail::forward(model, x, mask, pass);
    const double e = pass.output - data.y[static_cast<Eigen::Index>(rows[k])];
    sse += e * e;

    for (std::size_t r = 0; r < R; ++r) {
      if (!detail::rule_kept(mask, r)) continue;

      // dL/db_{r,m} = e * fbar_r * x_m, with x_0 = 1.
      const double ew = e * pass.weights[r];
      const std::size_t base = model.consequent_index(r, 0);
      g[base] += ew;
      for (std::size_t m = 0; m < M; ++m) g[base + m + 1] += ew * x[m];

      if (pass.degenerate) continue;

      // dL/df_r = e * (y_r - y) / S; each used grade contributes f_r * dlog(mu).
      const double coef = e * (pass.rule_out[r] - pass.output) / pass.firing_sum * pass.firing[r];
      if (coef == 0.0) continue;
      for (std::size_t m = 0; m < M; ++m) {
        if (!detail::slot_used(mask, grid, r, m)) continue;
        const std::size_t i = grid.antecedent(r, m);
        const GaussianMF mf = model.mf(m, i);
        const double d = x[m] - mf.center;
        const double s2 = mf.sigma * mf.sigma;
        g[model.center_index(m, i)] += coef * d / s2;
        g[model.sigma_index(m, i)] += coef * d * d / (s2 * mf.sigma);
      }
    }
  }

  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t m = 1; m <= M; ++m) {
      const std::size_t idx = model.consequent_index(r, m);
      g[idx] += lambda * model.flatten()[idx];
    }

  out.loss = 0.5 * sse + penalty(model, lambda);
  return out;
}

GradientVector gradients(const TskModel& model, const Dataset& data,
                         std::span<const std::size_t> rows, double lambda,
                         std::span<const DropMask> masks) {
  return loss_and_gradients(model, data, rows, lambda, masks).gradient;
}

namespace {

// Direct evaluation of the unmasked loss in extended precision, written
// independently of detail::forward so the oracle does not share code with the
// analytic path. Parameters are read from `theta` in the flat layout.
long double reference_loss(const TskModel& shape, std::span<const long double> theta,
                           const Dataset& data, std::span<const std::size_t> rows,
                           long double lambda) {
  const RuleGrid& grid = shape.grid();
  const std::size_t M = grid.num_inputs();
  const std::size_t Mm = grid.mfs_per_input();
  const std::size_t R = grid.num_rules();
  const std::size_t n_mf = M * Mm;
  const std::size_t b0 = 2 * n_mf;

  long double sse = 0.0L;
  for (std::size_t n : rows) {
    const auto x = data.row(n);
    long double num = 0.0L;
    long double den = 0.0L;
    long double plain = 0.0L;
    for (std::size_t r = 0; r < R; ++r) {
      long double f = 1.0L;
      for (std::size_t m = 0; m < M; ++m) {
        const std::size_t k = m * Mm + grid.antecedent(r, m);
        const long double d = static_cast<long double>(x[m]) - theta[k];
        const long double s = theta[n_mf + k];
        f *= std::exp(-(d * d) / (2.0L * s * s));
      }
      const long double* b = theta.data() + b0 + r * (M + 1);
      long double y_r = b[0];
      for (std::size_t m = 0; m < M; ++m) y_r += b[m + 1] * static_cast<long double>(x[m]);
      num += f * y_r;
      den += f;
      plain += y_r;
    }
    const long double y = den > 0.0L ? num / den : plain / static_cast<long double>(R);
    const long double e = y - static_cast<long double>(data.y[static_cast<Eigen::Index>(n)]);
    sse += e * e;
  }

  long double pen = 0.0L;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t m = 1; m <= M; ++m) {
      const long double b = theta[b0 + r * (M + 1) + m];
      pen += b * b;
    }
  return 0.5L * sse + 0.5L * lambda * pen;
}

}  // namespace

GradientVector finite_diff_grad(const TskModel& model, const Dataset& data,
                                std::span<const std::size_t> rows, double lambda, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be > 0");
  check_batch(model, data, rows, {});
  const auto flat = model.flatten();
  std::vector<long double> theta(flat.begin(), flat.end());
  const long double step = h;
  GradientVector g(theta.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const long double saved = theta[i];
    theta[i] = saved + step;
    const long double up = reference_loss(model, theta, data, rows, lambda);
    theta[i] = saved - step;
    const long double down = reference_loss(model, theta, data, rows, lambda);
    theta[i] = saved;
    g[i] = static_cast<double>((up - down) / (2.0L * step));
  }
  return g;
}

GradientComparison compare_gradients(std::span<const double> analytic,
                                     std::span<const double> reference, double abs_floor) {
  if (analytic.size() != reference.size())
    throw Error(ErrorKind::LengthMismatch, "gradient lengths differ");
  GradientComparison cmp;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - reference[i]);
    if (std::abs(reference[i]) < abs_floor) {
      cmp.max_absolute = std::max(cmp.max_absolute, diff);
    } else {
      const double rel = diff / std::abs(reference[i]);
      cmp.relative.push_back(rel);
      cmp.max_relative = std::max(cmp.max_relative, rel);
    }
  }
  return cmp;
}

}  // namespace tsk
