// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Thresholds here are the release criteria; do not loosen them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tsk/baseline.hpp"
#include "tsk/dropout.hpp"
#include "tsk/experiment.hpp"
#include "tsk/loss_grad.hpp"
#include "tsk/optim.hpp"
#include "tsk/suite.hpp"
#include "tsk/trainer.hpp"

namespace fs = std::filesystem;
using namespace tsk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct PreparedSplit {
  Dataset train;
  Dataset test;
};

PreparedSplit prepare(const Dataset& raw, std::uint64_t seed) {
  Rng rng(seed);
  const Split s = split(raw, rng);
  const Preprocessor p = fit_preprocessor(s.train);
  return {apply_preprocessor(p, s.train.data()), apply_preprocessor(p, s.test)};
}

// 1. Analytic gradient vs central differences.
Outcome gradient_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_rel = 0.0, worst_abs = 0.0;
  std::size_t instances = 0;
  for (std::size_t M = 1; M <= 3; ++M) {
    const auto r = gradient_check(M, 2, 100, 1000 + M, 1e-6);
    worst_rel = std::max(worst_rel, r.max_relative_error);
    worst_abs = std::max(worst_abs, r.max_absolute_error);
    instances += r.trials;
  }
  const double secs = seconds_since(t0);
  return {worst_rel <= 1e-5 && worst_abs <= 1e-8 && secs < 10.0,
          fmt("%zu instances, max rel %.3e (<= 1e-5), max abs on small coords %.3e (<= 1e-8), %.2f s (< 10 s)",
              instances, worst_rel, worst_abs, secs)};
}

// 2. Parameter counts.
Outcome parameter_counts() {
  const bool ok = param_count(5, 2) == 212 && param_count(4, 2) == 96 &&
                  TskModel(5, 2).flatten().size() == 212 && TskModel(4, 2).flatten().size() == 96;
  return {ok, fmt("P(5,2)=%zu P(4,2)=%zu flatten=%zu/%zu", param_count(5, 2), param_count(4, 2),
                  TskModel(5, 2).flatten().size(), TskModel(4, 2).flatten().size())};
}

// 3. Bit-exact reductions.
Outcome reductions(const PreparedSplit& d) {
  TrainConfig rda = algorithm_by_name("MBGD-RDA").config;
  rda.keep_prob = 1.0;
  rda.lambda = 0.0;
  rda.seed = 77;
  TrainConfig a = algorithm_by_name("MBGD-A").config;
  a.seed = 77;
  const auto r1 = train(rda, d.train, d.test);
  const auto r2 = train(a, d.train, d.test);
  const bool rda_is_a = r1.model == r2.model && r1.history.test_rmse == r2.history.test_rmse;

  TrainConfig r = algorithm_by_name("MBGD-R").config;
  r.lambda = 0.0;
  r.seed = 78;
  TrainConfig plain = algorithm_by_name("MBGD").config;
  plain.seed = 78;
  const auto r3 = train(r, d.train, d.test);
  const auto r4 = train(plain, d.train, d.test);
  const bool r_is_plain = r3.model == r4.model && r3.history.test_rmse == r4.history.test_rmse;

  // Unbounded AdaBound against a hand-written Adam on a synthetic gradient stream.
  AdaBoundHyper h;
  const std::size_t n = 12;
  MomentState state(n);
  std::vector<double> theta(n, 0.25), ref(n, 0.25), m(n, 0.0), v(n, 0.0);
  Rng rng(5);
  std::normal_distribution<double> g01(0.0, 1.0);
  for (int k = 1; k <= 500; ++k) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = g01(rng) * std::pow(10.0, static_cast<double>(i % 5) - 2);
    adabound_step(state, theta, g, h, LrBounds::unbounded());
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = h.beta1 * m[i] + (1 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1 - h.beta2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(h.beta1, k));
      const double vh = v[i] / (1 - std::pow(h.beta2, k));
      ref[i] = ref[i] - (h.alpha / (std::sqrt(vh) + h.epsilon)) * mh;
    }
  }
  const bool adam = theta == ref;
  return {rda_is_a && r_is_plain && adam,
          fmt("MBGD-RDA(P=1,lambda=0)==MBGD-A: %s; MBGD-R(lambda=0)==MBGD: %s; AdaBound(0,inf)==Adam x500: %s",
              rda_is_a ? "yes" : "no", r_is_plain ? "yes" : "no", adam ? "yes" : "no")};
}

// 4. Realized AdaBound rates stay inside [l(k), u(k)].
Outcome rate_bounds(const PreparedSplit& d) {
  TrainConfig c = algorithm_by_name("MBGD-RDA").config;
  c.seed = 91;
  const auto h = train(c, d.train, d.test).history;
  std::size_t violations = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double l = bound_lower(k + 1, c.beta2, c.alpha_final);
    const double u = bound_upper(k + 1, c.beta2, c.alpha_final);
    if (h.min_lr[k] < l || h.max_lr[k] > u || h.lr_lower[k] != l || h.lr_upper[k] != u) ++violations;
  }
  const double l1000 = bound_lower(1000, 0.999, 0.01);
  const double u1000 = bound_upper(1000, 0.999, 0.01);
  const bool direct = std::abs(l1000 - 0.005) <= 1e-12 && std::abs(u1000 - 0.02) <= 1e-12;
  return {violations == 0 && h.size() == 500 && direct,
          fmt("%zu iterations, %zu out-of-bound steps; l(1000)=%.15g u(1000)=%.15g", h.size(), violations,
              l1000, u1000)};
}

// Gaussian elimination with partial pivoting on the augmented normal
// equations [X^T X + lambda I, X^T 1; 1^T X, N] [w; b] = [X^T y; sum y].
std::vector<long double> ridge_oracle(const RowMatrix& X, const Eigen::VectorXd& y, double lambda) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t m = static_cast<std::size_t>(X.cols());
  const std::size_t d = m + 1;
  std::vector<std::vector<long double>> A(d, std::vector<long double>(d + 1, 0.0L));
  auto feature = [&](std::size_t row, std::size_t j) -> long double {
    return j < m ? static_cast<long double>(X(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j))) : 1.0L;
  };
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      long double s = 0.0L;
      for (std::size_t r = 0; r < n; ++r) s += feature(r, i) * feature(r, j);
      A[i][j] = s;
    }
    if (i < m) A[i][i] += lambda;
    long double s = 0.0L;
    for (std::size_t r = 0; r < n; ++r) s += feature(r, i) * static_cast<long double>(y(static_cast<Eigen::Index>(r)));
    A[i][d] = s;
  }
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < d; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    for (std::size_t r = c + 1; r < d; ++r) {
      const long double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= d; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<long double> sol(d);
  for (std::size_t i = d; i-- > 0;) {
    long double s = A[i][d];
    for (std::size_t k = i + 1; k < d; ++k) s -= A[i][k] * sol[k];
    sol[i] = s / A[i][i];
  }
  return sol;
}

// 5. Ridge against the elimination oracle.
Outcome ridge_agreement() {
  Rng rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    RowMatrix X(50, 5);
    Eigen::VectorXd y(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) X(i, j) = (j + 1) * g(rng) + j;
      y(i) = g(rng) * 3.0 + X(i, 0) - 0.5 * X(i, 3) + 2.0;
    }
    const double lambda = t == 0 ? 0.05 : lam(rng);
    const LinearModel lm = ridge_fit(X, y, lambda);
    const auto ref = ridge_oracle(X, y, lambda);
    for (Eigen::Index j = 0; j <= 5; ++j) {
      const long double r = ref[static_cast<std::size_t>(j)];
      const double a = j < 5 ? lm.weights(j) : lm.bias;
      const double rel = static_cast<double>(std::fabs(a - r) / std::max(std::fabs(r), 1e-12L));
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-8, fmt("50 instances (N=50, M=5), max relative deviation %.3e (<= 1e-8)", worst)};
}

// 6 and 7. Synthetic benchmark comparisons.
struct Benchmark {
  double rr = 0.0, rda_best = 0.0, rda_100 = 0.0, mbgd_100 = 0.0, seconds = 0.0;
};

Benchmark run_benchmark(const Dataset& raw) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteOptions opt;
  opt.repeats = 5;
  opt.seed = 1;
  const auto res = run_suite({algorithm_by_name("RR"), algorithm_by_name("MBGD"), algorithm_by_name("MBGD-RDA")},
                             raw, opt);
  Benchmark b;
  b.rr = res[0].best_test_rmse();
  b.mbgd_100 = res[1].mean_history.test_rmse.at(99);
  b.rda_best = res[2].best_test_rmse();
  b.rda_100 = res[2].mean_history.test_rmse.at(99);
  b.seconds = seconds_since(t0);
  return b;
}

// 8. Structural properties of the drop variants and empirical keep rates.
Outcome drop_structure() {
  Rng rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t M = 3, Mm = 2;
  TskModel model(M, Mm);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t i = 0; i < Mm; ++i) model.set_mf(m, i, {g(rng), 0.8 + 0.2 * std::abs(g(rng))});
  const RuleGrid& grid = model.grid();
  bool structural = true;
  for (int t = 0; t < 200 && structural; ++t) {
    std::vector<double> x(M);
    for (double& v : x) v = g(rng);
    std::vector<std::vector<double>> grade(M, std::vector<double>(Mm));
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t i = 0; i < Mm; ++i) grade[m][i] = membership(model.mf(m, i), x[m]);

    const auto rule = sample_mask(DropVariant::Rule, grid, 0.5, rng);
    const auto mf = sample_mask(DropVariant::MF, grid, 0.5, rng);
    const auto mem = sample_mask(DropVariant::Membership, grid, 0.5, rng);
    const auto fr = firing_levels(model, x, rule);
    const auto fm = firing_levels(model, x, mf);
    const auto fs = firing_levels(model, x, mem);
    for (std::size_t r = 0; r < grid.num_rules(); ++r) {
      double full = 1.0, with_mf = 1.0, with_mem = 1.0;
      for (std::size_t m = 0; m < M; ++m) {
        const std::size_t i = grid.antecedent(r, m);
        full *= grade[m][i];
        with_mf *= mf.keep[m * Mm + i] ? grade[m][i] : 1.0;
        with_mem *= mem.keep[r * M + m] ? grade[m][i] : 1.0;
      }
      const double expect_rule = rule.keep[r] ? full : 0.0;
      if (std::abs(fr[r] - expect_rule) > 1e-12 || std::abs(fm[r] - with_mf) > 1e-12 ||
          std::abs(fs[r] - with_mem) > 1e-12)
        structural = false;
    }
  }

  std::string rates;
  bool rates_ok = true;
  for (double P : {0.3, 0.5, 0.7}) {
    for (auto variant : {DropVariant::Rule, DropVariant::MF, DropVariant::Membership}) {
      const RuleGrid big(5, 2);
      std::size_t kept = 0, total = 0;
      while (total < 10000) {
        const auto mask = sample_mask(variant, big, P, rng);
        for (auto k : mask.keep) {
          kept += k;
          ++total;
        }
      }
      const double rate = static_cast<double>(kept) / static_cast<double>(total);
      const double tol = 3.0 * std::sqrt(P * (1 - P) / static_cast<double>(total));
      if (std::abs(rate - P) > tol) {
        rates_ok = false;
        rates += fmt(" [P=%.1f variant %d rate %.4f]", P, static_cast<int>(variant), rate);
      }
    }
  }
  return {structural && rates_ok,
          std::string("rule/MF/membership firing identities ") + (structural ? "hold" : "violated") +
              "; keep rates within P +/- 3 sigma over >=1e4 draws for P in {0.3,0.5,0.7}: " +
              (rates_ok ? "yes" : "no" + rates)};
}

// 9. Same-seed reruns produce identical CSVs (timing column excluded).
std::string read_stripped(const fs::path& p) {
  std::ifstream in(p);
  std::string out;
  const bool summary = p.filename() == "summary.csv";
  for (std::string line; std::getline(in, line);) {
    if (summary) line = line.substr(0, line.rfind(','));
    out += line + '\n';
  }
  return out;
}

Outcome reproducibility(const fs::path& csv) {
  const fs::path root = fs::path(TSK_TEST_TMPDIR) / "rerun";
  fs::remove_all(root);
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  for (int i = 0; i < 2; ++i) {
    ExperimentSpec spec;
    spec.data = csv;
    spec.repeats = 2;
    spec.seed = 12345;
    spec.out = root / std::to_string(i);
    spec.overrides = {"K=100"};
    std::ostringstream err;
    if (run_experiment(spec, err) != 0) return {false, "experiment failed: " + err.str()};
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::directory_iterator(spec.out))
      files.emplace_back(e.path().filename().string(), read_stripped(e.path()));
    std::sort(files.begin(), files.end());
    runs.push_back(std::move(files));
  }
  const bool same = runs[0] == runs[1] && !runs[0].empty();
  return {same, fmt("%zu output files compared, %s", runs[0].size(), same ? "identical" : "differ")};
}

// 10. Sensitivity of the final test RMSE to batch size and keep probability.
// Each hyperparameter is swept with the other at its default (N_bs = 64,
// P = 0.5); the spread (max - min) / min of each sweep must stay below 15%.
// The spread over the full 3 x 3 grid is reported for information.
Outcome robustness(const Dataset& raw) {
  auto final_rmse = [&](std::size_t nbs, double P) {
    Algorithm a = algorithm_by_name("MBGD-RDA");
    a.config.batch_size = nbs;
    a.config.keep_prob = P;
    SuiteOptions opt;
    opt.repeats = 5;
    opt.seed = 7;
    return run_suite({a}, raw, opt)[0].mean_final_test_rmse();
  };
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / *lo;
  };

  const std::vector<std::size_t> sizes{32, 64, 128};
  const std::vector<double> probs{0.3, 0.5, 0.7};
  std::vector<std::vector<double>> grid(3, std::vector<double>(3));
  std::string cells;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      grid[i][j] = final_rmse(sizes[i], probs[j]);
      cells += fmt(" %zu/%.1f:%.4f", sizes[i], probs[j], grid[i][j]);
    }
  const double by_batch = spread({grid[0][1], grid[1][1], grid[2][1]});
  const double by_keep = spread(grid[1]);
  std::vector<double> all;
  for (const auto& row : grid) all.insert(all.end(), row.begin(), row.end());
  return {by_batch < 0.15 && by_keep < 0.15,
          fmt("spread over N_bs (P=0.5) %.4f, over P (N_bs=64) %.4f (each < 0.15); full grid %.4f; N_bs/P:",
              by_batch, by_keep, spread(all)) +
              cells};
}

}  // namespace

int main() {
  fs::create_directories(TSK_TEST_TMPDIR);
  const Dataset raw = make_synthetic();
  const fs::path csv = fs::path(TSK_TEST_TMPDIR) / "synthetic.csv";
  write_csv(raw, csv);
  const PreparedSplit d = prepare(raw, 3);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "analytic gradient matches finite differences", gradient_agreement);
  report(2, "parameter count", parameter_counts);
  report(3, "special-case reductions are bit-exact", [&] { return reductions(d); });
  report(4, "AdaBound rates within bounds", [&] { return rate_bounds(d); });
  report(5, "ridge matches normal-equation oracle", ridge_agreement);

  Benchmark bench;
  bool bench_ok = true;
  std::string bench_error;
  try {
    bench = run_benchmark(raw);
  } catch (const std::exception& e) {
    bench_ok = false;
    bench_error = e.what();
  }
  report(6, "MBGD-RDA beats ridge on synthetic data", [&]() -> Outcome {
    if (!bench_ok) return {false, "exception: " + bench_error};
    return {bench.rda_best < bench.rr && bench.seconds < 300.0,
            fmt("mean best test RMSE MBGD-RDA %.4f vs RR %.4f over 5 seeds, %.1f s (< 300 s)",
                bench.rda_best, bench.rr, bench.seconds)};
  });
  report(7, "MBGD-RDA ahead of MBGD at iteration 100", [&]() -> Outcome {
    if (!bench_ok) return {false, "exception: " + bench_error};
    return {bench.rda_100 < bench.mbgd_100,
            fmt("mean test RMSE at iteration 100: MBGD-RDA %.4f vs MBGD %.4f over 5 seeds", bench.rda_100,
                bench.mbgd_100)};
  });
  report(8, "drop variants: structure and keep rate", drop_structure);
  report(9, "same-seed reruns are byte-identical", [&] { return reproducibility(csv); });
  report(10, "robust to batch size and keep probability", [&] { return robustness(raw); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
