#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "tsk/model.hpp"

namespace tsk {
namespace {

TskModel random_model(std::size_t M, std::size_t Mm, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> w(0.3, 2.0);
  TskModel model(M, Mm);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t i = 0; i < Mm; ++i) model.set_mf(m, i, {u(rng), w(rng)});
  for (std::size_t r = 0; r < model.num_rules(); ++r)
    for (std::size_t j = 0; j <= M; ++j) model.consequent(r, j) = u(rng);
  return model;
}

TEST(Membership, Examples) {
  EXPECT_DOUBLE_EQ(membership({0.0, 1.0}, 0.0), 1.0);
  EXPECT_NEAR(membership({0.0, 1.0}, 1.0), 0.6065306597126334, 1e-15);
  EXPECT_NEAR(membership({2.0, 0.5}, 3.0), 0.1353352832366127, 1e-15);
}

TEST(Membership, DecreasesAwayFromCenter) {
  const GaussianMF mf{0.3, 0.7};
  double prev = membership(mf, 0.3);
  for (double d = 0.1; d < 4.0; d += 0.1) {
    const double left = membership(mf, 0.3 - d);
    const double right = membership(mf, 0.3 + d);
    EXPECT_LT(right, prev);
    EXPECT_NEAR(left, right, 1e-15);
    prev = right;
  }
}

TEST(ParamCount, TableValues) {
  EXPECT_EQ(param_count(5, 2), 212u);
  EXPECT_EQ(param_count(4, 2), 96u);
  EXPECT_EQ(param_count(1, 1), 4u);
}

TEST(ParamCount, OverflowIsRejected) {
  try {
    param_count(200, 4);
    FAIL() << "expected overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Overflow);
  }
}

TEST(ParamCount, MatchesFlattenLength) {
  for (std::size_t M = 1; M <= 5; ++M)
    for (std::size_t Mm = 1; Mm <= 3; ++Mm)
      EXPECT_EQ(TskModel(M, Mm).flatten().size(), param_count(M, Mm)) << M << "," << Mm;
}

TEST(RuleGrid, FullGridAndPhiSets) {
  for (std::size_t M = 1; M <= 4; ++M)
    for (std::size_t Mm = 2; Mm <= 3; ++Mm) {
      const RuleGrid grid(M, Mm);
      ASSERT_EQ(grid.num_rules(), static_cast<std::size_t>(std::pow(Mm, M)));
      std::set<std::vector<std::size_t>> combos;
      for (std::size_t r = 0; r < grid.num_rules(); ++r) {
        std::vector<std::size_t> c;
        for (std::size_t m = 0; m < M; ++m) c.push_back(grid.antecedent(r, m));
        combos.insert(c);
      }
      EXPECT_EQ(combos.size(), grid.num_rules());

      const auto phi_size = static_cast<std::size_t>(std::pow(Mm, M - 1));
      for (std::size_t m = 0; m < M; ++m) {
        std::vector<int> seen(grid.num_rules(), 0);
        for (std::size_t i = 0; i < Mm; ++i) {
          const auto rules = grid.rules_using(m, i);
          EXPECT_EQ(rules.size(), phi_size);
          for (auto r : rules) ++seen[r];
        }
        // Phi(m, .) partitions the rule set.
        for (int s : seen) EXPECT_EQ(s, 1);
      }
    }
}

TEST(Flatten, LayoutAndRoundTrip) {
  const TskModel model = random_model(3, 2, 11);
  EXPECT_EQ(model.consequent_index(0, 0), 2u * 3 * 2);
  for (std::size_t r = 0; r < model.num_rules(); ++r)
    EXPECT_EQ(model.consequent_index(r, 0), 2u * 3 * 2 + r * 4);
  EXPECT_EQ(model.center_index(1, 1), 3u);
  EXPECT_EQ(model.sigma_index(1, 1), 9u);

  const auto flat = model.flatten();
  const TskModel back = TskModel::unflatten(3, 2, flat);
  EXPECT_EQ(back, model);
}

TEST(Flatten, WrongLengthThrows) {
  std::vector<double> theta(10, 0.5);
  try {
    TskModel::unflatten(2, 2, theta);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(FiringLevels, AtCentersIsOne) {
  TskModel model(2, 2);
  model.set_mf(0, 0, {-1.0, 1.0});
  model.set_mf(0, 1, {1.0, 1.0});
  model.set_mf(1, 0, {0.5, 2.0});
  model.set_mf(1, 1, {3.0, 2.0});
  // Rule 1 is (0, 1): centers -1 and 3.
  const std::vector<double> x{-1.0, 3.0};
  EXPECT_DOUBLE_EQ(firing_levels(model, x)[1], 1.0);
}

TEST(FiringLevels, UnmaskedBoundsAndNormalization) {
  const TskModel model = random_model(3, 2, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> x{n(rng), n(rng), n(rng)};
    const auto f = firing_levels(model, x);
    const double sum = std::accumulate(f.begin(), f.end(), 0.0);
    for (double v : f) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    double normalized = 0.0;
    for (double v : f) normalized += v / sum;
    EXPECT_NEAR(normalized, 1.0, 1e-14);
  }
}

TEST(FiringLevels, RuleMaskZeroesDroppedRule) {
  const TskModel model = random_model(2, 2, 4);
  const std::vector<double> x{0.2, -0.4};
  const auto full = firing_levels(model, x);
  DropMask mask = DropMask::all_keep(DropVariant::Rule, model.grid());
  EXPECT_EQ(firing_levels(model, x, mask), full);  // all-keep is bit-identical
  mask.keep[0] = 0;
  const auto dropped = firing_levels(model, x, mask);
  EXPECT_EQ(dropped[0], 0.0);
  for (std::size_t r = 1; r < 4; ++r) EXPECT_EQ(dropped[r], full[r]);
}

// Grades mu[input][mf] = [[0.5, 0.2], [0.8, 0.1]] at x = 0, made by centering
// each MF at sqrt(-2 ln mu) with sigma 1. Dropping MF (input 0, mf 0) gives
// f = {0.8, 0.1, 0.16, 0.02} by enumerating the four grid rules.
TEST(FiringLevels, MfMaskSubstitutesOneAcrossRules) {
  const double mu[2][2] = {{0.5, 0.2}, {0.8, 0.1}};
  TskModel model(2, 2);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < 2; ++i) model.set_mf(m, i, {std::sqrt(-2.0 * std::log(mu[m][i])), 1.0});
  const std::vector<double> x{0.0, 0.0};

  DropMask mask = DropMask::all_keep(DropVariant::MF, model.grid());
  mask.keep[0] = 0;
  const auto f = firing_levels(model, x, mask);
  EXPECT_NEAR(f[0], 0.8, 1e-12);
  EXPECT_NEAR(f[1], 0.1, 1e-12);
  EXPECT_NEAR(f[2], 0.16, 1e-12);
  EXPECT_NEAR(f[3], 0.02, 1e-12);
}

TEST(FiringLevels, MembershipMaskTouchesOneRule) {
  const TskModel model = random_model(3, 2, 8);
  const std::vector<double> x{0.1, 0.7, -1.2};
  const auto full = firing_levels(model, x);
  DropMask mask = DropMask::all_keep(DropVariant::Membership, model.grid());
  mask.keep[2 * 3 + 1] = 0;  // rule 2, input 1
  const auto f = firing_levels(model, x, mask);
  for (std::size_t r = 0; r < full.size(); ++r) {
    if (r == 2) EXPECT_NE(f[r], full[r]);
    else EXPECT_EQ(f[r], full[r]);
  }
  // Dropping every slot of a rule leaves the empty product.
  for (std::size_t m = 0; m < 3; ++m) mask.keep[5 * 3 + m] = 0;
  EXPECT_EQ(firing_levels(model, std::vector<double>{9.0, -9.0, 4.0}, mask)[5], 1.0);
}

TEST(FiringLevels, MaskShapeChecked) {
  const TskModel model(2, 2);
  DropMask mask{DropVariant::Rule, {1, 1}};
  EXPECT_THROW(firing_levels(model, std::vector<double>{0.0, 0.0}, mask), Error);
}

TEST(Predict, SingleRuleReturnsRuleOutput) {
  TskModel model(2, 1);
  model.set_mf(0, 0, {0.0, 1.0});
  model.set_mf(1, 0, {0.0, 1.0});
  model.consequent(0, 0) = 0.5;
  model.consequent(0, 1) = -2.0;
  model.consequent(0, 2) = 3.0;
  const std::vector<double> x{0.3, 1.1};
  EXPECT_DOUBLE_EQ(predict(model, x), 0.5 - 2.0 * 0.3 + 3.0 * 1.1);
}

TEST(Predict, IdenticalConsequentsGiveThatPlane) {
  TskModel model = random_model(2, 3, 9);
  for (std::size_t r = 0; r < model.num_rules(); ++r) {
    model.consequent(r, 0) = 1.0;
    model.consequent(r, 1) = 2.0;
    model.consequent(r, 2) = -1.0;
  }
  const std::vector<double> x{0.4, -0.9};
  EXPECT_NEAR(predict(model, x), 1.0 + 0.8 + 0.9, 1e-12);
}

TEST(Predict, TwoMfExample) {
  TskModel model(1, 2);
  model.set_mf(0, 0, {-1.0, 1.0});
  model.set_mf(0, 1, {1.0, 1.0});
  model.consequent(1, 0) = 1.0;
  EXPECT_NEAR(predict(model, std::vector<double>{0.0}), 0.5, 1e-15);
}

TEST(Predict, ScaleInvarianceOfFiringLevels) {
  // Scaling every firing level by the same factor (shifting x far from all
  // centers by a common amount on an input with equal widths) keeps y fixed.
  TskModel model = random_model(2, 2, 21);
  model.set_mf(1, 0, {0.0, 1.0});
  model.set_mf(1, 1, {0.0, 1.0});
  for (std::size_t r = 0; r < model.num_rules(); ++r) model.consequent(r, 2) = 0.0;
  const double a = predict(model, std::vector<double>{0.3, 0.0});
  const double b = predict(model, std::vector<double>{0.3, 3.0});
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(Predict, DegenerateFiringFallsBackToMean) {
  TskModel model(1, 2);
  model.set_mf(0, 0, {0.0, kSigmaMin});
  model.set_mf(0, 1, {1.0, kSigmaMin});
  model.consequent(0, 0) = 2.0;
  model.consequent(1, 0) = 4.0;
  const std::vector<double> x{100.0};
  const auto f = firing_levels(model, x);
  ASSERT_EQ(f[0] + f[1], 0.0);
  EXPECT_DOUBLE_EQ(predict(model, x), 3.0);
}

TEST(InitModel, CentersSigmasConsequents) {
  const std::vector<FeatureStats> two{{0.0, 10.0, 3.0}};
  const TskModel m2 = init_model(two, 2);
  EXPECT_EQ(m2.mf(0, 0).center, 0.0);
  EXPECT_EQ(m2.mf(0, 1).center, 10.0);
  EXPECT_EQ(m2.mf(0, 0).sigma, 3.0);
  EXPECT_EQ(m2.mf(0, 1).sigma, 3.0);

  const TskModel m3 = init_model(two, 3);
  EXPECT_EQ(m3.mf(0, 0).center, 0.0);
  EXPECT_EQ(m3.mf(0, 1).center, 5.0);
  EXPECT_EQ(m3.mf(0, 2).center, 10.0);

  const std::vector<FeatureStats> five(5, FeatureStats{-1.0, 2.0, 0.8});
  const TskModel m5 = init_model(five, 2);
  EXPECT_EQ(m5.size(), 212u);
  for (std::size_t r = 0; r < m5.num_rules(); ++r)
    for (std::size_t j = 0; j <= 5; ++j) EXPECT_EQ(m5.consequent(r, j), 0.0);
}

TEST(InitModel, ConstantFeatureRejected) {
  const std::vector<FeatureStats> stats{{1.0, 1.0, 0.0}};
  try {
    init_model(stats, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstantFeature);
  }
}

TEST(Sigma, FloorIsEnforced) {
  TskModel model(1, 2);
  model.parameters()[model.sigma_index(0, 1)] = -3.0;
  model.clamp_sigmas();
  EXPECT_EQ(model.mf(0, 1).sigma, kSigmaMin);
}

TEST(Checkpoint, RoundTripAndHeader) {
  const auto dir = std::filesystem::path(TSK_TEST_TMPDIR);
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.txt";
  const TskModel model = random_model(3, 2, 17);
  save_checkpoint(model, path);

  std::ifstream in(path);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_EQ(l1, "M=3");
  EXPECT_EQ(l2, "Mm=2");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, model.size());

  EXPECT_EQ(load_checkpoint(path), model);
}

}  // namespace
}  // namespace tsk
