#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "ssorl/data/resample.hpp"
#include "ssorl/data/split.hpp"
#include "ssorl/data/windows.hpp"

using namespace ssorl;
using namespace ssorl::data;
using nn::Tensor;

namespace {

// Trajectory of length T on a 1-d line, states 0..T offset by `base`, one
// reward per step so that the return is `ret`.
env::Trajectory line(std::size_t T, double base, double ret, bool labelled = true) {
  env::Trajectory tr;
  tr.states = Tensor::matrix(T + 1, 1);
  for (std::size_t i = 0; i <= T; ++i) tr.states.at(i, 0) = base + static_cast<double>(i);
  if (labelled) {
    tr.actions = Tensor::matrix(T, 1);
    for (std::size_t i = 0; i < T; ++i) tr.actions->at(i, 0) = base + 0.5 + static_cast<double>(i);
  }
  tr.rewards.assign(T, ret / static_cast<double>(T));
  tr.meta.total_return = env::sum_rewards(tr.rewards);
  return tr;
}

env::Dataset returns_dataset(const std::vector<double>& returns) {
  env::Dataset ds;
  ds.env_id = "line";
  ds.state_dim = 1;
  ds.action_dim = 1;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    auto tr = line(4, 10.0 * static_cast<double>(i), returns[i]);
    tr.meta.source_index = i;
    ds.trajectories.push_back(tr);
  }
  return ds;
}

}  // namespace

TEST(Windows, AsymmetricWithEdgePadding) {
  WindowSpec spec{2, false, PaddingMode::kRepeatEdge};
  const auto w = extract_windows({line(3, 0.0, 1.0)}, spec);
  ASSERT_EQ(w.size(), 3u);
  // t = 0: (s0, s0, s0, s1)
  EXPECT_EQ(w[0].states.storage(), (std::vector<double>{0, 0, 0, 1}));
  // t = 2: (s0, s1, s2, s3)
  EXPECT_EQ(w[2].states.storage(), (std::vector<double>{0, 1, 2, 3}));
  EXPECT_EQ(*w[1].action, std::vector<double>{1.5});
}

TEST(Windows, SymmetricWithZeroPadding) {
  WindowSpec spec{1, true, PaddingMode::kZero};
  EXPECT_EQ(spec.length(), 4u);
  const auto w = extract_windows({line(2, 5.0, 1.0)}, spec);
  ASSERT_EQ(w.size(), 2u);
  // t = 0: (pad, s0, s1, s2); t = 1: (s0, s1, s2, pad)
  EXPECT_EQ(w[0].states.storage(), (std::vector<double>{0, 5, 6, 7}));
  EXPECT_EQ(w[1].states.storage(), (std::vector<double>{5, 6, 7, 0}));
}

TEST(Windows, MatrixRejectsMixedLabelling) {
  WindowSpec spec;
  const auto m = window_matrix({line(3, 0, 1), line(2, 0, 1)}, spec, 1);
  EXPECT_EQ(m.size(), 5u);
  EXPECT_TRUE(m.has_targets());
  EXPECT_FALSE(window_matrix({line(3, 0, 1, false)}, spec, 1).has_targets());
  EXPECT_THROW(window_matrix({line(3, 0, 1), line(3, 0, 1, false)}, spec, 1), std::invalid_argument);
  const auto both = WindowMatrix::concat(m, m.select({4, 0}));
  EXPECT_EQ(both.size(), 7u);
  EXPECT_EQ(both.t[5], 1u);
}

TEST(Split, PercentileNearestRank) {
  const auto ds = returns_dataset({5, 1, 4, 2, 3});
  EXPECT_DOUBLE_EQ(return_percentile(ds, 40), 2.0);
  EXPECT_DOUBLE_EQ(return_percentile(ds, 100), 5.0);
  EXPECT_DOUBLE_EQ(return_percentile(ds, 30), 2.0);
  EXPECT_EQ(return_order(ds), (std::vector<std::size_t>{1, 3, 4, 2, 0}));
}

TEST(Split, CoupledRespectsPercentileAndFraction) {
  std::vector<double> r(100);
  std::iota(r.begin(), r.end(), 0.0);
  const auto ds = returns_dataset(r);
  const auto s = coupled_split(ds, 30, 0.1, 7);
  EXPECT_EQ(s.labelled.size(), 10u);
  EXPECT_EQ(s.unlabelled.size(), 90u);
  for (std::size_t i : s.labelled_indices) EXPECT_LE(r[i], return_percentile(ds, 30));
  std::set<std::size_t> all(s.labelled_indices.begin(), s.labelled_indices.end());
  all.insert(s.unlabelled_indices.begin(), s.unlabelled_indices.end());
  EXPECT_EQ(all.size(), 100u);
  for (const auto& t : s.unlabelled.trajectories) EXPECT_FALSE(t.labelled());
  EXPECT_TRUE(std::is_sorted(s.labelled_indices.begin(), s.labelled_indices.end()));
  EXPECT_EQ(coupled_split(ds, 30, 0.1, 7).labelled_indices, s.labelled_indices);
  // 20 labelled from the bottom 10 trajectories is impossible.
  EXPECT_THROW(coupled_split(ds, 10, 0.2, 7), std::invalid_argument);
}

TEST(Split, DecoupledSameTercileIsDisjoint) {
  std::vector<double> r(30);
  std::iota(r.begin(), r.end(), 0.0);
  const auto ds = returns_dataset(r);
  const auto t = return_terciles(ds);
  EXPECT_EQ(t[0].size(), 10u);
  const auto s = decoupled_split(ds, ReturnGroup::kHigh, 4, ReturnGroup::kHigh, 6, 3);
  std::set<std::size_t> seen;
  for (std::size_t i : s.labelled_indices) seen.insert(i);
  for (std::size_t i : s.unlabelled_indices) EXPECT_TRUE(seen.insert(i).second);
  for (std::size_t i : seen) EXPECT_GE(i, 20u);
  EXPECT_THROW(decoupled_split(ds, ReturnGroup::kHigh, 5, ReturnGroup::kHigh, 6, 3), std::invalid_argument);
  EXPECT_EQ(parse_group("med"), ReturnGroup::kMed);
}

TEST(Split, MergeAndTrainVal) {
  const auto ds = returns_dataset({1, 2, 3});
  EXPECT_THROW(merge_with_proxy(ds, strip_actions(ds), 1), std::invalid_argument);
  EXPECT_EQ(merge_with_proxy(ds, ds, 1).size(), 6u);
  const auto tv = train_val_split(10, 0.2, 4);
  EXPECT_EQ(tv.val.size(), 2u);
  EXPECT_EQ(tv.train.size(), 8u);
  EXPECT_THROW(train_val_split(2, 0.1, 4), std::invalid_argument);
}

TEST(Resample, NinetyTenBecomesFiftyFifty) {
  std::vector<double> r(100, 0.0);
  for (std::size_t i = 90; i < 100; ++i) r[i] = 1.0;
  const auto ds = returns_dataset(r);
  const auto bins = return_bins(ds, 2);
  EXPECT_EQ(std::count(bins.begin(), bins.end(), 1u), 10);
  const auto mass = bin_sampling_mass(bins, 2, BinWeighting::kUniformBins);
  EXPECT_DOUBLE_EQ(mass[0], 0.5);
  EXPECT_DOUBLE_EQ(mass[1], 0.5);
  const auto out = resample_balanced(ds, 2, 20000, 11);
  std::size_t high = 0;
  for (const auto& t : out.trajectories) high += t.meta.total_return > 0.5;
  // Binomial(20000, 0.5): sd ~ 71, so 4 sd is about 0.014.
  EXPECT_NEAR(static_cast<double>(high) / 20000.0, 0.5, 0.015);
  EXPECT_GT(bin_entropy(return_bins(out, 2), 2), bin_entropy(bins, 2));
}

TEST(Resample, EqualReturnsAndEmptyBins) {
  const auto same = returns_dataset({2, 2, 2});
  for (std::size_t b : return_bins(same, 4)) EXPECT_EQ(b, 0u);
  const auto bins = return_bins(std::vector<double>{0, 0, 10}, 5, 0, 10);
  const auto mass = bin_sampling_mass(bins, 5, BinWeighting::kUniformBins);
  EXPECT_DOUBLE_EQ(mass[2], 0.0);
  EXPECT_DOUBLE_EQ(mass[0] + mass[4], 1.0);
  const auto inv = bin_sampling_mass(bins, 5, BinWeighting::kInverseCount);
  EXPECT_NEAR(std::accumulate(inv.begin(), inv.end(), 0.0), 1.0, 1e-15);
}
