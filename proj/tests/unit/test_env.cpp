#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "ssorl/env/alternating.hpp"
#include "ssorl/env/dataset_io.hpp"
#include "ssorl/env/finite_grid.hpp"
#include "ssorl/env/mdp.hpp"
#include "ssorl/env/pointmass.hpp"
#include "ssorl/env/policies.hpp"

using namespace ssorl;
using namespace ssorl::env;

TEST(PointMass, StepByHand) {
  PointMassParams p;
  const double s[4] = {0.0, 0.0, 0.0, 0.0};
  const double a[2] = {1.0, -1.0};
  const auto r = pointmass_transition(p, s, a);
  EXPECT_NEAR(r.next_state[0], 0.01, 1e-15);
  EXPECT_NEAR(r.next_state[1], -0.01, 1e-15);
  EXPECT_NEAR(r.next_state[2], 0.1, 1e-15);
  EXPECT_NEAR(r.next_state[3], -0.1, 1e-15);
  EXPECT_NEAR(r.reward, std::exp(-std::hypot(0.99, 1.01)), 1e-15);
}

TEST(PointMass, VelocityAndArenaClamp) {
  PointMassParams p;
  const double s[4] = {1.99, 0.0, 0.95, 0.0};
  const double a[2] = {1.0, 0.0};
  const auto r = pointmass_transition(p, s, a);
  EXPECT_DOUBLE_EQ(r.next_state[2], 1.0);
  EXPECT_DOUBLE_EQ(r.next_state[0], 2.0);
  p.negative_reward = true;
  EXPECT_LT(pointmass_transition(p, s, a).reward, 0.0);
}

TEST(PointMass, StepClampsActionsAndRejectsNan) {
  const auto mdp = make_pointmass();
  const double s[4] = {0, 0, 0, 0};
  const double big[2] = {5.0, -5.0};
  const double unit[2] = {1.0, -1.0};
  EXPECT_EQ(step(mdp, s, big).next_state, step(mdp, s, unit).next_state);
  const double bad[2] = {std::nan(""), 0.0};
  EXPECT_THROW(step(mdp, s, bad), std::domain_error);
}

TEST(PointMass, ReferencesOrderedAndNormalize) {
  const auto mdp = make_pointmass();
  EXPECT_GT(mdp.expert_ref, mdp.random_ref);
  EXPECT_DOUBLE_EQ(mdp.normalize(mdp.random_ref), 0.0);
  EXPECT_DOUBLE_EQ(mdp.normalize(mdp.expert_ref), 1.0);
}

TEST(Rollout, DeterministicAndConsistent) {
  const auto mdp = make_pointmass();
  auto pol = make_behavior_policy(medium_tier(), mdp);
  const auto a = rollout(mdp, *pol, 42);
  const auto b = rollout(mdp, *pol, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.length(), mdp.horizon);
  EXPECT_EQ(a.states.rows(), mdp.horizon + 1);
  EXPECT_NO_THROW(a.validate());
  EXPECT_NE(a, rollout(mdp, *pol, 43));
}

TEST(Policies, TierParsingAndEnvChecks) {
  EXPECT_EQ(BehaviorPolicySpec::from_json("expert").noise, expert_tier().noise);
  const auto spec = BehaviorPolicySpec::from_json(medium_tier().to_json());
  EXPECT_EQ(spec.to_json(), medium_tier().to_json());
  EXPECT_THROW(BehaviorPolicySpec::from_json("legendary"), std::invalid_argument);
  EXPECT_THROW(make_behavior_policy(alternating_style_policy(), make_pointmass()), std::invalid_argument);
}

TEST(Policies, MixtureCountsLargestRemainder) {
  const auto mdp = make_pointmass();
  std::vector<MixtureComponent> mix{{medium_tier(), 0.5}, {expert_tier(), 0.3}, {random_tier(), 0.2}};
  const auto ds = generate_dataset(mdp, mix, 11, 5);
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& t : ds.trajectories) ++counts[t.meta.policy_id];
  // 5.5 / 3.3 / 2.2 -> floors 5/3/2, the leftover goes to the largest remainder.
  EXPECT_EQ(counts[0], 6u);
  EXPECT_EQ(counts[1], 3u);
  EXPECT_EQ(counts[2], 2u);
  mix[0].proportion = 0.6;
  EXPECT_THROW(generate_dataset(mdp, mix, 10, 5), std::invalid_argument);
}

TEST(Alternating, DeadChannelHasNoEffect) {
  const auto mdp = make_alternating();
  const double s[2] = {0.3, 0.0};
  const double a1[2] = {0.5, -1.0};
  const double a2[2] = {0.5, 1.0};
  EXPECT_EQ(step(mdp, s, a1).next_state, step(mdp, s, a2).next_state);
  EXPECT_NEAR(step(mdp, s, a1).next_state[0], 0.35, 1e-15);
  const double odd[2] = {0.3, 1.0};
  EXPECT_DOUBLE_EQ(step(mdp, odd, a1).next_state[0], 0.5);
}

TEST(Alternating, OracleDecidesStyleFromDisplacement) {
  // k = 1 window (s_{t-1}, s_t, s_{t+1}) at an odd t after an even step of +dt.
  const double w[6] = {0.2, 0.0, 0.3, 1.0, -0.4, 0.0};
  const auto o = alternating_style_oracle(w, 1);
  EXPECT_DOUBLE_EQ(o.posterior_plus, 1.0);
  EXPECT_DOUBLE_EQ(o.mse, 0.0);
  // k = 0 sees only (s_t, s_{t+1}): both styles possible for interior x.
  const double w0[4] = {0.3, 1.0, -0.4, 0.0};
  const auto o0 = alternating_style_oracle(w0, 0);
  EXPECT_DOUBLE_EQ(o0.posterior_plus, 0.5);
  EXPECT_DOUBLE_EQ(o0.mse, 1.0);
  EXPECT_THROW(alternating_style_oracle(w0, 1), std::invalid_argument);
}

TEST(FiniteGrid, RowsAreDistributions) {
  const auto mdp = make_finite_grid({3, 2, 0.3});
  EXPECT_NO_THROW(mdp.validate());
  // Corner state 0, action "up" (into the wall): stays with 0.7 + 0.3 * 2/4.
  EXPECT_NEAR(mdp.prob(0, 0, 0), 0.85, 1e-15);
  EXPECT_THROW(make_finite_grid({3, 3, 1.5}), std::invalid_argument);
}

TEST(FiniteGrid, ExactPosteriorMatchesLocalForMarkovPolicy) {
  Rng rng(1);
  const auto mdp = make_finite_grid();
  const auto beta = BehaviorTable::random(9, 4, 0, rng);
  const std::size_t states[4] = {4, 5, 5, 2};
  const auto exact = exact_action_posterior(mdp, beta, states, 1);
  const auto local = local_action_posterior(mdp, beta, 5, 5);
  for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(exact[a], local[a], 1e-12);
}

TEST(FiniteGrid, NonMarkovPolicyBreaksLocality) {
  Rng rng(2);
  const auto mdp = make_finite_grid();
  const auto beta = BehaviorTable::random(9, 4, 1, rng);
  // Under an order-1 table the posterior depends on s_{t-1}.
  const std::size_t s1[3] = {3, 4, 5};
  const std::size_t s2[3] = {1, 4, 5};
  const auto p1 = exact_action_posterior(mdp, beta, s1, 1);
  const auto p2 = exact_action_posterior(mdp, beta, s2, 1);
  double diff = 0.0;
  for (std::size_t a = 0; a < 4; ++a) diff = std::max(diff, std::abs(p1[a] - p2[a]));
  EXPECT_GT(diff, 1e-6);
}

TEST(FiniteGrid, ZeroProbabilitySequenceThrows) {
  Rng rng(3);
  const auto mdp = make_finite_grid({3, 3, 0.0});
  const auto beta = BehaviorTable::random(9, 4, 0, rng);
  const std::size_t jump[2] = {0, 8};
  EXPECT_THROW(exact_action_posterior(mdp, beta, jump, 0), std::invalid_argument);
}

namespace {
Dataset small_dataset() {
  const auto mdp = make_pointmass();
  std::vector<MixtureComponent> mix{{medium_tier(), 0.5}, {random_tier(), 0.5}};
  auto ds = generate_dataset(mdp, mix, 4, 9);
  ds.trajectories[1] = ds.trajectories[1].stripped();
  return ds;
}
}  // namespace

TEST(DatasetIo, BinaryRoundTripIsExact) {
  const auto ds = small_dataset();
  std::stringstream ss;
  write_dataset(ss, ds);
  const auto back = read_dataset(ss);
  EXPECT_EQ(back.env_id, ds.env_id);
  EXPECT_EQ(back.provenance, ds.provenance);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back.trajectories[i], ds.trajectories[i]);
  EXPECT_FALSE(back.trajectories[1].labelled());
}

TEST(DatasetIo, JsonlRoundTripIsExact) {
  const auto ds = small_dataset();
  const auto path = std::filesystem::temp_directory_path() / "ssorl_test_ds.jsonl";
  export_jsonl(path, ds);
  const auto back = import_jsonl(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back.trajectories[i], ds.trajectories[i]);
}

TEST(DatasetIo, RejectsGarbage) {
  std::stringstream bad("SSTRAJ0 nonsense");
  EXPECT_THROW(read_dataset(bad), std::exception);
  EXPECT_THROW(load_dataset("/nonexistent/ds.bin"), std::exception);
}
