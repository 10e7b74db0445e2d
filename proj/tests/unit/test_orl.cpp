#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ssorl/data/split.hpp"
#include "ssorl/env/mdp.hpp"
#include "ssorl/env/policies.hpp"
#include "ssorl/orl/agent.hpp"

using namespace ssorl;
using namespace ssorl::orl;

namespace {

const env::MdpSpec& pointmass() {
  static const env::MdpSpec mdp = env::make_env("pointmass");
  return mdp;
}

env::Dataset tiny_data() {
  return env::generate_dataset(pointmass(), {{env::medium_tier(), 0.5}, {env::random_tier(), 0.5}}, 6, 3);
}

TrainerConfig tiny(Algorithm a) {
  auto c = TrainerConfig::defaults_for(a);
  c.budget = 30;
  c.batch_size = 16;
  c.log_every = 10;
  c.actor_hidden = {16};
  c.critic_hidden = {16};
  c.n_action_samples = 3;
  c.context = 4;
  c.layers = 1;
  c.d_model = 8;
  return c;
}

class EveryTrainer : public ::testing::TestWithParam<Algorithm> {};

}  // namespace

TEST_P(EveryTrainer, DeterministicGivenSeed) {
  const auto ds = tiny_data();
  const auto a = train_agent(ds, tiny(GetParam()), 4);
  const auto b = train_agent(ds, tiny(GetParam()), 4);
  EXPECT_TRUE(a.actor == b.actor);
  EXPECT_TRUE(a.critic == b.critic);
  EXPECT_EQ(a.metrics, b.metrics);
  EXPECT_EQ(a.metrics.size(), 3u);
  const auto c = train_agent(ds, tiny(GetParam()), 5);
  EXPECT_FALSE(a.actor == c.actor);
  const auto e1 = evaluate_agent(a, pointmass(), 2, 9);
  const auto e2 = evaluate_agent(b, pointmass(), 2, 9);
  EXPECT_EQ(e1.returns, e2.returns);
}

TEST_P(EveryTrainer, SaveLoadReproducesPolicy) {
  const auto agent = train_agent(tiny_data(), tiny(GetParam()), 1);
  const auto path = std::filesystem::temp_directory_path() / ("ssorl_test_agent_" + algorithm_name(GetParam()));
  save_agent(path, agent);
  const auto back = load_agent(path);
  EXPECT_EQ(evaluate_agent(back, pointmass(), 2, 7).returns, evaluate_agent(agent, pointmass(), 2, 7).returns);
  EXPECT_EQ(back.metadata(), agent.metadata());
  // A tampered config no longer matches its hash.
  const auto meta_path = std::filesystem::path(path.string() + ".json");
  Json meta;
  std::ifstream(meta_path) >> meta;
  meta["config"]["budget"] = 31;
  std::ofstream(meta_path) << meta.dump();
  EXPECT_THROW(load_agent(path), std::runtime_error);
  std::filesystem::remove(path);
  std::filesystem::remove(meta_path);
}

INSTANTIATE_TEST_SUITE_P(Orl, EveryTrainer, ::testing::Values(Algorithm::kTd3bc, Algorithm::kCql, Algorithm::kDt),
                         [](const auto& info) { return algorithm_name(info.param); });

TEST(Trainers, RejectUnlabelledInputAndJointDispatch) {
  const auto ds = tiny_data();
  EXPECT_THROW(train_agent(data::strip_actions(ds), tiny(Algorithm::kTd3bc), 1), std::invalid_argument);
  EXPECT_THROW(train_agent(ds, tiny(Algorithm::kDtJoint), 1), std::invalid_argument);
}

TEST(TrainerConfig, JsonRoundTrip) {
  auto c = tiny(Algorithm::kCql);
  c.min_q_weight = 1.5;
  const auto back = TrainerConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(parse_algorithm("dt-joint"), Algorithm::kDtJoint);
  EXPECT_THROW(parse_algorithm("iql"), std::invalid_argument);
}

TEST(Transitions, NormalizerAndBootstrapFlag) {
  const auto ds = tiny_data();
  const auto norm = StateNormalizer::fit(ds);
  const auto td = flatten_transitions(ds, norm);
  EXPECT_EQ(td.size(), ds.transition_count());
  for (double v : td.not_done.values()) EXPECT_EQ(v, 1.0);
  double m0 = 0.0;
  for (std::size_t i = 0; i < td.size(); ++i) m0 += td.states.at(i, 0);
  // Fitted on all states (terminal ones too), so the transition mean is near 0.
  EXPECT_NEAR(m0 / static_cast<double>(td.size()), 0.0, 0.1);
  EXPECT_EQ(StateNormalizer::from_json(norm.to_json()).to_json(), norm.to_json());
}
