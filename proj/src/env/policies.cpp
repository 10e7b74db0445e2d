#include "ssorl/env/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ssorl::env {

std::string family_name(PolicyFamily family) {
  switch (family) {
    case PolicyFamily::kPdToGoal: return "pd";
    case PolicyFamily::kAlternatingStyle: return "alternating";
    case PolicyFamily::kUniformRandom: return "random";
  }
  return "unknown";
}

PolicyFamily parse_family(const std::string& name) {
  if (name == "pd") return PolicyFamily::kPdToGoal;
  if (name == "alternating") return PolicyFamily::kAlternatingStyle;
  if (name == "random") return PolicyFamily::kUniformRandom;
  throw std::invalid_argument("unknown policy family '" + name + "'");
}

Json BehaviorPolicySpec::to_json() const {
  return Json{{"family", family_name(family)},
              {"gain", gain},
              {"damping", damping},
              {"noise", noise},
              {"markovian", markovian},
              {"name", name}};
}

BehaviorPolicySpec BehaviorPolicySpec::from_json(const Json& j) {
  if (j.is_string()) {
    const auto tier = j.get<std::string>();
    if (tier == "expert") return expert_tier();
    if (tier == "medium") return medium_tier();
    if (tier == "random") return random_tier();
    if (tier == "alternating") return alternating_style_policy();
    throw std::invalid_argument("unknown policy tier '" + tier + "'");
  }
  BehaviorPolicySpec s;
  s.family = parse_family(j.value("family", std::string("random")));
  s.gain = j.value("gain", s.gain);
  s.damping = j.value("damping", s.damping);
  s.noise = j.value("noise", s.noise);
  s.markovian = j.value("markovian", s.markovian);
  s.name = j.value("name", family_name(s.family));
  return s;
}

BehaviorPolicySpec expert_tier() { return {PolicyFamily::kPdToGoal, 1.0, 2.0, 0.05, true, "expert"}; }
BehaviorPolicySpec medium_tier() { return {PolicyFamily::kPdToGoal, 1.0, 2.0, 0.4, true, "medium"}; }
BehaviorPolicySpec random_tier() { return {PolicyFamily::kUniformRandom, 1.0, 2.0, 0.0, true, "random"}; }
BehaviorPolicySpec alternating_style_policy() {
  return {PolicyFamily::kAlternatingStyle, 1.0, 2.0, 0.0, false, "alternating"};
}

namespace {

class PdPolicy final : public Policy {
 public:
  PdPolicy(const BehaviorPolicySpec& spec, std::array<double, 2> goal) : spec_(spec), goal_(goal) {}

  void reset(std::span<const double>, Rng&) override { drift_ = {0.0, 0.0}; }

  Vec act(std::span<const double> s, Rng& rng) override {
    Vec a(2);
    for (std::size_t i = 0; i < 2; ++i) {
      double eps = spec_.noise * rng.normal();
      // Non-Markovian variant: autocorrelated noise carried across steps.
      if (!spec_.markovian) eps = drift_[i] = 0.8 * drift_[i] + 0.6 * eps;
      a[i] = std::clamp(spec_.gain * (goal_[i] - s[i]) - spec_.damping * s[2 + i] + eps, -1.0, 1.0);
    }
    return a;
  }

 private:
  BehaviorPolicySpec spec_;
  std::array<double, 2> goal_;
  std::array<double, 2> drift_{0.0, 0.0};
};

class AlternatingStylePolicy final : public Policy {
 public:
  void reset(std::span<const double>, Rng& rng) override { z_ = rng.uniform() < 0.5 ? -1.0 : 1.0; }
  Vec act(std::span<const double> s, Rng& rng) override {
    if (s[1] == 0.0) return {z_, 0.0};
    return {rng.uniform(-1.0, 1.0), z_};
  }

 private:
  double z_ = 1.0;
};

class UniformPolicy final : public Policy {
 public:
  UniformPolicy(std::size_t dim, double lo, double hi) : dim_(dim), lo_(lo), hi_(hi) {}
  Vec act(std::span<const double>, Rng& rng) override {
    Vec a(dim_);
    for (double& v : a) v = rng.uniform(lo_, hi_);
    return a;
  }

 private:
  std::size_t dim_;
  double lo_, hi_;
};

}  // namespace

std::unique_ptr<Policy> make_behavior_policy(const BehaviorPolicySpec& spec, const MdpSpec& mdp) {
  switch (spec.family) {
    case PolicyFamily::kPdToGoal: {
      if (mdp.id != "pointmass") throw std::invalid_argument("pd policy requires the pointmass environment");
      const auto& g = mdp.params.at("goal");
      return std::make_unique<PdPolicy>(spec, std::array<double, 2>{g.at(0).get<double>(), g.at(1).get<double>()});
    }
    case PolicyFamily::kAlternatingStyle:
      if (mdp.id != "alternating") throw std::invalid_argument("alternating policy requires the alternating environment");
      return std::make_unique<AlternatingStylePolicy>();
    case PolicyFamily::kUniformRandom:
      return std::make_unique<UniformPolicy>(mdp.action_dim, mdp.action_low, mdp.action_high);
  }
  throw std::invalid_argument("unknown policy family");
}

Dataset generate_dataset(const MdpSpec& mdp, const std::vector<MixtureComponent>& mixture, std::size_t n_trajectories,
                         std::uint64_t seed) {
  if (n_trajectories == 0) throw std::invalid_argument("generate_dataset: n_trajectories must be positive");
  if (mixture.empty()) throw std::invalid_argument("generate_dataset: empty policy mixture");
  double total = 0.0;
  for (const auto& c : mixture) {
    if (c.proportion < 0.0) throw std::invalid_argument("generate_dataset: negative proportion");
    total += c.proportion;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("generate_dataset: proportions must sum to 1");

  // Largest-remainder apportionment; ties go to the earlier component.
  std::vector<std::size_t> counts(mixture.size());
  std::vector<double> remainder(mixture.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    const double exact = mixture[i].proportion * static_cast<double>(n_trajectories);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(mixture.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n_trajectories; ++i, ++assigned) ++counts[order[i % order.size()]];

  Dataset ds;
  ds.env_id = mdp.id;
  ds.state_dim = mdp.state_dim;
  ds.action_dim = mdp.action_dim;
  Json policies = Json::array();
  for (const auto& c : mixture) policies.push_back({{"policy", c.policy.to_json()}, {"proportion", c.proportion}});
  ds.provenance = {{"generator", {{"env_params", mdp.params}, {"mixture", policies}, {"n", n_trajectories}, {"seed", seed}}}};
  ds.trajectories.reserve(n_trajectories);
  std::size_t index = 0;
  for (std::size_t p = 0; p < mixture.size(); ++p) {
    auto policy = make_behavior_policy(mixture[p].policy, mdp);
    for (std::size_t c = 0; c < counts[p]; ++c, ++index) {
      Trajectory traj = rollout(mdp, *policy, derive_seed(seed, index));
      traj.meta.policy_id = static_cast<std::int64_t>(p);
      traj.meta.source_index = index;
      ds.trajectories.push_back(std::move(traj));
    }
  }
  return ds;
}

double mean_policy_return(const MdpSpec& mdp, const BehaviorPolicySpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("mean_policy_return: n must be positive");
  auto policy = make_behavior_policy(spec, mdp);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += rollout(mdp, *policy, derive_seed(seed, i)).meta.total_return;
  return total / static_cast<double>(n);
}

}  // namespace ssorl::env
