#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"
#include "ssorl/env/mdp.hpp"

namespace ssorl::env {

enum class PolicyFamily {
  kPdToGoal,          // proportional-derivative controller toward the goal
  kAlternatingStyle,  // per-episode latent style z in {-1, +1}
  kUniformRandom,
};

struct BehaviorPolicySpec {
  PolicyFamily family = PolicyFamily::kUniformRandom;
  double gain = 1.0;     // proportional gain
  double damping = 2.0;  // derivative gain
  double noise = 0.0;    // std of Gaussian action noise
  bool markovian = true;
  std::string name = "random";

  Json to_json() const;
  static BehaviorPolicySpec from_json(const Json& j);
};

std::string family_name(PolicyFamily family);
PolicyFamily parse_family(const std::string& name);

/// Quality tiers: expert (gain 1, noise 0.05), medium (gain 1, noise 0.4)
/// and uniform random actions.
BehaviorPolicySpec expert_tier();
BehaviorPolicySpec medium_tier();
BehaviorPolicySpec random_tier();
BehaviorPolicySpec alternating_style_policy();

/// Instantiates a behavior policy for `mdp`. The PD family needs the
/// PointMass goal; the alternating family needs the AlternatingStyle env.
std::unique_ptr<Policy> make_behavior_policy(const BehaviorPolicySpec& spec, const MdpSpec& mdp);

struct MixtureComponent {
  BehaviorPolicySpec policy;
  double proportion = 1.0;
};

/// Rolls out `n_trajectories` episodes from a mixture of behavior policies.
/// Per-policy counts follow the proportions (largest remainder); trajectory
/// i uses rollout seed derive_seed(seed, i) and is tagged with the index of
/// its policy in `mixture`.
Dataset generate_dataset(const MdpSpec& mdp, const std::vector<MixtureComponent>& mixture, std::size_t n_trajectories,
                         std::uint64_t seed);

/// Mean return of `spec` over `n` seeded rollouts.
double mean_policy_return(const MdpSpec& mdp, const BehaviorPolicySpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace ssorl::env
