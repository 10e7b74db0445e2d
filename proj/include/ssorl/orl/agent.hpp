#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "ssorl/env/mdp.hpp"
#include "ssorl/nn/param_set.hpp"
#include "ssorl/orl/common.hpp"

namespace ssorl::orl {

/// Output of any trainer: enough to rebuild the evaluation policy.
struct TrainedAgent {
  Algorithm algorithm = Algorithm::kTd3bc;
  TrainerConfig config;
  std::uint64_t seed = 0;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  StateNormalizer normalizer;
  nn::ParamSet actor;   // policy (sequence model for DT variants)
  nn::ParamSet critic;  // twin critics; empty for DT variants
  Json extra = Json::object();
  /// Loss records, one object per logged iteration.
  Json metrics = Json::array();

  /// Deterministic evaluation policy (mean actions). DT variants condition
  /// on config.eval_rtg, or the environment's expert reference when unset.
  std::unique_ptr<env::Policy> make_policy(const env::MdpSpec& mdp) const;

  Json metadata() const;
};

/// Checkpoint at `path` (actor then critic parameters, prefixed) plus a JSON
/// sidecar `<path>.json` carrying the algorithm tag and config hash.
void save_agent(const std::filesystem::path& path, const TrainedAgent& agent);
TrainedAgent load_agent(const std::filesystem::path& path);

/// Per-iteration loss records as JSON lines.
void write_metrics_jsonl(const std::filesystem::path& path, const TrainedAgent& agent);

struct EvalResult {
  std::vector<double> returns;
  std::vector<double> normalized;
};

/// n_episodes rollouts of the agent's mean-action policy; episode i uses
/// seed derive_seed(seed, i).
EvalResult evaluate_agent(const TrainedAgent& agent, const env::MdpSpec& mdp, std::size_t n_episodes = 30,
                          std::uint64_t seed = 0);
/// Same for any policy (behavior baselines).
EvalResult evaluate_policy(env::Policy& policy, const env::MdpSpec& mdp, std::size_t n_episodes, std::uint64_t seed);

/// Dispatch on config.algorithm for trainers that take one combined dataset.
/// DT-Joint needs train_dt_joint.
TrainedAgent train_agent(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed);

}  // namespace ssorl::orl
