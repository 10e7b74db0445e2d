#include "ssorl/orl/agent.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "ssorl/nn/checkpoint.hpp"
#include "ssorl/nn/layers.hpp"
#include "ssorl/orl/cql.hpp"
#include "ssorl/orl/dt.hpp"
#include "ssorl/orl/td3bc.hpp"

namespace ssorl::orl {

namespace {

std::vector<std::size_t> sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

// Markovian mean-action policy around a graph-free actor evaluation.
class MlpPolicy final : public env::Policy {
 public:
  MlpPolicy(nn::Mlp net, nn::ParamSet params, StateNormalizer normalizer, std::size_t action_dim, bool squash_mean)
      : net_(std::move(net)),
        params_(std::move(params)),
        normalizer_(std::move(normalizer)),
        action_dim_(action_dim),
        squash_(squash_mean) {}

  env::Vec act(std::span<const double> state, Rng&) override {
    const auto s = normalizer_.apply(state);
    const Tensor out = net_.evaluate(params_, Tensor::row(s));
    env::Vec a(action_dim_);
    for (std::size_t i = 0; i < action_dim_; ++i) a[i] = squash_ ? std::tanh(out[i]) : out[i];
    return a;
  }

 private:
  nn::Mlp net_;
  nn::ParamSet params_;
  StateNormalizer normalizer_;
  std::size_t action_dim_;
  bool squash_;
};

nn::ParamSet with_prefix(const nn::ParamSet& src, const std::string& prefix, nn::ParamSet into) {
  for (const auto& e : src.entries()) into.add(prefix + e.name, e.value);
  return into;
}

nn::ParamSet strip_prefix(const nn::ParamSet& src, const std::string& prefix) {
  nn::ParamSet out;
  for (const auto& e : src.entries()) {
    if (e.name.rfind(prefix, 0) == 0) out.add(e.name.substr(prefix.size()), e.value);
  }
  return out;
}

}  // namespace

std::unique_ptr<env::Policy> TrainedAgent::make_policy(const env::MdpSpec& mdp) const {
  if (mdp.state_dim != state_dim || mdp.action_dim != action_dim) {
    throw std::invalid_argument("make_policy: agent dimensions do not match environment " + mdp.id);
  }
  switch (algorithm) {
    case Algorithm::kTd3bc:
      return std::make_unique<MlpPolicy>(
          nn::Mlp("actor", sizes(state_dim, config.actor_hidden, action_dim), nn::Activation::kRelu, nn::Activation::kTanh),
          actor, normalizer, action_dim, false);
    case Algorithm::kCql:
      return std::make_unique<MlpPolicy>(nn::Mlp("actor", sizes(state_dim, config.actor_hidden, 2 * action_dim)), actor,
                                         normalizer, action_dim, true);
    case Algorithm::kDt:
    case Algorithm::kDtJoint:
      return make_dt_policy(*this, std::isnan(config.eval_rtg) ? mdp.expert_ref : config.eval_rtg);
  }
  throw std::logic_error("make_policy: unknown algorithm");
}

Json TrainedAgent::metadata() const {
  const Json cfg = config.to_json();
  return Json{{"kind", "agent"},
              {"algorithm", algorithm_name(algorithm)},
              {"config", cfg},
              {"config_hash", json_hash(cfg)},
              {"seed", seed},
              {"state_dim", state_dim},
              {"action_dim", action_dim},
              {"normalizer", normalizer.to_json()},
              {"extra", extra}};
}

void save_agent(const std::filesystem::path& path, const TrainedAgent& agent) {
  nn::ParamSet all = with_prefix(agent.actor, "actor/", {});
  all = with_prefix(agent.critic, "critic/", std::move(all));
  nn::save_checkpoint(path, all);
  write_json_file(std::filesystem::path(path.string() + ".json"), agent.metadata());
}

TrainedAgent load_agent(const std::filesystem::path& path) {
  const Json meta = read_json_file(std::filesystem::path(path.string() + ".json"));
  if (meta.value("kind", std::string()) != "agent") throw std::runtime_error("load_agent: " + path.string() + " is not an agent");
  TrainedAgent agent;
  agent.algorithm = parse_algorithm(meta.at("algorithm").get<std::string>());
  agent.config = TrainerConfig::from_json(meta.at("config"));
  if (json_hash(agent.config.to_json()) != meta.at("config_hash").get<std::string>()) {
    throw std::runtime_error("load_agent: config hash mismatch in " + path.string());
  }
  agent.seed = meta.at("seed").get<std::uint64_t>();
  agent.state_dim = meta.at("state_dim").get<std::size_t>();
  agent.action_dim = meta.at("action_dim").get<std::size_t>();
  agent.normalizer = StateNormalizer::from_json(meta.at("normalizer"));
  agent.extra = meta.at("extra");
  const nn::ParamSet all = nn::load_checkpoint(path);
  agent.actor = strip_prefix(all, "actor/");
  agent.critic = strip_prefix(all, "critic/");
  return agent;
}

void write_metrics_jsonl(const std::filesystem::path& path, const TrainedAgent& agent) {
  std::string text;
  for (const auto& record : agent.metrics) text += record.dump() + "\n";
  write_text_file(path, text);
}

EvalResult evaluate_policy(env::Policy& policy, const env::MdpSpec& mdp, std::size_t n_episodes, std::uint64_t seed) {
  if (n_episodes == 0) throw std::invalid_argument("evaluate: n_episodes must be positive");
  EvalResult r;
  for (std::size_t i = 0; i < n_episodes; ++i) {
    const double ret = env::rollout(mdp, policy, derive_seed(seed, i)).meta.total_return;
    r.returns.push_back(ret);
    r.normalized.push_back(mdp.normalize(ret));
  }
  return r;
}

EvalResult evaluate_agent(const TrainedAgent& agent, const env::MdpSpec& mdp, std::size_t n_episodes, std::uint64_t seed) {
  auto policy = agent.make_policy(mdp);
  return evaluate_policy(*policy, mdp, n_episodes, seed);
}

TrainedAgent train_agent(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::kTd3bc: return train_td3bc(combined, config, seed);
    case Algorithm::kCql: return train_cql(combined, config, seed);
    case Algorithm::kDt: return train_dt(combined, config, seed);
    case Algorithm::kDtJoint:
      throw std::invalid_argument("train_agent: dt-joint needs separate labelled and unlabelled sets");
  }
  throw std::logic_error("train_agent: unknown algorithm");
}

}  // namespace ssorl::orl
