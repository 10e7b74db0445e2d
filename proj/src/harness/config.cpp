#include "ssorl/harness/config.hpp"

#include <cmath>
#include <stdexcept>

namespace ssorl::harness {

Role parse_role(const std::string& name) {
  if (name == "baseline") return Role::kBaseline;
  if (name == "ss") return Role::kSs;
  if (name == "oracle") return Role::kOracle;
  throw std::invalid_argument("unknown role '" + name + "'");
}

std::string role_name(Role role) {
  switch (role) {
    case Role::kBaseline: return "baseline";
    case Role::kSs: return "ss";
    case Role::kOracle: return "oracle";
  }
  return "unknown";
}

namespace {

std::vector<env::MixtureComponent> default_mixture() {
  return {{env::medium_tier(), 0.5}, {env::expert_tier(), 0.3}, {env::random_tier(), 0.2}};
}

std::string reduction_name(selftrain::Reduction r) { return r == selftrain::Reduction::kMax ? "max" : "mean"; }

}  // namespace

Json ExperimentConfig::to_json() const {
  Json mixture = Json::array();
  for (const auto& c : data.mixture) mixture.push_back({{"policy", c.policy.to_json()}, {"proportion", c.proportion}});
  Json split_j = {{"protocol", split.protocol}};
  if (split.protocol == "coupled") {
    split_j["q"] = split.q;
    split_j["label_frac"] = split.label_frac;
  } else {
    split_j["labelled_group"] = data::group_name(split.labelled_group);
    split_j["unlabelled_group"] = data::group_name(split.unlabelled_group);
    split_j["n_labelled"] = split.n_labelled;
    split_j["n_unlabelled"] = split.n_unlabelled;
  }
  Json data_j = {{"n_trajectories", data.n_trajectories}, {"mixture", mixture}};
  if (!data.path.empty()) data_j["path"] = data.path;
  return Json{{"name", name},
              {"env", {{"id", env_id}, {"params", env_params}}},
              {"data", data_j},
              {"split", split_j},
              {"idm", idm.to_json()},
              {"labelling",
               {{"mode", labelling.mode},
                {"members", labelling.members},
                {"rounds", labelling.rounds},
                {"reduction", reduction_name(labelling.reduction)}}},
              {"trainer", trainer.to_json()},
              {"role", role_name(role)},
              {"seeds", seeds},
              {"eval_episodes", eval_episodes},
              {"stats", {{"reps", stats.reps}, {"level", stats.level}, {"seed", stats.seed}}},
              {"output_dir", output_dir}};
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  if (j.contains("env")) {
    const auto& e = j["env"];
    if (e.is_string()) {
      c.env_id = e.get<std::string>();
    } else {
      c.env_id = e.value("id", c.env_id);
      c.env_params = e.value("params", Json::object());
    }
  }
  c.data.mixture = default_mixture();
  if (j.contains("data")) {
    const auto& d = j["data"];
    c.data.n_trajectories = d.value("n_trajectories", c.data.n_trajectories);
    c.data.path = d.value("path", std::string());
    if (d.contains("mixture")) {
      c.data.mixture.clear();
      for (const auto& m : d["mixture"]) {
        c.data.mixture.push_back({env::BehaviorPolicySpec::from_json(m.at("policy")), m.value("proportion", 1.0)});
      }
    }
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    c.split.protocol = s.value("protocol", c.split.protocol);
    c.split.q = s.value("q", c.split.q);
    c.split.label_frac = s.value("label_frac", c.split.label_frac);
    if (s.contains("labelled_group")) c.split.labelled_group = data::parse_group(s["labelled_group"].get<std::string>());
    if (s.contains("unlabelled_group")) {
      c.split.unlabelled_group = data::parse_group(s["unlabelled_group"].get<std::string>());
    }
    c.split.n_labelled = s.value("n_labelled", c.split.n_labelled);
    c.split.n_unlabelled = s.value("n_unlabelled", c.split.n_unlabelled);
  }
  if (j.contains("idm")) c.idm = idm::IdmConfig::from_json(j["idm"]);
  if (j.contains("labelling")) {
    const auto& l = j["labelling"];
    c.labelling.mode = l.value("mode", c.labelling.mode);
    c.labelling.members = l.value("members", c.labelling.members);
    c.labelling.rounds = l.value("rounds", c.labelling.rounds);
    if (l.value("reduction", std::string("mean")) == "max") c.labelling.reduction = selftrain::Reduction::kMax;
  }
  if (j.contains("trainer")) {
    const auto& t = j["trainer"];
    // Unspecified trainer fields fall back to the algorithm's own defaults.
    const auto algo = orl::parse_algorithm(t.value("algorithm", std::string("td3bc")));
    Json merged = orl::TrainerConfig::defaults_for(algo).to_json();
    merged.update(t);
    c.trainer = orl::TrainerConfig::from_json(merged);
  }
  if (j.contains("role")) c.role = parse_role(j["role"].get<std::string>());
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    c.seeds.clear();
    if (s.is_number()) {
      for (std::uint64_t i = 0; i < s.get<std::uint64_t>(); ++i) c.seeds.push_back(i);
    } else {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    }
  }
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  if (j.contains("stats")) {
    const auto& s = j["stats"];
    c.stats.reps = s.value("reps", c.stats.reps);
    c.stats.level = s.value("level", c.stats.level);
    c.stats.seed = s.value("seed", c.stats.seed);
  }
  c.output_dir = j.value("output_dir", std::string());
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

std::string ExperimentConfig::hash() const {
  Json j = to_json();
  j.erase("output_dir");
  return json_hash(j);
}

void ExperimentConfig::scale_budgets(double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("budget scale must be positive");
  auto scale = [factor](std::size_t v) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(v) * factor)));
  };
  idm.budget = scale(idm.budget);
  trainer.budget = scale(trainer.budget);
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (split.protocol != "coupled" && split.protocol != "decoupled") {
    throw std::invalid_argument("config: unknown split protocol '" + split.protocol + "'");
  }
  if (labelling.mode != "single" && labelling.mode != "self-training") {
    throw std::invalid_argument("config: unknown labelling mode '" + labelling.mode + "'");
  }
  if (eval_episodes == 0) throw std::invalid_argument("config: eval_episodes must be positive");
  if (data.path.empty() && data.mixture.empty()) throw std::invalid_argument("config: empty policy mixture");
}

}  // namespace ssorl::harness
