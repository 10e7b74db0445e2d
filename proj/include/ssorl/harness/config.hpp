#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"
#include "ssorl/data/split.hpp"
#include "ssorl/env/policies.hpp"
#include "ssorl/idm/idm.hpp"
#include "ssorl/orl/common.hpp"
#include "ssorl/selftrain/selftrain.hpp"

namespace ssorl::harness {

enum class Role { kBaseline, kSs, kOracle };
Role parse_role(const std::string& name);
std::string role_name(Role role);

struct DataSpec {
  std::size_t n_trajectories = 200;
  std::vector<env::MixtureComponent> mixture;
  /// Load this dataset file instead of generating one.
  std::string path;
};

struct SplitSpec {
  std::string protocol = "coupled";  // coupled | decoupled
  double q = 50.0;
  double label_frac = 0.1;
  data::ReturnGroup labelled_group = data::ReturnGroup::kLow;
  data::ReturnGroup unlabelled_group = data::ReturnGroup::kHigh;
  std::size_t n_labelled = 20;
  std::size_t n_unlabelled = 40;
};

struct LabellingSpec {
  std::string mode = "single";  // single | self-training
  std::size_t members = 2;
  std::size_t rounds = 3;
  selftrain::Reduction reduction = selftrain::Reduction::kMean;
};

struct StatsSpec {
  std::size_t reps = 50000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string env_id = "pointmass";
  Json env_params = Json::object();
  DataSpec data;
  SplitSpec split;
  idm::IdmConfig idm;
  LabellingSpec labelling;
  orl::TrainerConfig trainer;
  Role role = Role::kSs;
  std::vector<std::uint64_t> seeds{0};
  std::size_t eval_episodes = 30;
  StatsSpec stats;
  std::string output_dir;

  Json to_json() const;
  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Hash of to_json() without output_dir, embedded in every artifact.
  std::string hash() const;
  /// Multiplies the IDM and trainer step budgets (each kept >= 1).
  void scale_budgets(double factor);
  void validate() const;
};

}  // namespace ssorl::harness
