#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ssorl/harness/config.hpp"
#include "ssorl/orl/agent.hpp"
#include "ssorl/stats/stats.hpp"

namespace ssorl::harness {

/// Error raised inside a pipeline stage; what() is "<stage>: <message>".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Mean, spread and bootstrap interval of a set of scores.
struct Aggregates {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double se = 0.0;
  double iqm = 0.0;
  stats::CiReport ci;  // IQM, stratified over the matrix rows

  Json to_json() const;
};

Aggregates aggregate(const stats::ScoreMatrix& scores, const StatsSpec& spec);

struct SeedResult {
  std::uint64_t seed = 0;
  double score = 0.0;  // mean normalized evaluation return
  std::vector<double> returns;
  std::vector<double> normalized;
  std::size_t n_labelled = 0;
  std::size_t n_unlabelled = 0;
  std::size_t n_train = 0;  // trajectories seen by the trainer
  Json labelling = Json::object();

  Json to_json() const;
};

struct RunReport {
  std::string name;
  std::string config_hash;
  Role role = Role::kSs;
  std::string algorithm;
  std::vector<SeedResult> seeds;
  Aggregates aggregates;
  /// Per-seed (oracle - agent) / oracle against a paired oracle run.
  std::vector<double> gaps;
  double gap_of_means = 0.0;
  bool has_gaps = false;
  /// Seconds; reported separately so report files stay reproducible.
  double wall_clock = 0.0;

  std::vector<double> scores() const;
  /// Uniform report layout shared with sweeps: "rows" and "cells".
  Json to_json() const;
};

// Individual stages, shared with the command line tool.
env::Dataset prepare_dataset(const ExperimentConfig& config, const env::MdpSpec& mdp, std::uint64_t seed);
data::SplitDataset make_split(const ExperimentConfig& config, const env::Dataset& dataset, std::uint64_t seed);
/// Proxy-labels split.unlabelled with a single IDM or a self-trained ensemble.
env::Dataset label_unlabelled(const ExperimentConfig& config, const data::SplitDataset& split, std::uint64_t seed,
                              Json* log = nullptr);
/// Role-specific training set and trainer call.
orl::TrainedAgent train_for_role(const ExperimentConfig& config, const env::Dataset& dataset,
                                 const data::SplitDataset& split, std::uint64_t seed, SeedResult* info = nullptr);

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// Split, label (ss only), train and evaluate for every configured seed.
/// Writes artifacts under config.output_dir when it is set.
RunReport run_pipeline(const ExperimentConfig& config);

/// Pairs seeds by value with an oracle run and fills the gap fields.
void attach_gaps(RunReport& report, const RunReport& oracle);

}  // namespace ssorl::harness
