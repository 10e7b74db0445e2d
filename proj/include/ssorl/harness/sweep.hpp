#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssorl/harness/pipeline.hpp"

namespace ssorl::harness {

struct SweepRow {
  Json key;  // sweep variables, e.g. {"q": 30}
  std::string label;
  Role role = Role::kSs;
  std::uint64_t seed = 0;
  double score = 0.0;
};

/// One (setting, role) cell. Scores are stratified by setup (rows) over seeds.
struct SweepCell {
  Json key;
  std::string label;
  Role role = Role::kSs;
  stats::ScoreMatrix scores;
  Aggregates aggregates;
  std::optional<double> gap;                // gap of means against the paired oracle
  std::optional<stats::CiReport> gap_ci;    // IQM of per-entry gaps, when computed
};

struct SweepReport {
  std::string kind;  // "coupled-sweep" or "ablation/<kind>"
  std::string name;
  std::string config_hash;
  std::string variable;  // x-axis of the plot
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;
  Json params = Json::object();
  double wall_clock = 0.0;

  Json to_json() const;
};

/// Coupled-setup grid over q for baseline and ss roles; the oracle does not
/// depend on q, so it runs once and its rows repeat under every q.
SweepReport run_coupled_sweep(const ExperimentConfig& base, const std::vector<double>& q_list = {10, 30, 50, 70, 90, 100},
                              const std::vector<Role>& roles = {Role::kBaseline, Role::kSs, Role::kOracle});

/// kind: idm-architecture | self-training | quality-grid | size-grid | method-sensitivity.
SweepReport run_ablation(const std::string& kind, const ExperimentConfig& base, const Json& params = Json::object());

}  // namespace ssorl::harness
