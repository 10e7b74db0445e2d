#include "ssorl/harness/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "ssorl/data/windows.hpp"
#include "ssorl/env/dataset_io.hpp"
#include "ssorl/orl/dt.hpp"

namespace ssorl::harness {

namespace {

template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

Json Aggregates::to_json() const {
  return Json{{"n", n}, {"mean", mean}, {"std", std}, {"se", se}, {"iqm", iqm}, {"ci", ci.to_json()}};
}

Aggregates aggregate(const stats::ScoreMatrix& scores, const StatsSpec& spec) {
  const auto flat = scores.flat();
  Aggregates a;
  a.n = flat.size();
  a.mean = stats::mean(flat);
  a.std = stats::stddev(flat);
  a.se = stats::std_error(flat);
  a.iqm = stats::iqm(flat);
  if (scores.n_instances() >= 2) {
    a.ci = stats::stratified_bootstrap_ci(scores, stats::Statistic::named("iqm"), spec.level, spec.reps, spec.seed);
  } else {
    // One instance per stratum: the bootstrap distribution is a point.
    a.ci = {"iqm", a.iqm, a.iqm, a.iqm, spec.level, 0, spec.seed};
  }
  return a;
}

Json SeedResult::to_json() const {
  return Json{{"seed", seed},
              {"score", score},
              {"returns", returns},
              {"normalized", normalized},
              {"n_labelled", n_labelled},
              {"n_unlabelled", n_unlabelled},
              {"n_train", n_train},
              {"labelling", labelling}};
}

std::vector<double> RunReport::scores() const {
  std::vector<double> out;
  for (const auto& s : seeds) out.push_back(s.score);
  return out;
}

Json RunReport::to_json() const {
  Json rows = Json::array();
  Json per_seed = Json::array();
  for (const auto& s : seeds) {
    rows.push_back({{"key", Json::object()}, {"label", name}, {"role", role_name(role)}, {"seed", s.seed}, {"score", s.score}});
    per_seed.push_back(s.to_json());
  }
  Json cell = {{"label", name}, {"key", Json::object()}, {"role", role_name(role)}};
  cell.update(aggregates.to_json());
  cell["gap"] = has_gaps ? Json(gap_of_means) : Json();
  Json out = {{"kind", "run"},
              {"name", name},
              {"config_hash", config_hash},
              {"algorithm", algorithm},
              {"variable", "run"},
              {"rows", rows},
              {"cells", Json::array({cell})},
              {"seeds", per_seed}};
  if (has_gaps) out["gaps"] = gaps;
  return out;
}

env::Dataset prepare_dataset(const ExperimentConfig& config, const env::MdpSpec& mdp, std::uint64_t seed) {
  return stage("generate", [&] {
    if (!config.data.path.empty()) {
      auto ds = env::load_dataset(config.data.path);
      if (ds.env_id != mdp.id) throw std::invalid_argument("dataset is for '" + ds.env_id + "', config says '" + mdp.id + "'");
      return ds;
    }
    return env::generate_dataset(mdp, config.data.mixture, config.data.n_trajectories, derive_seed(seed, 0xda7a));
  });
}

data::SplitDataset make_split(const ExperimentConfig& config, const env::Dataset& dataset, std::uint64_t seed) {
  return stage("split", [&] {
    const auto split_seed = derive_seed(seed, 0x5b1);
    const auto& s = config.split;
    if (s.protocol == "coupled") return data::coupled_split(dataset, s.q, s.label_frac, split_seed);
    return data::decoupled_split(dataset, s.labelled_group, s.n_labelled, s.unlabelled_group, s.n_unlabelled, split_seed);
  });
}

env::Dataset label_unlabelled(const ExperimentConfig& config, const data::SplitDataset& split, std::uint64_t seed,
                              Json* log) {
  if (config.labelling.mode == "single") {
    auto model = stage("train-idm", [&] { return idm::train_idm(split.labelled, config.idm, derive_seed(seed, 0x1d)); });
    return stage("label", [&] { return idm::proxy_label(model, split.unlabelled); });
  }
  selftrain::SelfTrainConfig st;
  st.idm = config.idm;
  st.members = config.labelling.members;
  st.rounds = config.labelling.rounds;
  st.reduction = config.labelling.reduction;
  const auto ad = split.labelled.action_dim;
  const auto lab = data::window_matrix(split.labelled.trajectories, config.idm.window, ad);
  const auto unl = data::window_matrix(split.unlabelled.trajectories, config.idm.window, ad);
  auto result = stage("train-idm", [&] {
    return selftrain::self_train(lab, unl, st, split.labelled.state_dim, ad, derive_seed(seed, 0x1d));
  });
  if (log) *log = result.log;
  return stage("label", [&] { return selftrain::apply_proxy_actions(split.unlabelled, unl, result.proxy_actions); });
}

orl::TrainedAgent train_for_role(const ExperimentConfig& config, const env::Dataset& dataset,
                                 const data::SplitDataset& split, std::uint64_t seed, SeedResult* info) {
  const auto& tc = config.trainer;
  const bool joint = tc.algorithm == orl::Algorithm::kDtJoint;
  const auto train_seed = derive_seed(seed, 0x7a1);
  env::Dataset train;
  env::Dataset unlabelled_for_joint = split.labelled.empty_like();
  Json log = Json::object();
  switch (config.role) {
    case Role::kOracle:
      if (config.split.protocol == "coupled") {
        train = dataset;
      } else {
        std::vector<std::size_t> idx = split.labelled_indices;
        idx.insert(idx.end(), split.unlabelled_indices.begin(), split.unlabelled_indices.end());
        std::sort(idx.begin(), idx.end());
        train = data::subset(dataset, idx);
      }
      break;
    case Role::kBaseline:
      train = split.labelled;
      break;
    case Role::kSs:
      if (split.unlabelled.empty()) {
        train = split.labelled;
      } else if (joint) {
        train = split.labelled;
        unlabelled_for_joint = split.unlabelled;
      } else {
        auto proxy = label_unlabelled(config, split, seed, &log);
        train = stage("merge", [&] { return data::merge_with_proxy(split.labelled, proxy, seed); });
      }
      break;
  }
  if (info) {
    info->n_labelled = split.labelled.size();
    info->n_unlabelled = split.unlabelled.size();
    info->n_train = train.size() + unlabelled_for_joint.size();
    info->labelling = log;
  }
  return stage("train-agent", [&] {
    if (joint) return orl::train_dt_joint(train, unlabelled_for_joint, tc, train_seed);
    return orl::train_agent(train, tc, train_seed);
  });
}

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  const auto mdp = stage("env", [&] { return env::make_env(config.env_id, config.env_params); });
  const auto dataset = prepare_dataset(config, mdp, seed);
  // Oracle runs still draw the split so that the decoupled oracle sees the same pools.
  const auto split = make_split(config, dataset, seed);
  SeedResult r;
  r.seed = seed;
  const auto agent = train_for_role(config, dataset, split, seed, &r);
  const auto eval = stage("eval", [&] {
    return orl::evaluate_agent(agent, mdp, config.eval_episodes, derive_seed(seed, 0xe7a1));
  });
  r.returns = eval.returns;
  r.normalized = eval.normalized;
  r.score = stats::mean(eval.normalized);
  if (!config.output_dir.empty()) {
    stage("write", [&] {
      const auto dir = std::filesystem::path(config.output_dir) / role_name(config.role) / ("seed" + std::to_string(seed));
      std::filesystem::create_directories(dir);
      orl::save_agent(dir / "agent.bin", agent);
      orl::write_metrics_jsonl(dir / "metrics.jsonl", agent);
      write_json_file(dir / "result.json", r.to_json());
    });
  }
  return r;
}

RunReport run_pipeline(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.name = config.name;
  report.config_hash = config.hash();
  report.role = config.role;
  report.algorithm = orl::algorithm_name(config.trainer.algorithm);
  for (auto seed : config.seeds) report.seeds.push_back(run_seed(config, seed));
  report.aggregates = stage("stats", [&] {
    return aggregate(stats::ScoreMatrix::single(report.scores()), config.stats);
  });
  report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void attach_gaps(RunReport& report, const RunReport& oracle) {
  report.gaps.clear();
  for (const auto& s : report.seeds) {
    auto it = std::find_if(oracle.seeds.begin(), oracle.seeds.end(), [&](const SeedResult& o) { return o.seed == s.seed; });
    if (it == oracle.seeds.end()) throw StageError("stats", "oracle run lacks seed " + std::to_string(s.seed));
    report.gaps.push_back(stats::relative_performance_gap(it->score, s.score));
  }
  report.gap_of_means = stats::relative_performance_gap(oracle.aggregates.mean, report.aggregates.mean);
  report.has_gaps = true;
}

}  // namespace ssorl::harness
