// ssorl: command line front end for data generation, splitting, IDM
// training, labelling, agent training, evaluation, sweeps and reports.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "ssorl/env/dataset_io.hpp"
#include "ssorl/harness/pipeline.hpp"
#include "ssorl/harness/report.hpp"
#include "ssorl/harness/sweep.hpp"
#include "ssorl/idm/idm_io.hpp"
#include "ssorl/orl/dt.hpp"
#include "ssorl/stats/stats.hpp"

namespace fs = std::filesystem;
using namespace ssorl;
using harness::ExperimentConfig;

namespace {

struct Common {
  std::string config;
  std::int64_t seed = -1;
  std::string out;
  double budget_scale = 1.0;
};

void add_common(CLI::App* cmd, Common& c, bool need_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "experiment config (JSON)");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "run only this seed");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--budget-scale", c.budget_scale, "multiply IDM and trainer step budgets")->check(CLI::PositiveNumber);
}

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig::from_json(Json::object()) : ExperimentConfig::load(c.config);
  if (c.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(c.seed)};
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.budget_scale != 1.0) cfg.scale_budgets(c.budget_scale);
  return cfg;
}

std::vector<harness::ReportFormat> formats_or_default(const std::string& s) {
  return harness::parse_formats(s.empty() ? "json,csv,svg" : s);
}

void finish(const Json& report, double seconds, const std::string& dir, const std::string& formats) {
  if (dir.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  for (const auto& p : harness::emit_report({report}, formats_or_default(formats), dir)) std::cerr << "wrote " << p << "\n";
  harness::write_timing(dir, report.value("name", std::string("report")), seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised offline RL experiments"};
  app.require_subcommand(1);

  Common gen_c;
  bool jsonl = false;
  auto* gen = app.add_subcommand("gen-data", "roll out the configured behavior mixture");
  add_common(gen, gen_c);
  gen->add_flag("--jsonl", jsonl, "write JSON lines instead of the binary format");

  Common split_c;
  std::string split_data;
  auto* split = app.add_subcommand("split", "split a dataset into labelled and action-free parts");
  add_common(split, split_c);
  split->add_option("--data", split_data, "dataset file")->required()->check(CLI::ExistingFile);

  Common idm_c;
  std::string idm_data;
  auto* tidm = app.add_subcommand("train-idm", "fit an inverse dynamics model on labelled trajectories");
  add_common(tidm, idm_c);
  tidm->add_option("--data", idm_data, "labelled dataset")->required()->check(CLI::ExistingFile);

  std::string label_idm, label_data, label_out;
  auto* label = app.add_subcommand("label", "fill proxy actions with a trained IDM");
  label->add_option("--idm", label_idm, "IDM checkpoint")->required()->check(CLI::ExistingFile);
  label->add_option("--data", label_data, "action-free dataset")->required()->check(CLI::ExistingFile);
  label->add_option("--out", label_out, "labelled output dataset")->required();

  Common agent_c;
  std::string agent_data, agent_unlabelled;
  auto* tagent = app.add_subcommand("train-agent", "train an offline RL agent");
  add_common(tagent, agent_c);
  tagent->add_option("--data", agent_data, "training dataset (actions required)")->required()->check(CLI::ExistingFile);
  tagent->add_option("--unlabelled", agent_unlabelled, "action-free trajectories (dt-joint)")->check(CLI::ExistingFile);

  Common eval_c;
  std::string eval_agent;
  std::size_t eval_episodes = 0;
  auto* eval = app.add_subcommand("eval", "roll out a trained agent");
  add_common(eval, eval_c, false);
  eval->add_option("--agent", eval_agent, "agent checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "episodes (default from config)");

  Common pipe_c;
  std::string pipe_formats;
  auto* pipe = app.add_subcommand("pipeline", "generate, split, label, train and evaluate");
  add_common(pipe, pipe_c);
  pipe->add_option("--formats", pipe_formats, "report formats: json,csv,svg");

  Common sweep_c;
  std::vector<double> q_list{10, 30, 50, 70, 90, 100};
  std::vector<std::string> roles{"baseline", "ss", "oracle"};
  std::string sweep_formats;
  auto* sweep = app.add_subcommand("sweep", "coupled q sweep");
  add_common(sweep, sweep_c);
  sweep->add_option("--q", q_list, "q values (percent)");
  sweep->add_option("--roles", roles, "roles to run");
  sweep->add_option("--formats", sweep_formats, "report formats");

  Common abl_c;
  std::string abl_kind, abl_params, abl_formats;
  auto* abl = app.add_subcommand("ablate", "run an ablation grid");
  add_common(abl, abl_c);
  abl->add_option("--kind", abl_kind, "idm-architecture | self-training | quality-grid | size-grid | method-sensitivity")
      ->required();
  abl->add_option("--params", abl_params, "ablation parameters as inline JSON or a file");
  abl->add_option("--formats", abl_formats, "report formats");

  std::vector<std::string> rep_inputs;
  std::string rep_scores, rep_out, rep_formats, rep_stat = "iqm";
  double rep_level = 0.95;
  std::size_t rep_reps = 50000;
  std::uint64_t rep_seed = 0;
  auto* rep = app.add_subcommand("report", "re-emit reports, or bootstrap a score matrix");
  rep->add_option("--input", rep_inputs, "report JSON files")->check(CLI::ExistingFile);
  rep->add_option("--scores", rep_scores, "score matrix (.csv or .json)")->check(CLI::ExistingFile);
  rep->add_option("--out", rep_out, "output directory (reports) or file (CI JSON)");
  rep->add_option("--formats", rep_formats, "report formats");
  rep->add_option("--statistic", rep_stat, "mean | iqm | median");
  rep->add_option("--level", rep_level, "confidence level");
  rep->add_option("--reps", rep_reps, "bootstrap replications");
  rep->add_option("--seed", rep_seed, "bootstrap seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto cfg = load_config(gen_c);
      if (gen_c.out.empty()) throw std::invalid_argument("--out is required");
      const auto mdp = env::make_env(cfg.env_id, cfg.env_params);
      const auto ds = harness::prepare_dataset(cfg, mdp, cfg.seeds.front());
      if (jsonl) {
        env::export_jsonl(gen_c.out, ds);
      } else {
        env::save_dataset(gen_c.out, ds);
      }
      std::cout << ds.size() << " trajectories, " << ds.transition_count() << " transitions\n";
    } else if (*split) {
      auto cfg = load_config(split_c);
      if (split_c.out.empty()) throw std::invalid_argument("--out is required");
      const auto ds = env::load_dataset(split_data);
      const auto s = harness::make_split(cfg, ds, cfg.seeds.front());
      fs::create_directories(split_c.out);
      env::save_dataset(fs::path(split_c.out) / "labelled.sstraj", s.labelled);
      env::save_dataset(fs::path(split_c.out) / "unlabelled.sstraj", s.unlabelled);
      write_json_file(fs::path(split_c.out) / "split.json",
                      {{"provenance", s.provenance},
                       {"labelled_indices", s.labelled_indices},
                       {"unlabelled_indices", s.unlabelled_indices}});
      std::cout << s.labelled.size() << " labelled, " << s.unlabelled.size() << " unlabelled\n";
    } else if (*tidm) {
      auto cfg = load_config(idm_c);
      if (idm_c.out.empty()) throw std::invalid_argument("--out is required");
      const auto ds = env::load_dataset(idm_data);
      const auto model = idm::train_idm(ds, cfg.idm, derive_seed(cfg.seeds.front(), 0x1d));
      idm::save_idm(idm_c.out, model);
    } else if (*label) {
      const auto model = idm::load_idm(label_idm);
      env::save_dataset(label_out, idm::proxy_label(model, env::load_dataset(label_data)));
    } else if (*tagent) {
      auto cfg = load_config(agent_c);
      if (agent_c.out.empty()) throw std::invalid_argument("--out is required");
      const auto ds = env::load_dataset(agent_data);
      const auto seed = derive_seed(cfg.seeds.front(), 0x7a1);
      orl::TrainedAgent agent;
      if (cfg.trainer.algorithm == orl::Algorithm::kDtJoint) {
        const auto unl = agent_unlabelled.empty() ? ds.empty_like() : env::load_dataset(agent_unlabelled);
        agent = orl::train_dt_joint(ds, unl, cfg.trainer, seed);
      } else {
        agent = orl::train_agent(ds, cfg.trainer, seed);
      }
      orl::save_agent(agent_c.out, agent);
      orl::write_metrics_jsonl(agent_c.out + ".metrics.jsonl", agent);
    } else if (*eval) {
      auto cfg = load_config(eval_c);
      const auto agent = orl::load_agent(eval_agent);
      const auto mdp = env::make_env(cfg.env_id, cfg.env_params);
      const auto n = eval_episodes ? eval_episodes : cfg.eval_episodes;
      const auto r = orl::evaluate_agent(agent, mdp, n, derive_seed(cfg.seeds.front(), 0xe7a1));
      const Json j = {{"returns", r.returns},
                      {"normalized", r.normalized},
                      {"mean_normalized", stats::mean(r.normalized)},
                      {"iqm_normalized", stats::iqm(r.normalized)}};
      if (eval_c.out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        write_json_file(eval_c.out, j);
      }
    } else if (*pipe) {
      auto cfg = load_config(pipe_c);
      const auto r = harness::run_pipeline(cfg);
      finish(r.to_json(), r.wall_clock, cfg.output_dir, pipe_formats);
      std::cerr << r.aggregates.ci.summary() << "\n";
    } else if (*sweep) {
      auto cfg = load_config(sweep_c);
      std::vector<harness::Role> rs;
      for (const auto& r : roles) rs.push_back(harness::parse_role(r));
      const auto r = harness::run_coupled_sweep(cfg, q_list, rs);
      finish(r.to_json(), r.wall_clock, cfg.output_dir, sweep_formats);
    } else if (*abl) {
      auto cfg = load_config(abl_c);
      Json params = Json::object();
      if (!abl_params.empty()) params = fs::exists(abl_params) ? read_json_file(abl_params) : Json::parse(abl_params);
      const auto r = harness::run_ablation(abl_kind, cfg, params);
      finish(r.to_json(), r.wall_clock, cfg.output_dir, abl_formats);
    } else if (*rep) {
      if (!rep_scores.empty()) {
        const auto m = stats::ScoreMatrix::load(rep_scores);
        const auto ci = stats::stratified_bootstrap_ci(m, stats::Statistic::named(rep_stat), rep_level, rep_reps, rep_seed);
        if (!rep_out.empty()) write_json_file(rep_out, ci.to_json());
        std::cout << ci.summary() << "\n";
      } else {
        if (rep_inputs.empty()) throw std::invalid_argument("report: give --input or --scores");
        if (rep_out.empty()) throw std::invalid_argument("report: --out is required");
        std::vector<Json> reports;
        for (const auto& p : rep_inputs) reports.push_back(read_json_file(p));
        for (const auto& p : harness::emit_report(reports, formats_or_default(rep_formats), rep_out)) {
          std::cerr << "wrote " << p << "\n";
        }
      }
    }
  } catch (const harness::StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [cli]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
