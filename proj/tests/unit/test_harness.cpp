#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssorl/harness/config.hpp"
#include "ssorl/harness/pipeline.hpp"
#include "ssorl/harness/report.hpp"
#include "ssorl/harness/sweep.hpp"

using namespace ssorl;
using namespace ssorl::harness;
namespace fs = std::filesystem;

namespace {

Json tiny_json() {
  return Json{{"name", "tiny"},
              {"env", {{"id", "pointmass"}}},
              {"data", {{"n_trajectories", 30}}},
              {"split", {{"protocol", "coupled"}, {"q", 50}, {"label_frac", 0.2}}},
              {"idm", {{"hidden", {8}}, {"budget", 20}, {"eval_every", 10}, {"batch_size", 32}}},
              {"trainer", {{"algorithm", "td3bc"}, {"actor_hidden", {8}}, {"critic_hidden", {8}}, {"budget", 20},
                           {"batch_size", 16}, {"log_every", 10}}},
              {"seeds", {0, 1}},
              {"eval_episodes", 2},
              {"stats", {{"reps", 200}}}};
}

ExperimentConfig tiny() { return ExperimentConfig::from_json(tiny_json()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, JsonRoundTripAndHash) {
  auto c = tiny();
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.hash(), c.hash());
  c.output_dir = "/tmp/elsewhere";
  EXPECT_EQ(c.hash(), back.hash());
  c.trainer.budget = 21;
  EXPECT_NE(c.hash(), back.hash());
}

TEST(Config, SeedsAsCountTrainerDefaultsAndValidation) {
  auto j = tiny_json();
  j["seeds"] = 3;
  j["trainer"] = {{"algorithm", "cql"}};
  const auto c = ExperimentConfig::from_json(j);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(c.trainer.actor_hidden.size(), 3u);
  j["split"]["protocol"] = "sideways";
  EXPECT_THROW(ExperimentConfig::from_json(j).validate(), std::invalid_argument);
  EXPECT_THROW(parse_role("teacher"), std::invalid_argument);
}

TEST(Config, ScaleBudgetsKeepsAtLeastOne) {
  auto c = tiny();
  c.scale_budgets(0.001);
  EXPECT_EQ(c.trainer.budget, 1u);
  EXPECT_EQ(c.idm.budget, 1u);
  EXPECT_THROW(c.scale_budgets(0.0), std::invalid_argument);
}

TEST(Pipeline, SsWithNoUnlabelledDataEqualsBaseline) {
  auto j = tiny_json();
  j["split"] = {{"protocol", "decoupled"},
                {"labelled_group", "med"},
                {"n_labelled", 6},
                {"unlabelled_group", "high"},
                {"n_unlabelled", 0}};
  j["seeds"] = {3};
  j["role"] = "ss";
  const auto ss = run_seed(ExperimentConfig::from_json(j), 3);
  j["role"] = "baseline";
  const auto base = run_seed(ExperimentConfig::from_json(j), 3);
  EXPECT_EQ(ss.returns, base.returns);
  EXPECT_EQ(ss.n_train, 6u);
}

TEST(Pipeline, OracleTrainsOnFullDataset) {
  auto c = tiny();
  c.role = Role::kOracle;
  EXPECT_EQ(run_seed(c, 0).n_train, 30u);
  c.role = Role::kBaseline;
  EXPECT_EQ(run_seed(c, 0).n_train, 6u);
  c.role = Role::kSs;
  EXPECT_EQ(run_seed(c, 0).n_train, 30u);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  auto j = tiny_json();
  j["data"]["path"] = "/nonexistent/data.bin";
  try {
    run_pipeline(ExperimentConfig::from_json(j));
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "generate");
  }
  j = tiny_json();
  j["split"]["q"] = 5;  // 6 labelled from the bottom 2 trajectories
  EXPECT_THROW(run_pipeline(ExperimentConfig::from_json(j)), StageError);
}

TEST(Pipeline, GapsPairSeeds) {
  RunReport oracle, agent;
  for (std::uint64_t s : {0, 1}) {
    SeedResult r;
    r.seed = s;
    r.score = 1.0;
    oracle.seeds.push_back(r);
    r.score = 0.5 + 0.25 * static_cast<double>(s);
    agent.seeds.push_back(r);
  }
  oracle.aggregates.mean = 1.0;
  agent.aggregates.mean = 0.625;
  attach_gaps(agent, oracle);
  EXPECT_EQ(agent.gaps, (std::vector<double>{0.5, 0.25}));
  EXPECT_DOUBLE_EQ(agent.gap_of_means, 0.375);
  agent.seeds[1].seed = 9;
  EXPECT_THROW(attach_gaps(agent, oracle), StageError);
}

TEST(Aggregate, SingleInstanceGivesPointInterval) {
  const auto a = aggregate(stats::ScoreMatrix::single({0.4}), StatsSpec{});
  EXPECT_EQ(a.n, 1u);
  EXPECT_DOUBLE_EQ(a.ci.lower, 0.4);
  EXPECT_DOUBLE_EQ(a.ci.upper, 0.4);
  EXPECT_EQ(a.ci.reps, 0u);
}

TEST(Report, DeterministicBytesAndLayout) {
  const auto report = run_pipeline(tiny()).to_json();
  const fs::path base = fs::temp_directory_path() / "ssorl_test_report";
  fs::remove_all(base);
  const std::vector<ReportFormat> all{ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kSvg};
  const auto a = emit_report({report}, all, base / "a");
  const auto b = emit_report({report}, all, base / "b");
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(slurp(a[i]), slurp(b[i])) << a[i];
  EXPECT_EQ(run_pipeline(tiny()).to_json(), report);
  const std::string cells = cells_csv(report);
  EXPECT_EQ(cells.substr(0, cells.find('\n')),
            "label,role,n,mean,std,se,iqm,ci_lower,ci_upper,level,reps,gap,gap_lower,gap_upper");
  const std::string rows = rows_csv(report);
  EXPECT_EQ(rows.substr(0, rows.find('\n')), "label,role,seed,score,key");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 3);
  fs::remove_all(base);
}

TEST(Report, EmptyInputsAreErrors) {
  EXPECT_THROW(emit_report({}, {ReportFormat::kJson}, fs::temp_directory_path()), std::invalid_argument);
  EXPECT_THROW(parse_formats(""), std::invalid_argument);
  EXPECT_THROW(parse_format("pdf"), std::invalid_argument);
  EXPECT_EQ(parse_formats("json,svg").size(), 2u);
}

TEST(Sweep, CoupledSweepSharesOracle) {
  auto c = tiny();
  c.seeds = {0};
  const auto sw = run_coupled_sweep(c, {50, 100}, {Role::kSs, Role::kOracle});
  const auto j = sw.to_json();
  ASSERT_EQ(sw.cells.size(), 4u);
  double oracle_scores[2];
  std::size_t k = 0;
  for (const auto& cell : sw.cells) {
    if (cell.role == Role::kOracle) oracle_scores[k++] = cell.aggregates.mean;
  }
  ASSERT_EQ(k, 2u);
  EXPECT_EQ(oracle_scores[0], oracle_scores[1]);
  EXPECT_THROW(run_ablation("nonsense", c), std::invalid_argument);
}
