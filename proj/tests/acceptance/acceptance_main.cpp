// Acceptance suite: one PASS/FAIL line per criterion.
//
//   ssorl_acceptance [--criterion N]... [--out DIR]
//
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssorl/data/windows.hpp"
#include "ssorl/env/alternating.hpp"
#include "ssorl/env/finite_grid.hpp"
#include "ssorl/env/policies.hpp"
#include "ssorl/harness/pipeline.hpp"
#include "ssorl/harness/report.hpp"
#include "ssorl/harness/sweep.hpp"
#include "ssorl/idm/idm.hpp"
#include "ssorl/orl/cql.hpp"
#include "ssorl/orl/dt.hpp"
#include "ssorl/orl/td3bc.hpp"
#include "ssorl/selftrain/selftrain.hpp"
#include "ssorl/stats/stats.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace ssorl;
using harness::ExperimentConfig;
using nn::Graph;
using nn::Tensor;
using nn::Var;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

fs::path g_out = "acceptance_out";

// Small desk-scale experiment shared by the pipeline criteria.
Json desk_config() {
  return Json{{"name", "desk"},
              {"env", {{"id", "pointmass"}}},
              {"data", {{"n_trajectories", 100}}},
              {"split", {{"protocol", "coupled"}, {"q", 30}, {"label_frac", 0.1}}},
              {"idm", {{"hidden", {64, 64}}, {"budget", 1000}, {"eval_every", 250}, {"batch_size", 128}}},
              {"trainer",
               {{"algorithm", "td3bc"},
                {"actor_hidden", {64, 64}},
                {"critic_hidden", {64, 64}},
                {"budget", 3000},
                {"batch_size", 128},
                {"log_every", 500}}},
              {"role", "ss"},
              {"seeds", {0, 1, 2, 3, 4}},
              {"eval_episodes", 10},
              {"stats", {{"reps", 50000}, {"level", 0.95}, {"seed", 0}}}};
}

// 1. Analytic gradients against central differences. A point whose stencil
// straddles a ReLU or clamp kink is redrawn; the count is reported.
Outcome criterion1() {
  const auto t0 = Clock::now();
  const double tol = 1e-4;
  std::map<std::string, double> worst;
  std::map<std::string, std::size_t> redrawn;
  // Runs `check` (seeded by draw index) until 10 differentiable points pass through.
  auto ten_points = [&](const std::string& name, const std::function<tsup::GradCheck(std::uint64_t)>& check) {
    std::size_t good = 0;
    for (std::uint64_t draw = 0; good < 10 && draw < 40; ++draw) {
      const auto r = check(draw);
      if (r.kinks > 0) {
        ++redrawn[name];
        continue;
      }
      worst[name] = std::max(worst[name], r.rel_error);
      ++good;
    }
    if (good < 10) worst[name] = std::numeric_limits<double>::infinity();
  };
  ten_points("idm-nll", [](std::uint64_t point) {
    Rng rng(derive_seed(1001, point));
    idm::IdmConfig cfg;
    cfg.window.k = 1;
    cfg.hidden = {16, 16};
    idm::IdmModel model(cfg, 4, 2, point);
    const Tensor x = tsup::random_tensor(12, model.input_dim(), rng);
    const Tensor y = tsup::random_tensor(12, 2, rng, 0.5);
    model.fit_normalizer(x);
    return tsup::check_gradients(model.params(), [&](Graph& g) { return idm::idm_nll(g, model, x, y); }, rng);
  });
  orl::TrainerConfig tc;
  tc.actor_hidden = {16, 16};
  tc.critic_hidden = {16, 16};
  tc.n_action_samples = 4;
  ten_points("td3bc-critic", [&](std::uint64_t point) {
    Rng rng(derive_seed(1002, point));
    const auto batch = tsup::random_transitions(10, 4, 2, rng);
    auto st = orl::init_td3bc(4, 2, tc, point);
    // Move the targets away from the online copies.
    for (auto& e : st.critic_target.entries()) {
      for (std::size_t i = 0; i < e.value.size(); ++i) e.value[i] += 0.05 * rng.normal();
    }
    const Tensor noise = orl::td3bc_target_noise(10, 2, tc, rng);
    return tsup::check_gradients(st.critic, [&](Graph& g) { return orl::td3bc_critic_loss(g, st, batch, noise, tc); },
                                 rng);
  });
  ten_points("td3bc-actor", [&](std::uint64_t point) {
    Rng rng(derive_seed(1003, point));
    const auto batch = tsup::random_transitions(10, 4, 2, rng);
    auto st = orl::init_td3bc(4, 2, tc, point);
    const double lambda = orl::td3bc_lambda(st, batch, tc.alpha);
    return tsup::check_gradients(st.actor, [&](Graph& g) { return orl::td3bc_actor_loss(g, st, batch, lambda); }, rng);
  });
  ten_points("cql-penalty", [&](std::uint64_t point) {
    Rng rng(derive_seed(1004, point));
    const auto batch = tsup::random_transitions(10, 4, 2, rng);
    auto st = orl::init_cql(4, 2, tc, point);
    const auto samples = orl::draw_cql_samples(st, batch, tc, rng);
    return tsup::check_gradients(
        st.critic, [&](Graph& g) { return orl::cql_penalty(g, st, batch, samples, tc.min_q_weight); }, rng);
  });
  for (bool joint : {false, true}) {
    ten_points(joint ? "dt-joint" : "dt", [&](std::uint64_t point) {
      Rng rng(derive_seed(joint ? 1006 : 1005, point));
      orl::SequenceModelSpec spec;
      spec.state_dim = 3;
      spec.action_dim = 2;
      spec.context = 4;
      spec.layers = 1;
      spec.d_model = 8;
      spec.heads = 2;
      spec.max_timestep = 16;
      spec.joint_heads = joint;
      orl::SequenceModel model(spec, point);
      const auto b = tsup::random_sequences(3, 4, 3, 2, joint ? 0.5 : 1.0, rng);
      return tsup::check_gradients(
          model.params(), [&](Graph& g) { return orl::dt_objective(g, model, b, 0.1, 0.5, 0.5, nullptr); }, rng);
    });
  }
  const double secs = seconds_since(t0);
  bool pass = secs < 60.0;
  std::string detail;
  for (const auto& [name, err] : worst) {
    pass = pass && err < tol;
    detail += name + " " + f(err, 2) + (redrawn[name] ? " (" + std::to_string(redrawn[name]) + " kink points redrawn)" : "") +
              ", ";
  }
  return {pass, "max rel error " + detail + "10 points each, " + f(secs, 3) + " s"};
}

// 2. On a finite MDP with a Markovian tabular behavior policy the full-prefix
// action posterior equals the two-state posterior.
Outcome criterion2() {
  const auto t0 = Clock::now();
  env::FiniteGridParams gp;
  gp.width = 3;
  gp.height = 3;
  gp.slip = 0.2;
  const auto mdp = env::make_finite_grid(gp);
  Rng rng(2024);
  const auto policy = env::BehaviorTable::random(mdp.n_states, mdp.n_actions, 0, rng);
  double max_diff = 0.0, max_append = 0.0;
  std::size_t prefixes = 0;
  std::vector<std::size_t> seq;
  // Depth-first over reachable state sequences of length 2..6.
  std::function<void()> visit = [&] {
    if (seq.size() >= 2) {
      ++prefixes;
      for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        const auto exact = env::exact_action_posterior(mdp, policy, seq, t);
        const auto local = env::local_action_posterior(mdp, policy, seq[t], seq[t + 1]);
        for (std::size_t a = 0; a < exact.size(); ++a) max_diff = std::max(max_diff, std::abs(exact[a] - local[a]));
        if (t + 3 == seq.size()) {
          // seq extends the prefix ending at s_{t+1} by s_{t+2}.
          const std::vector<std::size_t> shorter(seq.begin(), seq.end() - 1);
          const auto before = env::exact_action_posterior(mdp, policy, shorter, t);
          for (std::size_t a = 0; a < exact.size(); ++a) max_append = std::max(max_append, std::abs(exact[a] - before[a]));
        }
      }
    }
    if (seq.size() == 6) return;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      double reach = 0.0;
      if (seq.empty()) {
        reach = mdp.initial[s];
      } else {
        for (std::size_t a = 0; a < mdp.n_actions; ++a) reach += mdp.prob(seq.back(), a, s);
      }
      if (reach == 0.0) continue;
      seq.push_back(s);
      visit();
      seq.pop_back();
    }
  };
  visit();
  const double secs = seconds_since(t0);
  const bool pass = max_diff < 1e-12 && max_append < 1e-12 && secs < 10.0;
  return {pass, std::to_string(prefixes) + " prefixes, max |exact - local| " + f(max_diff, 3) +
                    ", max change on append " + f(max_append, 3) + ", " + f(secs, 3) + " s"};
}

// Windows at odd steps and their dead-channel targets.
double dead_channel_mse(const idm::IdmModel& model, const env::Dataset& test) {
  const auto wm = data::window_matrix(test.trajectories, model.config().window, test.action_dim);
  const auto [mean, var] = model.predict(wm.inputs);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < wm.size(); ++r) {
    if (wm.t[r] % 2 == 0) continue;
    const double d = mean.at(r, 1) - wm.targets.at(r, 1);
    sum += d * d;
    ++n;
  }
  return sum / static_cast<double>(n);
}

// 3. k = 0 IDM recovers PointMass actions.
Outcome criterion3() {
  const auto t0 = Clock::now();
  const auto mdp = env::make_env("pointmass");
  const auto cfg = ExperimentConfig::from_json(desk_config());
  const auto train = env::generate_dataset(mdp, cfg.data.mixture, 60, 31);
  const auto test = env::generate_dataset(mdp, cfg.data.mixture, 20, 32);
  idm::IdmConfig ic;
  ic.hidden = {64, 64};
  ic.budget = 4000;
  ic.batch_size = 128;
  const auto model = idm::train_idm(train, ic, 3);
  const auto wm = data::window_matrix(test.trajectories, ic.window, test.action_dim);
  const double mse = idm::action_mse(model, wm.inputs, wm.targets);
  const double secs = seconds_since(t0);
  return {mse < 1e-2 && secs < 180.0, "held-out action MSE " + f(mse) + " (< 0.01), " + f(secs, 3) + " s"};
}

// 4. On AlternatingStyle a k = 1 IDM sees the style; k = 0 cannot.
Outcome criterion4() {
  const auto t0 = Clock::now();
  const auto mdp = env::make_env("alternating");
  const std::vector<env::MixtureComponent> mix{{env::alternating_style_policy(), 1.0}};
  bool pass = true;
  std::string k1s, k0s;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto train = env::generate_dataset(mdp, mix, 60, derive_seed(seed, 41));
    const auto test = env::generate_dataset(mdp, mix, 20, derive_seed(seed, 42));
    double mse[2];
    for (std::size_t k : {0, 1}) {
      idm::IdmConfig ic;
      ic.window.k = k;
      ic.hidden = {64, 64};
      ic.budget = 3000;
      ic.batch_size = 128;
      // Even steps are deterministic; at the default floor (-10) their 1/var
      // weights swamp the odd-step dead-channel term in Adam's scaling.
      ic.logvar_min = -6.0;
      mse[k] = dead_channel_mse(idm::train_idm(train, ic, seed), test);
    }
    pass = pass && mse[1] < 0.15 && mse[0] > 0.6;
    k1s += (seed ? "/" : "") + f(mse[1], 3);
    k0s += (seed ? "/" : "") + f(mse[0], 3);
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 300.0,
          "odd-step dead-channel MSE k=1 " + k1s + " (< 0.15), k=0 " + k0s + " (> 0.6), " + f(secs, 3) + " s"};
}

// 5. Baseline < SS <= oracle on the coupled q = 30 setup.
Outcome criterion5() {
  const auto t0 = Clock::now();
  std::map<std::string, harness::RunReport> runs;
  std::vector<Json> reports;
  for (const char* role : {"oracle", "baseline", "ss"}) {
    Json j = desk_config();
    j["role"] = role;
    j["name"] = std::string("trio-") + role;
    runs[role] = harness::run_pipeline(ExperimentConfig::from_json(j));
    reports.push_back(runs[role].to_json());
  }
  harness::emit_report(reports, {harness::ReportFormat::kJson, harness::ReportFormat::kCsv}, g_out / "criterion5");
  const auto& b = runs["baseline"].aggregates;
  const auto& s = runs["ss"].aggregates;
  const auto& o = runs["oracle"].aggregates;
  const double secs = seconds_since(t0);
  const bool pass = b.mean + b.se <= s.mean && s.mean <= o.mean + o.se && s.mean >= 0.8 * o.mean && secs < 1800.0;
  return {pass, "mean normalized return baseline " + f(b.mean) + " (se " + f(b.se, 2) + "), ss " + f(s.mean) + " (se " +
                    f(s.se, 2) + "), oracle " + f(o.mean) + " (se " + f(o.se, 2) + "), ss/oracle " +
                    f(s.mean / o.mean, 3) + ", " + f(secs, 3) + " s"};
}

// 6. SS-TD3BC IQM does not drop from q = 10 to q = 100.
Outcome criterion6() {
  const auto t0 = Clock::now();
  auto cfg = ExperimentConfig::from_json(desk_config());
  cfg.name = "q-sweep";
  const auto sweep = harness::run_coupled_sweep(cfg, {10, 30, 50, 70, 90, 100}, {harness::Role::kSs});
  harness::emit_report({sweep.to_json()}, {harness::ReportFormat::kJson, harness::ReportFormat::kCsv,
                                           harness::ReportFormat::kSvg},
                       g_out / "criterion6");
  const harness::SweepCell* lo = nullptr;
  const harness::SweepCell* hi = nullptr;
  for (const auto& c : sweep.cells) {
    if (c.key["q"] == 10) lo = &c;
    if (c.key["q"] == 100) hi = &c;
  }
  const double d = hi->aggregates.iqm - lo->aggregates.iqm;
  const double width = std::max(hi->aggregates.ci.width(), lo->aggregates.ci.width());
  const double secs = seconds_since(t0);
  return {(d >= 0.0 || -d <= width) && secs < 7200.0,
          "IQM q=10 " + f(lo->aggregates.iqm) + ", q=100 " + f(hi->aggregates.iqm) + ", difference " + f(d, 3) +
              ", CI width " + f(width, 3) + ", " + f(secs, 3) + " s"};
}

// 7. Statistics against hand values and exhaustive bootstrap enumeration.
Outcome criterion7() {
  const std::vector<double> eight{1, 2, 3, 4, 5, 6, 7, 8};
  const double iqm = stats::iqm(eight);
  const double gap = stats::relative_performance_gap(80.0, 60.0);

  const std::vector<double> four{0, 0, 10, 10};
  std::vector<double> exhaustive;
  for (int code = 0; code < 256; ++code) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += four[(code >> (2 * j)) & 3];
    exhaustive.push_back(s / 4.0);
  }
  std::sort(exhaustive.begin(), exhaustive.end());
  const auto ci = stats::stratified_bootstrap_ci(stats::ScoreMatrix::single(four), stats::Statistic::named("mean"), 0.95,
                                                 50000, 7);
  const double exact_lo = stats::quantile_sorted(exhaustive, 0.025);
  const double exact_hi = stats::quantile_sorted(exhaustive, 0.975);
  const double step = 2.5;  // spacing of the resample-mean support
  const bool boot_ok = std::abs(ci.lower - exact_lo) <= step && std::abs(ci.upper - exact_hi) <= step &&
                       ci.lower >= 0.0 && ci.upper <= 10.0 && ci.lower <= 5.0 && 5.0 <= ci.upper;

  Rng rng(77);
  std::vector<std::vector<double>> rows(6, std::vector<double>(5));
  for (auto& r : rows) {
    for (double& v : r) v = rng.normal();
  }
  const stats::ScoreMatrix m({"a", "b", "c", "d", "e", "f"}, {"0", "1", "2", "3", "4"}, rows);
  const auto t0 = Clock::now();
  const auto big = stats::stratified_bootstrap_ci(m, stats::Statistic::named("iqm"), 0.95, 50000, 0);
  const double secs = seconds_since(t0);
  const bool pass = iqm == 4.5 && gap == 0.25 && boot_ok && secs < 10.0;
  return {pass, "iqm([1..8]) " + f(iqm, 17) + ", gap(80,60) " + f(gap, 17) + ", bootstrap [" + f(ci.lower) + ", " +
                    f(ci.upper) + "] vs exhaustive [" + f(exact_lo) + ", " + f(exact_hi) + "], 6x5 x 50000 reps " +
                    f(secs, 3) + " s (width " + f(big.width(), 3) + ")"};
}

// 8. Self-training mechanics and the single-round vs self-training report.
Outcome criterion8() {
  const auto t0 = Clock::now();
  const auto schedule = selftrain::augmentation_schedule(100, 5);
  std::vector<std::size_t> pool;
  std::size_t left = 100;
  for (auto n : schedule) pool.push_back(left -= n);
  const bool pool_ok = pool == std::vector<std::size_t>{80, 60, 40, 20, 0};
  const std::vector<std::vector<double>> means{{0.0}, {2.0}};
  const std::vector<std::vector<double>> vars{{1.0}, {1.0}};
  const double mv = selftrain::mixture_variance(means, vars).front();

  auto cfg = ExperimentConfig::from_json(desk_config());
  cfg.name = "self-training";
  const Json params = {{"variants",
                        {{{"mode", "single"}},
                         {{"mode", "self-training"}, {"members", 2}, {"rounds", 3}}}}};
  const auto report = harness::run_ablation("self-training", cfg, params);
  const auto files = harness::emit_report(
      {report.to_json()}, {harness::ReportFormat::kJson, harness::ReportFormat::kCsv, harness::ReportFormat::kSvg},
      g_out / "criterion8");
  bool report_ok = report.cells.size() == 2 && files.size() == 4;
  std::string cis;
  for (const auto& c : report.cells) {
    report_ok = report_ok && c.aggregates.ci.reps == 50000 && c.aggregates.ci.lower <= c.aggregates.ci.upper;
    cis += c.label + " " + c.aggregates.ci.summary() + "; ";
  }
  for (const auto& p : files) report_ok = report_ok && fs::file_size(p) > 0;
  const double secs = seconds_since(t0);
  std::string sched;
  for (auto p : pool) sched += (sched.empty() ? "" : "/") + std::to_string(p);
  return {pool_ok && mv == 2.0 && report_ok && secs < 1200.0,
          "pool " + sched + ", mixture variance " + f(mv, 17) + ", " + cis + f(secs, 3) + " s"};
}

// 9. DT-Joint masks the action head on unlabelled data and reduces to DT.
Outcome criterion9() {
  orl::SequenceModelSpec spec;
  spec.state_dim = 4;
  spec.action_dim = 2;
  spec.context = 5;
  spec.layers = 2;
  spec.d_model = 16;
  spec.heads = 2;
  spec.max_timestep = 50;
  Rng rng(99);
  double max_head_grad = 0.0;
  {
    auto js = spec;
    js.joint_heads = true;
    orl::SequenceModel joint(js, 5);
    const auto b = tsup::random_sequences(6, 5, 4, 2, 0.0, rng);
    Graph g;
    Var loss = orl::dt_objective(g, joint, b, 0.2, 1.0, 1.0, nullptr);
    g.backward(loss);
    const auto grads = g.gradients(joint.params());
    for (const auto& name : orl::SequenceModel::action_head_names()) {
      const auto& t = grads.at(name);
      for (std::size_t i = 0; i < t.size(); ++i) max_head_grad = std::max(max_head_grad, std::abs(t[i]));
    }
  }
  double max_obj_diff = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    orl::SequenceModel dt(spec, 11 + trial);
    auto js = spec;
    js.joint_heads = true;
    orl::SequenceModel joint(js, 11 + trial);
    const auto b = tsup::random_sequences(6, 5, 4, 2, 1.0, rng);
    Graph g1, g2;
    const double a = orl::dt_objective(g1, dt, b, 0.2, 0.0, 0.0, nullptr).value().item();
    const double c = orl::dt_objective(g2, joint, b, 0.2, 0.0, 0.0, nullptr).value().item();
    max_obj_diff = std::max(max_obj_diff, std::abs(a - c));
  }
  // End to end: the trainers agree on every shared parameter.
  const auto mdp = env::make_env("pointmass");
  const auto ds = env::generate_dataset(mdp, {{env::medium_tier(), 1.0}}, 8, 5);
  auto tc = orl::TrainerConfig::defaults_for(orl::Algorithm::kDt);
  tc.budget = 20;
  tc.batch_size = 4;
  tc.d_model = 16;
  tc.lambda_s = 0.0;
  tc.lambda_r = 0.0;
  const auto a = orl::train_dt(ds, tc, 3);
  const auto j = orl::train_dt_joint(ds, ds.empty_like(), tc, 3);
  double max_param_diff = 0.0;
  for (const auto& e : a.actor.entries()) {
    const auto& other = j.actor.value(e.name);
    for (std::size_t i = 0; i < e.value.size(); ++i) max_param_diff = std::max(max_param_diff, std::abs(e.value[i] - other[i]));
  }
  const bool pass = max_head_grad == 0.0 && max_obj_diff <= 1e-12 && max_param_diff <= 1e-12;
  return {pass, "max |action-head grad| on unlabelled batch " + f(max_head_grad, 3) + ", max objective diff " +
                    f(max_obj_diff, 3) + ", max trained-parameter diff " + f(max_param_diff, 3)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = fs::relative(e.path(), dir).string();
    if (name.find(".timing.") != std::string::npos) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[name] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

// 10. Same seed, same bytes.
Outcome criterion10() {
  const auto t0 = Clock::now();
  auto run_all = [&](const fs::path& dir) {
    fs::remove_all(dir);
    std::vector<Json> reports;
    Json base = desk_config();
    base["seeds"] = {0, 1};
    base["trainer"]["budget"] = 500;
    base["idm"]["budget"] = 300;
    for (const char* mode : {"single", "self-training"}) {
      Json j = base;
      j["name"] = std::string("repro-") + mode;
      j["labelling"] = {{"mode", mode}, {"members", 2}, {"rounds", 2}};
      auto cfg = ExperimentConfig::from_json(j);
      cfg.output_dir = (dir / "runs" / mode).string();
      const auto r = harness::run_pipeline(cfg);
      reports.push_back(r.to_json());
    }
    for (const char* algo : {"cql", "dt-joint"}) {
      Json j = base;
      j["name"] = std::string("repro-") + algo;
      j["trainer"] = {{"algorithm", algo}, {"budget", 100}, {"batch_size", 16}, {"actor_hidden", {32, 32}},
                      {"critic_hidden", {32, 32}}, {"d_model", 16}};
      reports.push_back(harness::run_pipeline(ExperimentConfig::from_json(j)).to_json());
    }
    harness::emit_report(reports, harness::parse_formats("json,csv,svg"), dir / "reports");
    return read_tree(dir);
  };
  const auto a = run_all(g_out / "criterion10" / "first");
  const auto b = run_all(g_out / "criterion10" / "second");
  std::size_t bytes = 0;
  for (const auto& [k, v] : a) bytes += v.size();
  const double secs = seconds_since(t0);
  return {a == b && !a.empty(), std::to_string(a.size()) + " files (" + std::to_string(bytes) +
                                    " bytes) compared across two runs, " + (a == b ? "identical" : "DIFFERENT") + ", " +
                                    f(secs, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.insert(std::stoi(argv[++i]));
    } else if (arg == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]... [--out DIR]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.insert(i);
  }
  bool all = true;
  for (int id : selected) {
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 2;
    }
    Outcome o;
    try {
      o = criteria[id - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d: %s: %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
