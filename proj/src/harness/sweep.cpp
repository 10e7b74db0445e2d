#include "ssorl/harness/sweep.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include "ssorl/stats/score_matrix.hpp"

namespace ssorl::harness {

namespace {

std::string q_label(double q) { return "q=" + stats::format_double(q); }

Json cell_json(const SweepCell& c) {
  Json j = {{"label", c.label}, {"key", c.key}, {"role", role_name(c.role)}, {"strata", c.scores.strata()}};
  j.update(c.aggregates.to_json());
  j["gap"] = c.gap ? Json(*c.gap) : Json();
  j["gap_ci"] = c.gap_ci ? c.gap_ci->to_json() : Json();
  return j;
}

std::vector<std::string> seed_ids(const std::vector<std::uint64_t>& seeds) {
  std::vector<std::string> out;
  for (auto s : seeds) out.push_back(std::to_string(s));
  return out;
}

// Runs `config` for each setup and folds the results into one cell.
struct CellBuilder {
  SweepReport& report;
  const StatsSpec& stats_spec;

  SweepCell run(const Json& key, const std::string& label, const std::vector<ExperimentConfig>& setups,
                const std::vector<std::string>& setup_ids, std::vector<RunReport>* runs = nullptr) {
    std::vector<std::vector<double>> rows;
    for (const auto& cfg : setups) {
      RunReport r = run_pipeline(cfg);
      for (const auto& s : r.seeds) {
        Json row_key = key;
        if (setups.size() > 1) row_key["setup"] = setup_ids[rows.size()];
        report.rows.push_back({row_key, label, cfg.role, s.seed, s.score});
      }
      rows.push_back(r.scores());
      if (runs) runs->push_back(std::move(r));
    }
    SweepCell cell;
    cell.key = key;
    cell.label = label;
    cell.role = setups.front().role;
    cell.scores = stats::ScoreMatrix(setup_ids, seed_ids(setups.front().seeds), rows);
    cell.aggregates = aggregate(cell.scores, stats_spec);
    return cell;
  }
};

std::vector<double> q_list_param(const Json& params, const ExperimentConfig& base) {
  if (params.contains("q_list")) return params["q_list"].get<std::vector<double>>();
  return {base.split.q};
}

std::vector<ExperimentConfig> coupled_setups(const ExperimentConfig& base, const std::vector<double>& qs,
                                             std::vector<std::string>& ids) {
  std::vector<ExperimentConfig> out;
  ids.clear();
  for (double q : qs) {
    ExperimentConfig c = base;
    c.split.protocol = "coupled";
    c.split.q = q;
    out.push_back(c);
    ids.push_back(q_label(q));
  }
  return out;
}

std::string sub_dir(const std::string& root, const std::string& leaf) {
  return root.empty() ? root : (std::filesystem::path(root) / leaf).string();
}

}  // namespace

Json SweepReport::to_json() const {
  Json rows_j = Json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"key", r.key}, {"label", r.label}, {"role", role_name(r.role)}, {"seed", r.seed}, {"score", r.score}});
  }
  Json cells_j = Json::array();
  for (const auto& c : cells) cells_j.push_back(cell_json(c));
  return Json{{"kind", kind},     {"name", name},   {"config_hash", config_hash}, {"variable", variable},
              {"params", params}, {"rows", rows_j}, {"cells", cells_j}};
}

SweepReport run_coupled_sweep(const ExperimentConfig& base, const std::vector<double>& q_list,
                              const std::vector<Role>& roles) {
  if (q_list.empty()) throw std::invalid_argument("coupled sweep: empty q list");
  const auto start = std::chrono::steady_clock::now();
  SweepReport report;
  report.kind = "coupled-sweep";
  report.name = base.name;
  report.config_hash = base.hash();
  report.variable = "q";
  report.params = {{"q_list", q_list}};
  Json role_names = Json::array();
  for (auto r : roles) role_names.push_back(role_name(r));
  report.params["roles"] = role_names;

  std::optional<RunReport> oracle;
  if (std::find(roles.begin(), roles.end(), Role::kOracle) != roles.end()) {
    ExperimentConfig c = base;
    c.role = Role::kOracle;
    c.output_dir = sub_dir(base.output_dir, "oracle");
    oracle = run_pipeline(c);
  }
  for (double q : q_list) {
    for (Role role : roles) {
      SweepCell cell;
      cell.key = {{"q", q}};
      cell.label = q_label(q);
      cell.role = role;
      RunReport run;
      if (role == Role::kOracle) {
        run = *oracle;
      } else {
        ExperimentConfig c = base;
        c.role = role;
        c.split.protocol = "coupled";
        c.split.q = q;
        c.output_dir = sub_dir(base.output_dir, q_label(q));
        run = run_pipeline(c);
      }
      for (const auto& s : run.seeds) report.rows.push_back({cell.key, cell.label, role, s.seed, s.score});
      cell.scores = stats::ScoreMatrix({cell.label}, seed_ids(base.seeds), {run.scores()});
      cell.aggregates = run.aggregates;
      if (oracle && oracle->aggregates.mean > 0.0) {
        cell.gap = stats::relative_performance_gap(oracle->aggregates.mean, run.aggregates.mean);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SweepReport run_ablation(const std::string& kind, const ExperimentConfig& base, const Json& params) {
  const auto start = std::chrono::steady_clock::now();
  SweepReport report;
  report.kind = "ablation/" + kind;
  report.name = base.name;
  report.config_hash = base.hash();
  report.params = params;
  CellBuilder builder{report, base.stats};
  std::vector<std::string> ids;

  if (kind == "idm-architecture") {
    report.variable = "window";
    const auto ks = params.value("k", std::vector<std::size_t>{0, 1, 2});
    const auto syms = params.value("symmetric", std::vector<bool>{false, true});
    const auto qs = q_list_param(params, base);
    for (auto k : ks) {
      for (bool sym : syms) {
        ExperimentConfig c = base;
        c.role = Role::kSs;
        c.idm.window.k = k;
        c.idm.window.symmetric = sym;
        const std::string label = "k=" + std::to_string(k) + (sym ? " sym" : " asym");
        c.output_dir = sub_dir(base.output_dir, label);
        report.cells.push_back(builder.run({{"k", k}, {"symmetric", sym}}, label, coupled_setups(c, qs, ids), ids));
      }
    }
  } else if (kind == "self-training") {
    report.variable = "labelling";
    Json variants = params.value("variants", Json::array({{{"mode", "single"}},
                                                          {{"mode", "self-training"}, {"members", 2}, {"rounds", 3}},
                                                          {{"mode", "self-training"}, {"members", 3}, {"rounds", 3}},
                                                          {{"mode", "self-training"}, {"members", 2}, {"rounds", 5}},
                                                          {{"mode", "self-training"}, {"members", 3}, {"rounds", 5}}}));
    const auto qs = q_list_param(params, base);
    for (const auto& v : variants) {
      ExperimentConfig c = base;
      c.role = Role::kSs;
      c.labelling.mode = v.value("mode", std::string("single"));
      c.labelling.members = v.value("members", c.labelling.members);
      c.labelling.rounds = v.value("rounds", c.labelling.rounds);
      c.validate();
      std::string label = "single-round";
      Json key = {{"mode", c.labelling.mode}};
      if (c.labelling.mode != "single") {
        label = "self-training m=" + std::to_string(c.labelling.members) + " N=" + std::to_string(c.labelling.rounds);
        key["members"] = c.labelling.members;
        key["rounds"] = c.labelling.rounds;
      }
      c.output_dir = sub_dir(base.output_dir, label);
      report.cells.push_back(builder.run(key, label, coupled_setups(c, qs, ids), ids));
    }
  } else if (kind == "quality-grid" || kind == "size-grid") {
    const bool quality = kind == "quality-grid";
    report.variable = quality ? "groups" : "sizes";
    const bool with_oracle = params.value("with_oracle", true);
    std::vector<std::pair<Json, ExperimentConfig>> grid;
    if (quality) {
      const auto groups = params.value("groups", std::vector<std::string>{"low", "med", "high"});
      for (const auto& lg : groups) {
        for (const auto& ug : groups) {
          ExperimentConfig c = base;
          c.split.protocol = "decoupled";
          c.split.labelled_group = data::parse_group(lg);
          c.split.unlabelled_group = data::parse_group(ug);
          c.split.n_labelled = params.value("n_labelled", base.split.n_labelled);
          c.split.n_unlabelled = params.value("n_unlabelled", base.split.n_unlabelled);
          grid.push_back({{{"labelled", lg}, {"unlabelled", ug}}, c});
        }
      }
    } else {
      const auto lsizes = params.value("labelled_sizes", std::vector<std::size_t>{10, 20, 40});
      const auto usizes = params.value("unlabelled_sizes", std::vector<std::size_t>{20, 40, 60});
      for (auto nl : lsizes) {
        for (auto nu : usizes) {
          ExperimentConfig c = base;
          c.split.protocol = "decoupled";
          if (params.contains("labelled_group")) c.split.labelled_group = data::parse_group(params["labelled_group"]);
          if (params.contains("unlabelled_group")) c.split.unlabelled_group = data::parse_group(params["unlabelled_group"]);
          c.split.n_labelled = nl;
          c.split.n_unlabelled = nu;
          grid.push_back({{{"n_labelled", nl}, {"n_unlabelled", nu}}, c});
        }
      }
    }
    for (auto& [key, c] : grid) {
      std::string label;
      for (auto it = key.begin(); it != key.end(); ++it) {
        label += (label.empty() ? "" : " ") + it.key() + "=" + (it->is_string() ? it->get<std::string>() : it->dump());
      }
      c.role = Role::kSs;
      c.output_dir = sub_dir(base.output_dir, label);
      std::vector<RunReport> ss_runs;
      SweepCell cell = builder.run(key, label, {c}, {label}, &ss_runs);
      if (with_oracle) {
        ExperimentConfig o = c;
        o.role = Role::kOracle;
        o.output_dir = sub_dir(base.output_dir, label + " oracle");
        std::vector<RunReport> oracle_runs;
        SweepCell ocell = builder.run(key, label, {o}, {label}, &oracle_runs);
        if (oracle_runs.front().aggregates.mean > 0.0) {
          cell.gap = stats::relative_performance_gap(oracle_runs.front().aggregates.mean, ss_runs.front().aggregates.mean);
        }
        report.cells.push_back(std::move(cell));
        report.cells.push_back(std::move(ocell));
      } else {
        report.cells.push_back(std::move(cell));
      }
    }
  } else if (kind == "method-sensitivity") {
    report.variable = "algorithm";
    const auto algos = params.value("algorithms", std::vector<std::string>{"td3bc", "cql", "dt"});
    const auto qs = q_list_param(params, base);
    const Json overrides = params.value("trainers", Json::object());
    for (const auto& name : algos) {
      ExperimentConfig c = base;
      const auto algo = orl::parse_algorithm(name);
      Json t = orl::TrainerConfig::defaults_for(algo).to_json();
      t["budget"] = base.trainer.budget;
      t["log_every"] = base.trainer.log_every;
      if (overrides.contains(name)) t.update(overrides[name]);
      c.trainer = orl::TrainerConfig::from_json(t);
      c.role = Role::kSs;
      c.output_dir = sub_dir(base.output_dir, name);
      std::vector<RunReport> ss_runs, oracle_runs;
      SweepCell cell = builder.run({{"algorithm", name}}, name, coupled_setups(c, qs, ids), ids, &ss_runs);
      ExperimentConfig o = c;
      o.role = Role::kOracle;
      o.output_dir = sub_dir(base.output_dir, name + " oracle");
      // The oracle ignores q, so one run serves every setup.
      std::vector<std::string> one{ids.front()};
      SweepCell ocell = builder.run({{"algorithm", name}}, name, {o}, one, &oracle_runs);
      const double oracle_mean = oracle_runs.front().aggregates.mean;
      if (!(oracle_mean > 0.0)) {
        throw StageError("stats", "oracle mean for " + name + " is not positive; relative gap undefined");
      }
      std::vector<std::vector<double>> gap_rows;
      for (const auto& r : ss_runs) {
        std::vector<double> g;
        for (double s : r.scores()) g.push_back(stats::relative_performance_gap(oracle_mean, s));
        gap_rows.push_back(std::move(g));
      }
      const stats::ScoreMatrix gaps(ids, seed_ids(base.seeds), gap_rows);
      cell.gap = stats::relative_performance_gap(oracle_mean, cell.aggregates.mean);
      if (gaps.n_instances() >= 2) {
        cell.gap_ci = stats::stratified_bootstrap_ci(gaps, stats::Statistic::named("iqm"), base.stats.level, base.stats.reps,
                                                     base.stats.seed);
      }
      report.cells.push_back(std::move(cell));
      report.cells.push_back(std::move(ocell));
    }
  } else {
    throw std::invalid_argument("unknown ablation kind '" + kind + "'");
  }
  report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ssorl::harness
