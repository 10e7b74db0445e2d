// Python bindings. Structured values cross the boundary as JSON-compatible
// dicts and lists, converted through Python's json module.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ssorl/data/split.hpp"
#include "ssorl/env/dataset_io.hpp"
#include "ssorl/env/finite_grid.hpp"
#include "ssorl/env/mdp.hpp"
#include "ssorl/harness/config.hpp"
#include "ssorl/harness/pipeline.hpp"
#include "ssorl/harness/report.hpp"
#include "ssorl/harness/sweep.hpp"
#include "ssorl/selftrain/selftrain.hpp"
#include "ssorl/stats/score_matrix.hpp"
#include "ssorl/stats/stats.hpp"

namespace py = pybind11;
using namespace ssorl;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

harness::ExperimentConfig config_from(const py::handle& obj) {
  auto cfg = harness::ExperimentConfig::from_json(from_py(obj));
  cfg.validate();
  return cfg;
}

stats::ScoreMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
  std::vector<std::string> strata, instances;
  for (std::size_t i = 0; i < rows.size(); ++i) strata.push_back(std::to_string(i));
  for (std::size_t j = 0; j < (rows.empty() ? 0 : rows[0].size()); ++j) instances.push_back(std::to_string(j));
  return stats::ScoreMatrix(strata, instances, rows);
}

py::dict dataset_summary(const env::Dataset& ds) {
  py::dict d;
  d["env_id"] = ds.env_id;
  d["state_dim"] = ds.state_dim;
  d["action_dim"] = ds.action_dim;
  d["n_trajectories"] = ds.size();
  d["n_transitions"] = ds.transition_count();
  d["returns"] = ds.returns();
  d["provenance"] = to_py(ds.provenance);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ssorl native core";

  py::register_exception<harness::StageError>(m, "StageError", PyExc_RuntimeError);

  m.def("run_pipeline", [](const py::dict& config) {
    const auto cfg = config_from(config);
    py::gil_scoped_release release;
    const Json out = harness::run_pipeline(cfg).to_json();
    py::gil_scoped_acquire acquire;
    return to_py(out);
  }, py::arg("config"), "Runs baseline/ss/oracle for every seed; returns the report dict.");

  m.def("run_coupled_sweep", [](const py::dict& config, const std::vector<double>& q_list,
                                const std::vector<std::string>& roles) {
    const auto cfg = config_from(config);
    std::vector<harness::Role> rs;
    for (const auto& r : roles) rs.push_back(harness::parse_role(r));
    return to_py(harness::run_coupled_sweep(cfg, q_list, rs).to_json());
  }, py::arg("config"), py::arg("q_list") = std::vector<double>{10, 30, 50, 70, 90, 100},
     py::arg("roles") = std::vector<std::string>{"baseline", "ss", "oracle"});

  m.def("run_ablation", [](const std::string& kind, const py::dict& config, const py::dict& params) {
    return to_py(harness::run_ablation(kind, config_from(config), from_py(params)).to_json());
  }, py::arg("kind"), py::arg("config"), py::arg("params") = py::dict());

  m.def("emit_report", [](const py::list& reports, const std::string& formats, const std::filesystem::path& dir) {
    std::vector<Json> rs;
    for (const auto& r : reports) rs.push_back(from_py(r));
    std::vector<std::string> out;
    for (const auto& p : harness::emit_report(rs, harness::parse_formats(formats), dir)) out.push_back(p.string());
    return out;
  }, py::arg("reports"), py::arg("formats") = "json,csv", py::arg("dir"));

  m.def("config_hash", [](const py::dict& config) { return config_from(config).hash(); });
  m.def("default_config", [] { return to_py(harness::ExperimentConfig{}.to_json()); });

  m.def("generate_dataset", [](const py::dict& config, std::uint64_t seed, const std::filesystem::path& path) {
    const auto cfg = config_from(config);
    const auto mdp = env::make_env(cfg.env_id, cfg.env_params);
    const auto ds = harness::prepare_dataset(cfg, mdp, seed);
    if (!path.empty()) env::save_dataset(path, ds);
    return dataset_summary(ds);
  }, py::arg("config"), py::arg("seed") = 0, py::arg("path") = std::filesystem::path());

  m.def("load_dataset", [](const std::filesystem::path& path) { return dataset_summary(env::load_dataset(path)); });

  m.def("coupled_split", [](const std::filesystem::path& path, double q, double label_frac, std::uint64_t seed) {
    const auto s = data::coupled_split(env::load_dataset(path), q, label_frac, seed);
    return py::make_tuple(s.labelled_indices, s.unlabelled_indices);
  }, py::arg("path"), py::arg("q"), py::arg("label_frac"), py::arg("seed") = 0);

  m.def("iqm", [](const std::vector<double>& v) { return stats::iqm(v); });
  m.def("mean", [](const std::vector<double>& v) { return stats::mean(v); });
  m.def("relative_performance_gap", &stats::relative_performance_gap, py::arg("oracle"), py::arg("agent"));
  m.def("bootstrap_ci", [](const std::vector<std::vector<double>>& rows, const std::string& statistic, double level,
                           std::size_t reps, std::uint64_t seed) {
    const auto m = matrix_from(rows);
    const auto s = stats::Statistic::named(statistic);
    py::gil_scoped_release release;
    const Json out = stats::stratified_bootstrap_ci(m, s, level, reps, seed).to_json();
    py::gil_scoped_acquire acquire;
    return to_py(out);
  }, py::arg("scores"), py::arg("statistic") = "iqm", py::arg("level") = 0.95, py::arg("reps") = 50000,
     py::arg("seed") = 0, "Stratified percentile bootstrap; rows are strata, columns instances.");

  m.def("mixture_variance", [](const std::vector<std::vector<double>>& means,
                               const std::vector<std::vector<double>>& variances) {
    return selftrain::mixture_variance(means, variances);
  });
  m.def("augmentation_schedule", &selftrain::augmentation_schedule, py::arg("n_unlabelled"), py::arg("rounds"));

  m.def("finite_grid_posteriors", [](const std::vector<std::size_t>& states, std::size_t t, std::size_t order,
                                     double slip, std::uint64_t seed) {
    const auto mdp = env::make_finite_grid({3, 3, slip});
    Rng rng(seed);
    const auto beta = env::BehaviorTable::random(mdp.n_states, mdp.n_actions, order, rng);
    py::dict d;
    d["exact"] = env::exact_action_posterior(mdp, beta, states, t);
    if (order == 0) d["local"] = env::local_action_posterior(mdp, beta, states.at(t), states.at(t + 1));
    return d;
  }, py::arg("states"), py::arg("t"), py::arg("order") = 0, py::arg("slip") = 0.2, py::arg("seed") = 0,
     "Exact action posterior on the 3x3 slip grid under a random behavior table.");
}
