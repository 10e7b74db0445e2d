#include "ssorl/env/dataset_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "ssorl/common/binary_io.hpp"

namespace ssorl::env {

namespace {

void write_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) io::write_le<double>(out, v);
}

std::vector<double> read_values(std::istream& in, std::size_t n, const char* what) {
  std::vector<double> v(n);
  for (auto& x : v) x = io::read_le<double>(in, what);
  return v;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& ds) {
  io::write_magic(out, "SSTRAJ1");
  io::write_le<std::uint32_t>(out, kDatasetVersion);
  io::write_string(out, ds.env_id);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.state_dim));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.action_dim));
  io::write_le<std::uint64_t>(out, ds.trajectories.size());
  io::write_string(out, ds.provenance.dump());
  for (const auto& t : ds.trajectories) {
    t.validate();
    if (t.state_dim() != ds.state_dim) throw std::invalid_argument("write_dataset: state dimension mismatch");
    io::write_le<std::uint64_t>(out, t.length());
    io::write_le<std::uint8_t>(out, t.labelled() ? 1 : 0);
    write_values(out, t.states.values());
    if (t.actions) {
      if (t.actions->cols() != ds.action_dim) throw std::invalid_argument("write_dataset: action dimension mismatch");
      write_values(out, t.actions->values());
    }
    write_values(out, t.rewards);
    io::write_le<std::int64_t>(out, t.meta.policy_id);
    io::write_le<std::uint64_t>(out, t.meta.seed);
    io::write_le<double>(out, t.meta.total_return);
    io::write_le<std::uint64_t>(out, t.meta.source_index);
  }
  if (!out) throw std::runtime_error("write_dataset: stream error");
}

Dataset read_dataset(std::istream& in) {
  io::expect_magic(in, "SSTRAJ1");
  const auto version = io::read_le<std::uint32_t>(in, "version");
  if (version != kDatasetVersion) throw std::runtime_error("unsupported dataset version " + std::to_string(version));
  Dataset ds;
  ds.env_id = io::read_string(in, "env id");
  ds.state_dim = io::read_le<std::uint32_t>(in, "state dim");
  ds.action_dim = io::read_le<std::uint32_t>(in, "action dim");
  const auto count = io::read_le<std::uint64_t>(in, "count");
  ds.provenance = Json::parse(io::read_string(in, "provenance"));
  ds.trajectories.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Trajectory t;
    const auto T = io::read_le<std::uint64_t>(in, "trajectory length");
    const auto has_actions = io::read_le<std::uint8_t>(in, "action flag");
    t.states = nn::Tensor({T + 1, ds.state_dim}, read_values(in, (T + 1) * ds.state_dim, "states"));
    if (has_actions) t.actions = nn::Tensor({T, ds.action_dim}, read_values(in, T * ds.action_dim, "actions"));
    t.rewards = read_values(in, T, "rewards");
    t.meta.policy_id = io::read_le<std::int64_t>(in, "policy id");
    t.meta.seed = io::read_le<std::uint64_t>(in, "seed");
    t.meta.total_return = io::read_le<double>(in, "return");
    t.meta.source_index = io::read_le<std::uint64_t>(in, "source index");
    t.validate();
    ds.trajectories.push_back(std::move(t));
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

void export_jsonl(const std::filesystem::path& path, const Dataset& ds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << Json{{"env_id", ds.env_id},
              {"state_dim", ds.state_dim},
              {"action_dim", ds.action_dim},
              {"count", ds.size()},
              {"provenance", ds.provenance}}
             .dump()
      << "\n";
  for (const auto& t : ds.trajectories) {
    Json j{{"length", t.length()},
           {"states", t.states.storage()},
           {"rewards", t.rewards},
           {"policy_id", t.meta.policy_id},
           {"seed", t.meta.seed},
           {"total_return", t.meta.total_return},
           {"source_index", t.meta.source_index}};
    j["actions"] = t.actions ? Json(t.actions->storage()) : Json(nullptr);
    out << j.dump() << "\n";
  }
}

Dataset import_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty JSONL dataset");
  const Json header = Json::parse(line);
  Dataset ds;
  ds.env_id = header.at("env_id").get<std::string>();
  ds.state_dim = header.at("state_dim").get<std::size_t>();
  ds.action_dim = header.at("action_dim").get<std::size_t>();
  ds.provenance = header.value("provenance", Json::object());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    Trajectory t;
    const auto T = j.at("length").get<std::size_t>();
    t.states = nn::Tensor({T + 1, ds.state_dim}, j.at("states").get<std::vector<double>>());
    if (!j.at("actions").is_null()) t.actions = nn::Tensor({T, ds.action_dim}, j.at("actions").get<std::vector<double>>());
    t.rewards = j.at("rewards").get<std::vector<double>>();
    t.meta.policy_id = j.at("policy_id").get<std::int64_t>();
    t.meta.seed = j.at("seed").get<std::uint64_t>();
    t.meta.total_return = j.at("total_return").get<double>();
    t.meta.source_index = j.at("source_index").get<std::uint64_t>();
    t.validate();
    ds.trajectories.push_back(std::move(t));
  }
  if (ds.size() != header.at("count").get<std::size_t>()) throw std::runtime_error("JSONL dataset count mismatch");
  return ds;
}

}  // namespace ssorl::env
