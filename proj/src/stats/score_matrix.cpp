#include "ssorl/stats/score_matrix.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssorl::stats {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw std::invalid_argument("score matrix csv line " + std::to_string(line) + ": bad number '" + cell + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::vector<std::string> strata, std::vector<std::string> instances,
                         std::vector<std::vector<double>> rows)
    : strata_(std::move(strata)), instances_(std::move(instances)), rows_(std::move(rows)) {
  validate();
}

ScoreMatrix ScoreMatrix::single(std::vector<double> values) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < values.size(); ++i) ids.push_back(std::to_string(i));
  return ScoreMatrix({"all"}, std::move(ids), {std::move(values)});
}

void ScoreMatrix::validate() const {
  if (rows_.empty()) throw std::invalid_argument("ScoreMatrix: no strata");
  if (strata_.size() != rows_.size()) throw std::invalid_argument("ScoreMatrix: stratum ids do not match rows");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != instances_.size()) {
      throw std::invalid_argument("ScoreMatrix: row '" + strata_[i] + "' has " + std::to_string(rows_[i].size()) +
                                  " entries, expected " + std::to_string(instances_.size()));
    }
    for (double v : rows_[i]) {
      if (!std::isfinite(v)) throw std::invalid_argument("ScoreMatrix: non-finite entry in row '" + strata_[i] + "'");
    }
  }
}

std::vector<double> ScoreMatrix::flat() const {
  std::vector<double> out;
  for (const auto& r : rows_) out.insert(out.end(), r.begin(), r.end());
  return out;
}

Json ScoreMatrix::to_json() const {
  return Json{{"strata", strata_}, {"instances", instances_}, {"scores", rows_}};
}

ScoreMatrix ScoreMatrix::from_json(const Json& j) {
  return ScoreMatrix(j.at("strata").get<std::vector<std::string>>(), j.at("instances").get<std::vector<std::string>>(),
                     j.at("scores").get<std::vector<std::vector<double>>>());
}

std::string ScoreMatrix::to_csv() const {
  std::string out = "stratum";
  for (const auto& id : instances_) out += "," + id;
  out += "\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out += strata_[i];
    for (double v : rows_[i]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

ScoreMatrix ScoreMatrix::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> instances, strata;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (header) {
      if (cells.size() < 2) throw std::invalid_argument("score matrix csv: header needs instance ids");
      instances.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    strata.push_back(cells.front());
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_double(cells[c], line_no));
    rows.push_back(std::move(row));
  }
  return ScoreMatrix(std::move(strata), std::move(instances), std::move(rows));
}

ScoreMatrix ScoreMatrix::load(const std::filesystem::path& path) {
  if (path.extension() == ".json") return from_json(read_json_file(path));
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

}  // namespace ssorl::stats
