#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"

namespace ssorl::stats {

/// Normalized returns: one row per stratum (task x data setup), one column
/// per training instance.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::vector<std::string> strata, std::vector<std::string> instances, std::vector<std::vector<double>> rows);
  /// One stratum named "all".
  static ScoreMatrix single(std::vector<double> values);

  std::size_t n_strata() const { return rows_.size(); }
  std::size_t n_instances() const { return instances_.size(); }
  const std::vector<std::string>& strata() const { return strata_; }
  const std::vector<std::string>& instances() const { return instances_; }
  const std::vector<double>& row(std::size_t i) const { return rows_.at(i); }
  double at(std::size_t i, std::size_t j) const { return rows_.at(i).at(j); }
  std::vector<double> flat() const;

  Json to_json() const;
  static ScoreMatrix from_json(const Json& j);
  /// Header row "stratum,<instance ids...>", then "<stratum id>,<values...>".
  std::string to_csv() const;
  static ScoreMatrix from_csv(const std::string& text);
  /// Dispatches on extension: .csv or .json.
  static ScoreMatrix load(const std::filesystem::path& path);

 private:
  void validate() const;

  std::vector<std::string> strata_;
  std::vector<std::string> instances_;
  std::vector<std::vector<double>> rows_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace ssorl::stats
