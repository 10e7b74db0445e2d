#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"

namespace ssorl::harness {

enum class ReportFormat { kJson, kCsv, kSvg };
ReportFormat parse_format(const std::string& name);
/// Comma-separated list, e.g. "json,csv,svg".
std::vector<ReportFormat> parse_formats(const std::string& list);

// Files per report, with <stem> = report name with unsafe characters
// replaced by '_' (plus "_<i>" when several reports share a name):
//   <stem>.json        the report object as given
//   <stem>_rows.csv    label,role,seed,score,key (key as compact JSON)
//   <stem>_cells.csv   label,role,n,mean,std,se,iqm,ci_lower,ci_upper,
//                      level,reps,gap,gap_lower,gap_upper (blank when absent)
//   <stem>.svg         mean line with +-std band per role over the cells
// Output is a pure function of the report objects.
std::vector<std::filesystem::path> emit_report(const std::vector<Json>& reports, const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir);

std::string rows_csv(const Json& report);
std::string cells_csv(const Json& report);
std::string plot_svg(const Json& report);

/// Wall-clock seconds go in their own file so report bytes stay stable.
void write_timing(const std::filesystem::path& dir, const std::string& name, double seconds);

}  // namespace ssorl::harness
