#include "ssorl/harness/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ssorl/stats/score_matrix.hpp"

namespace ssorl::harness {

using stats::format_double;

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "svg" || name == "svg-plots") return ReportFormat::kSvg;
  throw std::invalid_argument("unknown report format '" + name + "'");
}

std::vector<ReportFormat> parse_formats(const std::string& list) {
  std::vector<ReportFormat> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_format(item));
  }
  if (out.empty()) throw std::invalid_argument("no report formats given");
  return out;
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string num(const Json& v) { return v.is_number() ? format_double(v.get<double>()) : std::string(); }

std::string stem_for(const std::string& name) {
  std::string s = name.empty() ? "report" : name;
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string rows_csv(const Json& report) {
  std::string out = "label,role,seed,score,key\n";
  for (const auto& r : report.at("rows")) {
    out += csv_cell(r.at("label").get<std::string>()) + "," + r.at("role").get<std::string>() + "," +
           std::to_string(r.at("seed").get<std::uint64_t>()) + "," + num(r.at("score")) + "," +
           csv_cell(r.at("key").dump()) + "\n";
  }
  return out;
}

std::string cells_csv(const Json& report) {
  std::string out = "label,role,n,mean,std,se,iqm,ci_lower,ci_upper,level,reps,gap,gap_lower,gap_upper\n";
  for (const auto& c : report.at("cells")) {
    const auto& ci = c.at("ci");
    const Json gap_ci = c.value("gap_ci", Json());
    out += csv_cell(c.at("label").get<std::string>()) + "," + c.at("role").get<std::string>() + "," +
           std::to_string(c.at("n").get<std::size_t>()) + "," + num(c.at("mean")) + "," + num(c.at("std")) + "," +
           num(c.at("se")) + "," + num(c.at("iqm")) + "," + num(ci.at("lower")) + "," + num(ci.at("upper")) + "," +
           num(ci.at("level")) + "," + std::to_string(ci.at("reps").get<std::size_t>()) + "," +
           num(c.value("gap", Json())) + "," + (gap_ci.is_object() ? num(gap_ci.at("lower")) : "") + "," +
           (gap_ci.is_object() ? num(gap_ci.at("upper")) : "") + "\n";
  }
  return out;
}

std::string plot_svg(const Json& report) {
  const auto& cells = report.at("cells");
  std::vector<std::string> labels, roles;
  for (const auto& c : cells) {
    const auto l = c.at("label").get<std::string>();
    const auto r = c.at("role").get<std::string>();
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    if (std::find(roles.begin(), roles.end(), r) == roles.end()) roles.push_back(r);
  }
  double lo = 0.0, hi = 1.0;
  for (const auto& c : cells) {
    const double m = c.at("mean").get<double>(), s = c.at("std").get<double>();
    lo = std::min(lo, m - s);
    hi = std::max(hi, m + s);
  }
  const double W = 640, H = 400, L = 60, R = 130, T = 30, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto xpos = [&](std::size_t i) {
    return labels.size() == 1 ? L + pw / 2 : L + pw * static_cast<double>(i) / static_cast<double>(labels.size() - 1);
  };
  auto ypos = [&](double v) { return T + ph * (hi - v) / (hi - lo); };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(L) + "\" y=\"18\" font-size=\"13\">" +
         escape_xml(report.value("name", std::string()) + " (" + report.value("kind", std::string()) + ")") + "</text>\n";
  svg += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(T + ph) + "\" x2=\"" + fmt(L + pw) + "\" y2=\"" + fmt(T + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(T) + "\" x2=\"" + fmt(L) + "\" y2=\"" + fmt(T + ph) +
         "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(ypos(v) + 4) + "\" font-size=\"10\" text-anchor=\"end\">" +
           fmt(v) + "</text>\n";
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    svg += "<text x=\"" + fmt(xpos(i)) + "\" y=\"" + fmt(T + ph + 16) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + escape_xml(labels[i]) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(L + pw / 2) + "\" y=\"" + fmt(H - 12) + "\" font-size=\"12\" text-anchor=\"middle\">" +
         escape_xml(report.value("variable", std::string())) + "</text>\n";
  for (std::size_t ri = 0; ri < roles.size(); ++ri) {
    const std::string color = palette[ri % 6];
    std::vector<std::pair<double, const Json*>> pts;
    for (const auto& c : cells) {
      if (c.at("role") != roles[ri]) continue;
      const auto idx = static_cast<std::size_t>(
          std::find(labels.begin(), labels.end(), c.at("label").get<std::string>()) - labels.begin());
      pts.push_back({xpos(idx), &c});
    }
    std::string upper, lower, line;
    for (const auto& [x, c] : pts) {
      const double m = c->at("mean").get<double>(), s = c->at("std").get<double>();
      upper += fmt(x) + "," + fmt(ypos(m + s)) + " ";
      line += fmt(x) + "," + fmt(ypos(m)) + " ";
    }
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      const double m = it->second->at("mean").get<double>(), s = it->second->at("std").get<double>();
      lower += fmt(it->first) + "," + fmt(ypos(m - s)) + " ";
    }
    svg += "<polygon points=\"" + upper + lower + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    for (const auto& [x, c] : pts) {
      svg += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(ypos(c->at("mean").get<double>())) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
    }
    const double ly = T + 14.0 * static_cast<double>(ri);
    svg += "<rect x=\"" + fmt(L + pw + 12) + "\" y=\"" + fmt(ly) + "\" width=\"10\" height=\"10\" fill=\"" + color +
           "\"/>\n";
    svg += "<text x=\"" + fmt(L + pw + 26) + "\" y=\"" + fmt(ly + 9) + "\" font-size=\"11\">" + escape_xml(roles[ri]) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> emit_report(const std::vector<Json>& reports, const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir) {
  if (reports.empty()) throw std::invalid_argument("emit_report: no reports");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw std::runtime_error("emit_report: cannot create " + dir.string());
  std::map<std::string, int> seen;
  for (const auto& r : reports) ++seen[stem_for(r.value("name", std::string()))];
  std::map<std::string, int> used;
  std::vector<std::filesystem::path> written;
  for (const auto& r : reports) {
    std::string stem = stem_for(r.value("name", std::string()));
    if (seen[stem] > 1) stem += "_" + std::to_string(used[stem]++);
    for (auto f : formats) {
      switch (f) {
        case ReportFormat::kJson:
          written.push_back(dir / (stem + ".json"));
          write_json_file(written.back(), r);
          break;
        case ReportFormat::kCsv:
          written.push_back(dir / (stem + "_rows.csv"));
          write_text_file(written.back(), rows_csv(r));
          written.push_back(dir / (stem + "_cells.csv"));
          write_text_file(written.back(), cells_csv(r));
          break;
        case ReportFormat::kSvg:
          written.push_back(dir / (stem + ".svg"));
          write_text_file(written.back(), plot_svg(r));
          break;
      }
    }
  }
  return written;
}

void write_timing(const std::filesystem::path& dir, const std::string& name, double seconds) {
  write_json_file(dir / (stem_for(name) + ".timing.json"), Json{{"name", name}, {"wall_clock_seconds", seconds}});
}

}  // namespace ssorl::harness
