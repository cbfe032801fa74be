// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_REPORT_HPP
#define SBISECT_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbisect/errors.hpp"
#include "sbisect/stats.hpp"

namespace sbisect {

/// Relative slack when checking whether a reference value lies inside an
/// interval; degenerate intervals are computed in floating point.
inline constexpr double kInsideSlack = 1e-12;

inline bool reference_inside(const IntervalEstimate& ci, double reference) {
  const double slack = kInsideSlack * std::max(1.0, std::fabs(reference));
  return reference >= ci.lower - slack && reference <= ci.upper + slack;
}

struct ReportCell {
  std::string label;
  double value = 0.0;
  std::optional<IntervalEstimate> ci;
  std::optional<double> theory;
  std::optional<bool> theory_inside;

  bool operator==(const ReportCell&) const = default;
};

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool operator==(const ReportTable&) const = default;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ReportCell> cells;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<ReportTable> tables;
  std::optional<double> wall_time;

  void set_config(std::string key, std::string value) { config.emplace_back(std::move(key), std::move(value)); }

  void add_estimate(std::string label, const IntervalEstimate& ci, std::optional<double> theory = std::nullopt) {
    ReportCell cell{std::move(label), ci.point, ci, theory, std::nullopt};
    if (theory) cell.theory_inside = reference_inside(ci, *theory);
    cells.push_back(std::move(cell));
  }

  void add_scalar(std::string label, double value, std::optional<double> theory = std::nullopt) {
    cells.push_back(ReportCell{std::move(label), value, std::nullopt, theory, std::nullopt});
  }

  void add_flag(std::string name, bool value) { flags.emplace_back(std::move(name), value); }

  [[nodiscard]] const ReportCell& cell(const std::string& label) const {
    for (const auto& c : cells) {
      if (c.label == label) return c;
    }
    throw Error("report has no cell '" + label + "'");
  }

  [[nodiscard]] bool flag(const std::string& name) const {
    for (const auto& [n, v] : flags) {
      if (n == name) return v;
    }
    throw Error("report has no flag '" + name + "'");
  }

  [[nodiscard]] const ReportTable& table(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name == name) return t;
    }
    throw Error("report has no table '" + name + "'");
  }

  [[nodiscard]] std::string config_value(const std::string& key) const {
    for (const auto& [k, v] : config) {
      if (k == key) return v;
    }
    throw Error("report has no config key '" + key + "'");
  }

  bool operator==(const ExperimentReport&) const = default;
};

// ---------------------------------------------------------------- JSON

inline nlohmann::ordered_json to_json(const ExperimentReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = report.experiment;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  j["config"] = config;
  ordered_json cells = ordered_json::array();
  for (const auto& c : report.cells) {
    ordered_json cell;
    cell["label"] = c.label;
    cell["value"] = c.value;
    if (c.ci) {
      cell["ci"] = {{"point", c.ci->point},
                    {"lower", c.ci->lower},
                    {"upper", c.ci->upper},
                    {"level", c.ci->level},
                    {"method", to_string(c.ci->method)}};
    }
    if (c.theory) cell["theory"] = *c.theory;
    if (c.theory_inside) cell["theory_inside"] = *c.theory_inside;
    cells.push_back(std::move(cell));
  }
  j["cells"] = cells;
  ordered_json flags = ordered_json::object();
  for (const auto& [n, v] : report.flags) flags[n] = v;
  j["flags"] = flags;
  ordered_json tables = ordered_json::array();
  for (const auto& t : report.tables) {
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  }
  j["tables"] = tables;
  if (report.wall_time) j["wall_time"] = *report.wall_time;
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::ordered_json& j) {
  ExperimentReport r;
  try {
    r.experiment = j.at("experiment").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
    for (const auto& c : j.at("cells")) {
      ReportCell cell;
      cell.label = c.at("label").get<std::string>();
      cell.value = c.at("value").get<double>();
      if (c.contains("ci")) {
        const auto& ci = c.at("ci");
        IntervalEstimate e;
        e.point = ci.at("point").get<double>();
        e.lower = ci.at("lower").get<double>();
        e.upper = ci.at("upper").get<double>();
        e.level = ci.at("level").get<double>();
        e.method = ci.at("method").get<std::string>() == "wilson" ? IntervalMethod::Wilson
                                                                  : IntervalMethod::BootstrapPercentile;
        cell.ci = e;
      }
      if (c.contains("theory")) cell.theory = c.at("theory").get<double>();
      if (c.contains("theory_inside")) cell.theory_inside = c.at("theory_inside").get<bool>();
      r.cells.push_back(std::move(cell));
    }
    for (const auto& [n, v] : j.at("flags").items()) r.flags.emplace_back(n, v.get<bool>());
    for (const auto& t : j.at("tables")) {
      r.tables.push_back(ReportTable{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(),
                                     t.at("rows").get<std::vector<std::vector<double>>>()});
    }
    if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

inline void write_json(std::ostream& out, const ExperimentReport& report) { out << to_json(report).dump(2) << '\n'; }

inline ExperimentReport read_json(std::istream& in) {
  try {
    return report_from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what());
  }
}

// ----------------------------------------------------------------- CSV
//
// Sections introduced by '#' lines:
//   #experiment,<name>   #config   #cells   #flags   #table,<name>   #wall_time,<seconds>
// Reals are written with 17 significant digits.

namespace csv {

inline std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double parse_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("bad number '" + s + "' in report CSV");
  return v;
}

}  // namespace csv

/// One table as plain CSV: a header row and one line per row.
inline void write_table_csv(std::ostream& out, const ReportTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv::field(table.columns[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv::number(row[i]);
    out << '\n';
  }
}

inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "#experiment," << csv::field(report.experiment) << '\n';
  out << "#config\nkey,value\n";
  for (const auto& [k, v] : report.config) out << csv::field(k) << ',' << csv::field(v) << '\n';
  out << "#cells\nlabel,value,lower,upper,level,method,theory,theory_inside\n";
  for (const auto& c : report.cells) {
    out << csv::field(c.label) << ',' << csv::number(c.value) << ',';
    if (c.ci) {
      out << csv::number(c.ci->lower) << ',' << csv::number(c.ci->upper) << ',' << csv::number(c.ci->level) << ','
          << to_string(c.ci->method);
    } else {
      out << ",,,";
    }
    out << ',' << (c.theory ? csv::number(*c.theory) : "") << ',';
    if (c.theory_inside) out << (*c.theory_inside ? "true" : "false");
    out << '\n';
  }
  out << "#flags\nname,value\n";
  for (const auto& [n, v] : report.flags) out << csv::field(n) << ',' << (v ? "true" : "false") << '\n';
  for (const auto& t : report.tables) {
    out << "#table," << csv::field(t.name) << '\n';
    write_table_csv(out, t);
  }
  if (report.wall_time) out << "#wall_time," << csv::number(*report.wall_time) << '\n';
}

inline ExperimentReport read_csv(std::istream& in) {
  enum class Section { None, Config, Cells, Flags, Table };
  ExperimentReport r;
  Section section = Section::None;
  bool expect_header = false;
  std::string line;
  auto parse_bool = [](const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError("bad boolean '" + s + "' in report CSV");
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv::split(line);
    if (line.front() == '#') {
      const std::string tag = fields[0];
      expect_header = true;
      if (tag == "#experiment" && fields.size() == 2) {
        r.experiment = fields[1];
        section = Section::None;
        expect_header = false;
      } else if (tag == "#config") {
        section = Section::Config;
      } else if (tag == "#cells") {
        section = Section::Cells;
      } else if (tag == "#flags") {
        section = Section::Flags;
      } else if (tag == "#table" && fields.size() == 2) {
        section = Section::Table;
        r.tables.push_back(ReportTable{fields[1], {}, {}});
      } else if (tag == "#wall_time" && fields.size() == 2) {
        r.wall_time = csv::parse_number(fields[1]);
        section = Section::None;
        expect_header = false;
      } else {
        throw ParseError("unknown report CSV section '" + line + "'");
      }
      continue;
    }
    if (expect_header) {
      expect_header = false;
      if (section == Section::Table) r.tables.back().columns = fields;
      continue;
    }
    switch (section) {
      case Section::Config:
        if (fields.size() != 2) throw ParseError("bad config line '" + line + "'");
        r.config.emplace_back(fields[0], fields[1]);
        break;
      case Section::Cells: {
        if (fields.size() != 8) throw ParseError("bad cell line '" + line + "'");
        ReportCell c;
        c.label = fields[0];
        c.value = csv::parse_number(fields[1]);
        if (!fields[2].empty()) {
          IntervalEstimate e;
          e.point = c.value;
          e.lower = csv::parse_number(fields[2]);
          e.upper = csv::parse_number(fields[3]);
          e.level = csv::parse_number(fields[4]);
          e.method = fields[5] == "wilson" ? IntervalMethod::Wilson : IntervalMethod::BootstrapPercentile;
          c.ci = e;
        }
        if (!fields[6].empty()) c.theory = csv::parse_number(fields[6]);
        if (!fields[7].empty()) c.theory_inside = parse_bool(fields[7]);
        r.cells.push_back(std::move(c));
        break;
      }
      case Section::Flags:
        if (fields.size() != 2) throw ParseError("bad flag line '" + line + "'");
        r.flags.emplace_back(fields[0], parse_bool(fields[1]));
        break;
      case Section::Table: {
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(csv::parse_number(f));
        r.tables.back().rows.push_back(std::move(row));
        break;
      }
      case Section::None:
        throw ParseError("report CSV line outside any section: '" + line + "'");
    }
  }
  return r;
}

}  // namespace sbisect

#endif  // SBISECT_REPORT_HPP
