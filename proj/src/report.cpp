// Copyright 2026 The kacpru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kacpru/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kacpru/common.hpp"

namespace kacpru::report {

std::string flag_name(Flag f) {
  switch (f) {
    case Flag::pass: return "pass";
    case Flag::fail: return "fail";
    case Flag::informational: return "informational";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CheckLine check_upper(const std::string& name, double measured, double bound,
                      const std::string& ref, double vacuous_above, const std::string& details) {
  CheckLine line;
  line.name = name;
  line.measured = measured;
  line.bound = bound;
  line.bound_ref = ref;
  line.details = details;
  if (bound >= vacuous_above) {
    line.flag = Flag::informational;
  } else {
    line.flag = measured <= bound ? Flag::pass : Flag::fail;
  }
  return line;
}

CheckLine check_lower(const std::string& name, double measured, double bound,
                      const std::string& ref, double vacuous_below, const std::string& details) {
  CheckLine line;
  line.name = name;
  line.measured = measured;
  line.bound = bound;
  line.lower_bound = true;
  line.bound_ref = ref;
  line.details = details;
  if (bound <= vacuous_below) {
    line.flag = Flag::informational;
  } else {
    line.flag = measured >= bound ? Flag::pass : Flag::fail;
  }
  return line;
}

CheckLine info_line(const std::string& name, double measured, const std::string& ref,
                    const std::string& details) {
  CheckLine line;
  line.name = name;
  line.measured = measured;
  line.bound_ref = ref;
  line.details = details;
  line.flag = Flag::informational;
  return line;
}

bool Report::all_pass() const {
  for (const auto& c : checks)
    if (c.flag == Flag::fail) return false;
  return true;
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  nlohmann::ordered_json lines = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json line;
    line["name"] = c.name;
    line["measured"] = format_double(c.measured);
    if (c.bound) {
      line["bound"] = format_double(*c.bound);
      line["bound_kind"] = c.lower_bound ? "lower" : "upper";
    }
    line["bound_ref"] = c.bound_ref;
    line["flag"] = flag_name(c.flag);
    if (!c.details.empty()) line["details"] = c.details;
    lines.push_back(line);
  }
  j["checks"] = lines;
  j["wall_ms"] = wall_ms;
  return j;
}

void write_report(const Report& rep, const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw resource_error("write_report: cannot open " + path);
  out << rep.to_json().dump(2) << "\n";
}

namespace {
std::string csv_escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}
}  // namespace

void write_csv(const CsvTable& table, const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw resource_error("write_csv: cannot open " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << csv_escape(row[i]);
    }
    out << "\r\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

}  // namespace kacpru::report
