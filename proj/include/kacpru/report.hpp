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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace kacpru::report {

enum class Flag { pass, fail, informational };

std::string flag_name(Flag f);

// One measured quantity, optionally compared against a bound.  The
// bound_ref tag names the check in this project's catalog (documented in
// the README); vacuous bounds are flagged informational and never counted
// as passes.
struct CheckLine {
  std::string name;
  double measured = 0.0;
  std::optional<double> bound;  // pass iff measured <= bound (or >= for lower bounds)
  bool lower_bound = false;     // bound is a lower bound on measured
  std::string bound_ref;
  Flag flag = Flag::informational;
  std::string details;
};

CheckLine check_upper(const std::string& name, double measured, double bound,
                      const std::string& ref, double vacuous_above,
                      const std::string& details = "");
CheckLine check_lower(const std::string& name, double measured, double bound,
                      const std::string& ref, double vacuous_below,
                      const std::string& details = "");
CheckLine info_line(const std::string& name, double measured, const std::string& ref,
                    const std::string& details = "");

struct Report {
  std::string experiment;
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<CheckLine> checks;
  double wall_ms = 0.0;

  bool all_pass() const;  // no `fail` flags (informational lines don't count)
  nlohmann::ordered_json to_json() const;
};

void write_report(const Report& rep, const std::string& path);

// RFC-4180 CSV: fields with commas, quotes or newlines are quoted, quotes
// doubled.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const CsvTable& table, const std::string& path);

std::string format_double(double v);

}  // namespace kacpru::report
