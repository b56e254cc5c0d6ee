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

#include <cstdint>
#include <string>
#include <vector>

#include "kacpru/common.hpp"
#include "kacpru/report.hpp"

namespace kacpru::cli {

struct Config {
  std::string command;     // verify | experiment | sweep
  std::string experiment;  // dbproj | twirl | invariance | mixing | distinguish | prf
  unsigned n = 2;
  unsigned d = 2;
  unsigned T = 0;  // 0 = use 30 n
  unsigned t = 2;
  unsigned m = 2;
  std::int64_t trials = 2000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;  // 0 = KACPRU_THREADS or hardware
  std::int64_t dense_cap = std::int64_t(1) << 24;
  std::string out = "out";
  std::vector<std::string> families;
  std::string sweep_axis = "T";
  std::vector<std::string> prf_key_hex;

  unsigned resolved_T() const { return T == 0 ? 30 * n : T; }
  unsigned resolved_threads() const;
  void validate() const;
};

// Parses argv (flags override values from --config file).  Throws
// usage_error on bad input.
Config parse_config(const std::vector<std::string>& args);

// Runs the configured suite, writing report.json (and tables/*.csv for
// experiments that emit them) under config.out.
report::Report run_suite(const Config& config);

// Full main: parse, run, write, map outcomes to exit codes
// (0 pass, 1 check failure, 2 usage, 3 resource).
int run_main(int argc, char** argv);

}  // namespace kacpru::cli
