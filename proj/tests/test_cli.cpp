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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kacpru/cli.hpp"

using namespace kacpru;
using namespace kacpru::cli;

TEST_SUITE_BEGIN("cli");

TEST_CASE("flag parsing") {
  Config cfg = parse_config({"verify", "--n", "2", "--d", "2", "--t", "2", "--seed", "5"});
  CHECK(cfg.command == "verify");
  CHECK(cfg.n == 2);
  CHECK(cfg.seed == 5);
  CHECK(cfg.seed_given);

  Config exp = parse_config({"experiment", "mixing", "--n", "3", "--seed", "1"});
  CHECK(exp.command == "experiment");
  CHECK(exp.experiment == "mixing");

  CHECK_THROWS_AS(parse_config({"experiment", "nonsense", "--seed", "1"}), usage_error);
  CHECK_THROWS_AS(parse_config({"verify", "--trials", "-1", "--seed", "1"}), usage_error);
  CHECK_THROWS_AS(parse_config({"verify", "--n", "1", "--seed", "1"}), usage_error);
}

TEST_CASE("config file values are overridden by flags") {
  const std::string dir = "test_cli_tmp";
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/config.json";
  {
    std::ofstream out(path);
    out << R"({"n": 3, "d": 1, "seed": 77, "trials": 123})";
  }
  Config cfg = parse_config({"verify", "--config", path, "--d", "2"});
  CHECK(cfg.n == 3);       // from file
  CHECK(cfg.d == 2);       // flag wins
  CHECK(cfg.seed == 77);   // from file
  CHECK(cfg.trials == 123);
  std::filesystem::remove_all(dir);
}

TEST_CASE("mixing experiment writes a deterministic report") {
  const std::string dir = "test_cli_out";
  std::filesystem::remove_all(dir);
  Config cfg = parse_config({"experiment", "mixing", "--n", "2", "--d", "2", "--trials", "300",
                             "--seed", "9", "--threads", "1", "--out", dir});
  auto rep = run_suite(cfg);
  CHECK(rep.all_pass());
  CHECK(std::filesystem::exists(dir + "/report.json"));
  CHECK(std::filesystem::exists(dir + "/tables/mixing.csv"));
  auto j1 = rep.to_json();

  // re-run with a different thread count: identical numeric fields
  Config cfg2 = parse_config({"experiment", "mixing", "--n", "2", "--d", "2", "--trials", "300",
                              "--seed", "9", "--threads", "2", "--out", dir});
  auto rep2 = run_suite(cfg2);
  auto j2 = rep2.to_json();
  j1.erase("wall_ms");
  j2.erase("wall_ms");
  j1["config"].erase("threads_requested");
  j2["config"].erase("threads_requested");
  CHECK(j1.dump() == j2.dump());
  std::filesystem::remove_all(dir);
}

TEST_CASE("keyed-walk experiment accepts a hex key") {
  const std::string dir = "test_cli_prf";
  std::filesystem::remove_all(dir);
  Config cfg = parse_config({"experiment", "prf", "--n", "4", "--d", "4", "--trials", "400",
                             "--seed", "21", "--threads", "2", "--out", dir, "--key",
                             "0123456789abcdef"});
  auto rep = run_suite(cfg);
  for (const auto& c : rep.checks) CHECK(c.flag != report::Flag::fail);
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
