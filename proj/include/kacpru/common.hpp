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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kacpru {

using cxd = std::complex<double>;

inline constexpr const char* kVersion = "kacpru 0.1.0";

// Exit codes used by the CLI: 0 pass, 1 check failure, 2 usage, 3 resource.
enum class ExitCode : int { ok = 0, check_failure = 1, usage = 2, resource = 3 };

// A precondition or contract was violated by the caller (e.g. a
// non-Hermitian matrix passed where a density matrix is required).
struct contract_violation : std::runtime_error {
  explicit contract_violation(const std::string& what) : std::runtime_error(what) {}
};

// A computation exceeded a configured feasibility cap (memory or
// enumeration budget).
struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad command-line or config input.
struct usage_error : std::runtime_error {
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kacpru
