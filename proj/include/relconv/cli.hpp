// Copyright 2026 The relconv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relconv {

/// Exit codes shared by all subcommands.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int error = 1;            // usage, I/O or format error
inline constexpr int kernel_failure = 2;   // a reliable kernel aborted
inline constexpr int rejected = 3;         // qualifier rejected / classification contradicted
}  // namespace exit_code

/// Worker count: hardware concurrency, capped by RELCONV_THREADS when set
/// (0 means serial).
unsigned worker_threads();

/// Entry point of the `relconv` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relconv
