// Copyright 2026 The srkit Authors
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

#ifndef SRKIT_CLI_HPP_
#define SRKIT_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace srkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs `srkit <args...>` (args excludes the program name). Returns the
/// exit status: 0 on success, 1 when the library reports an error, 2 on a
/// usage error (help text goes to err).
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CommandInfo {
  std::string name;
  std::string summary;
  /// Library entry points the command can reach.
  std::vector<std::string> operations;
};

const std::vector<CommandInfo>& commands();

}  // namespace srkit::cli

#endif  // SRKIT_CLI_HPP_
