/* Copyright 2026 The StableMatch Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef STABLEMATCH_CLI_H_
#define STABLEMATCH_CLI_H_

#include <ostream>

namespace stablematch {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// Environment variable that, when set, replaces the seed read from a config.
inline constexpr char kSeedEnvVar[] = "STABLE_MATCH_SEED";

// Entry point of the stable_match tool. Subcommands: match, ab-demo,
// stability, grad-check, fuse-check.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace stablematch

#endif  // STABLEMATCH_CLI_H_
