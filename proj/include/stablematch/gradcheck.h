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

#ifndef STABLEMATCH_GRADCHECK_H_
#define STABLEMATCH_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

namespace stablematch {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;

// |analytic - numeric| / max(1, |analytic|).
double relative_error(double analytic, double numeric);

struct GradCheckOptions {
  int samples = 100;  // per suite; scenes per mode for the step suites
  std::uint64_t seed = 0;
  double h = kFdStep;
  double tolerance = kGradTolerance;
  // Test hook: perturbs every analytic gradient before comparison.
  bool corrupt = false;
};

struct GradCheckSuite {
  std::string name;
  int checked = 0;     // samples compared
  int skipped = 0;     // samples rejected as near a kink
  long long comparisons = 0;
  double max_rel_error = 0.0;
  double tolerance = kGradTolerance;

  bool passed() const { return checked > 0 && max_rel_error < tolerance; }
};

struct GradCheckReport {
  std::vector<GradCheckSuite> suites;

  bool passed() const;
};

// Suites: "focal" and "position_supervised" (per-term d/dp for gamma in
// {1, 2, 4}), "geometry" (L1 and GIoU corner gradients), "step_default" and
// "step_stable" (full step objective on random scenes with the assignment
// and classification targets frozen).
GradCheckReport run_grad_check(const GradCheckOptions& options);

}  // namespace stablematch

#endif  // STABLEMATCH_GRADCHECK_H_
