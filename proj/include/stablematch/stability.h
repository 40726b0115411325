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

#ifndef STABLEMATCH_STABILITY_H_
#define STABLEMATCH_STABILITY_H_

#include <ostream>
#include <vector>

#include "stablematch/matching.h"

namespace stablematch {

// Assignments of one image at successive matching points. Entry 0 is the
// baseline (encoder proposals, or the previous training step); entries 1..L
// follow it.
struct LayerAssignments {
  std::vector<Assignment> per_layer;
  int n_gt = 0;
};

// Percentage of ground truths whose matched prediction differs between the
// two assignments. Both must cover exactly gts 0..n_gt-1.
double unstable_score(const Assignment& prev, const Assignment& curr, int n_gt);

// Element l-1 compares per_layer[l-1] with per_layer[l], for l = 1..L.
std::vector<double> layerwise_unstable(const LayerAssignments& layers);

// Simple mean across scenes; empty input yields 0.
double mean_unstable(const std::vector<double>& scores);

struct UnstableRecord {
  long long scene_id = 0;
  int layer_or_step = 0;
  double unstable_score = 0.0;
};

// CSV with header "scene_id,layer_or_step,unstable_score", LF endings.
void write_unstable_csv(std::ostream& out,
                        const std::vector<UnstableRecord>& records);

}  // namespace stablematch

#endif  // STABLEMATCH_STABILITY_H_
