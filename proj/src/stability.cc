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

#include "stablematch/stability.h"

#include <numeric>
#include <stdexcept>
#include <string>

#include "stablematch/io.h"

namespace stablematch {

namespace {

void check_coverage(const Assignment& a, int n_gt, const char* which) {
  if (static_cast<int>(a.pairs.size()) != n_gt) {
    throw std::invalid_argument(std::string("unstable_score: ") + which +
                                " does not cover n_gt ground truths");
  }
  for (int j = 0; j < n_gt; ++j) {
    if (a.pairs[j].second != j) {
      throw std::invalid_argument(std::string("unstable_score: ") + which +
                                  " has a mismatched ground-truth set");
    }
  }
}

}  // namespace

double unstable_score(const Assignment& prev, const Assignment& curr,
                      int n_gt) {
  if (n_gt < 1) throw std::invalid_argument("unstable_score: n_gt < 1");
  check_coverage(prev, n_gt, "prev");
  check_coverage(curr, n_gt, "curr");
  int changed = 0;
  for (int j = 0; j < n_gt; ++j) {
    if (prev.pairs[j].first != curr.pairs[j].first) ++changed;
  }
  return 100.0 * changed / n_gt;
}

std::vector<double> layerwise_unstable(const LayerAssignments& layers) {
  if (layers.per_layer.size() < 2) {
    throw std::invalid_argument("layerwise_unstable: need at least 2 entries");
  }
  std::vector<double> scores;
  scores.reserve(layers.per_layer.size() - 1);
  for (std::size_t l = 1; l < layers.per_layer.size(); ++l) {
    scores.push_back(unstable_score(layers.per_layer[l - 1],
                                    layers.per_layer[l], layers.n_gt));
  }
  return scores;
}

double mean_unstable(const std::vector<double>& scores) {
  if (scores.empty()) return 0.0;
  return std::accumulate(scores.begin(), scores.end(), 0.0) /
         static_cast<double>(scores.size());
}

void write_unstable_csv(std::ostream& out,
                        const std::vector<UnstableRecord>& records) {
  out << "scene_id,layer_or_step,unstable_score\n";
  for (const auto& r : records) {
    out << r.scene_id << ',' << r.layer_or_step << ','
        << format_double(r.unstable_score) << '\n';
  }
}

}  // namespace stablematch
