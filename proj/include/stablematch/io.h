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

#ifndef STABLEMATCH_IO_H_
#define STABLEMATCH_IO_H_

#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stablematch/matching.h"
#include "stablematch/simlab.h"

namespace stablematch {

// Shortest decimal that round-trips to `v`; '.' separator regardless of
// locale.
std::string format_double(double v);

// Raised on malformed input. what() starts with the JSON path of the
// offending field, e.g. "predictions[1].box: expected 4 numbers".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSceneFileVersion = "1";

// On-disk scene: boxes in corner form, predictions carry a probability.
struct SceneFile {
  std::vector<GroundTruth> ground_truths;
  std::vector<Prediction> predictions;

  // Optimizable form. Throws std::invalid_argument when a prediction cannot
  // be parameterized (center outside the unit square, p not in (0, 1)).
  Scene to_scene() const;
  static SceneFile FromScene(const Scene& scene);
};

SceneFile parse_scene_file(std::string_view text);
std::string scene_file_to_json(const SceneFile& scene);

// Missing fields keep their defaults. cost_weights.w_cls falls back to
// loss_config.cost_weight.
ExperimentConfig parse_config(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

// Rows are predictions, columns ground truths; header "pred,gt0,gt1,...".
void write_cost_matrix_csv(std::ostream& out, const CostMatrix& c);

}  // namespace stablematch

#endif  // STABLEMATCH_IO_H_
