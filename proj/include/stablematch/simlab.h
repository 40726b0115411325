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

#ifndef STABLEMATCH_SIMLAB_H_
#define STABLEMATCH_SIMLAB_H_

#include <cstdint>
#include <map>
#include <random>
#include <string_view>
#include <vector>

#include "stablematch/geometry.h"
#include "stablematch/loss.h"
#include "stablematch/matching.h"

namespace stablematch {

double sigmoid(double x);
double logit(double p);
double softplus(double x);
double inverse_softplus(double y);

// Directly optimized prediction. The box center is the sigmoid of (cx, cy),
// width and height are softplus of (raw_w, raw_h), probability is the sigmoid
// of the logit.
struct PredictionParams {
  double cx = 0.0;
  double cy = 0.0;
  double raw_w = 0.0;
  double raw_h = 0.0;
  double logit = 0.0;

  static constexpr int kSize = 5;

  static PredictionParams FromBox(const Box& box, double probability);
  Box box() const;
  double probability() const { return sigmoid(logit); }

  friend bool operator==(const PredictionParams&,
                         const PredictionParams&) = default;
};

struct Scene {
  std::vector<GroundTruth> ground_truths;
  std::vector<PredictionParams> predictions;

  void Validate() const;
  std::vector<Prediction> decoded() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

enum class Mode { kDefault, kStable };
enum class ScenarioKind { kAB, kRandom };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);
std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kAB;
  int n_gt = 1;
  int n_pred = 2;
};

struct ExperimentConfig {
  LossConfig loss_config;
  CostWeights cost_weights;
  Mode mode = Mode::kStable;
  int steps = 500;
  double learning_rate = 1e-3;
  std::int64_t seed = 0;
  double noise_std = 0.1;
  int burn_in = 50;
  ScenarioConfig scenario;

  void Validate() const;
};

// Canonical ground truth of the two-prediction scenario.
inline const Box kAbGroundTruth{0.30, 0.30, 0.70, 0.70};

// One ground truth and two predictions: A (index 0) overlaps the ground truth
// more but is less confident than B (index 1). Geometry and logits carry a
// seeded jitter.
Scene make_ab_scenario(std::int64_t seed);

Scene gen_scene(std::int64_t seed, int n_gt, int n_pred);

Scene make_scenario(const ScenarioConfig& scenario, std::int64_t seed);

// Classification targets held fixed while the loss is differentiated: the
// positional metric is treated as a constant.
struct FrozenTargets {
  Assignment assignment;
  std::vector<char> positive;   // per prediction
  std::vector<double> target;   // per prediction; meaningful for positives
};

Assignment match_scene(const Scene& scene, const ExperimentConfig& config);

FrozenTargets freeze_targets(const Scene& scene, const Assignment& assignment,
                             const ExperimentConfig& config);

struct LossBreakdown {
  double cls = 0.0;    // unweighted classification loss
  double l1 = 0.0;     // unweighted sum of box L1 over matched pairs
  double giou = 0.0;   // unweighted sum of (1 - GIoU) over matched pairs
  double total = 0.0;  // weighted total
};

LossBreakdown step_objective(const Scene& scene, const FrozenTargets& frozen,
                             const ExperimentConfig& config);

// Analytic gradient of step_objective().total, laid out as
// PredictionParams::kSize entries per prediction.
std::vector<double> step_gradient(const Scene& scene,
                                  const FrozenTargets& frozen,
                                  const ExperimentConfig& config);

struct StepDiagnostics {
  Assignment assignment;
  LossBreakdown loss;
  std::vector<double> gradient;
  std::vector<double> probabilities;  // per prediction, as seen by matching
  std::vector<double> iou_first_gt;   // per prediction, against gt 0
  std::vector<double> pair_iou;       // per gt, matched pair
  std::vector<double> pair_probability;
  double update_norm = 0.0;
};

struct StepResult {
  Scene scene;
  StepDiagnostics diagnostics;
};

// Perturbs logits with N(0, noise_std) drawn from `rng`, matches, evaluates
// the objective and applies one gradient-descent update. The perturbation is
// transient: it shapes this step's matching and gradient but is not written
// back into the parameters.
StepResult train_step(const Scene& scene, const ExperimentConfig& config,
                      std::mt19937_64& rng);

struct RunReport {
  std::int64_t seed = 0;
  std::vector<std::vector<int>> matched;  // [step][gt] -> prediction index
  std::vector<double> loss;               // per step
  std::vector<std::vector<double>> probabilities;  // [step][pred]
  std::vector<std::vector<double>> iou_first_gt;   // [step][pred]
  std::vector<double> unstable;           // per step, vs previous step
  int flip_count = 0;                     // changes at steps >= burn_in
  double mean_post_burnin_unstable = 0.0;
  std::vector<double> final_iou;          // per gt, after the last update
  std::vector<double> final_probability;  // per gt, after the last update
  std::vector<int> winner;                // per gt, last matched prediction
};

RunReport run_single(const ExperimentConfig& config, std::int64_t seed);

struct ExperimentReport {
  std::vector<RunReport> runs;          // ordered by seed
  std::map<int, int> winner_histogram;  // prediction index -> runs (gt 0)
  int total_post_burnin_flips = 0;
  int runs_with_post_burnin_flips = 0;
  double mean_post_burnin_unstable = 0.0;
};

// Runs seeds config.seed .. config.seed + n_seeds - 1.
ExperimentReport run_experiment(const ExperimentConfig& config, int n_seeds);

}  // namespace stablematch

#endif  // STABLEMATCH_SIMLAB_H_
