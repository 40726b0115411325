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

#include "stablematch/simlab.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "stablematch/stability.h"

namespace stablematch {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("inverse_softplus: y <= 0");
  if (y > 30.0) return y + std::log(-std::expm1(-y));
  return std::log(std::expm1(y));
}

PredictionParams PredictionParams::FromBox(const Box& box, double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("prediction probability must lie in (0, 1)");
  }
  if (!(box.cx() > 0.0 && box.cx() < 1.0 && box.cy() > 0.0 && box.cy() < 1.0)) {
    throw std::invalid_argument("prediction center must lie in (0, 1)");
  }
  return {stablematch::logit(box.cx()), stablematch::logit(box.cy()),
          inverse_softplus(box.width()), inverse_softplus(box.height()),
          stablematch::logit(probability)};
}

Box PredictionParams::box() const {
  return Box::FromCenterSize(sigmoid(cx), sigmoid(cy), softplus(raw_w),
                            softplus(raw_h));
}

void Scene::Validate() const {
  if (ground_truths.empty()) {
    throw std::invalid_argument("Scene: needs at least one ground truth");
  }
  if (predictions.size() < ground_truths.size()) {
    throw std::invalid_argument("Scene: Npred < Ngt");
  }
  for (const auto& p : predictions) {
    if (!std::isfinite(p.cx) || !std::isfinite(p.cy) ||
        !std::isfinite(p.raw_w) || !std::isfinite(p.raw_h) ||
        !std::isfinite(p.logit)) {
      throw std::invalid_argument("Scene: non-finite prediction parameter");
    }
  }
}

std::vector<Prediction> Scene::decoded() const {
  std::vector<Prediction> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) out.push_back({p.box(), p.probability()});
  return out;
}

std::string_view to_string(Mode mode) {
  return mode == Mode::kDefault ? "default" : "stable";
}

Mode parse_mode(std::string_view name) {
  if (name == "default") return Mode::kDefault;
  if (name == "stable") return Mode::kStable;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(ScenarioKind kind) {
  return kind == ScenarioKind::kAB ? "ab" : "random";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "ab") return ScenarioKind::kAB;
  if (name == "random") return ScenarioKind::kRandom;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

void ExperimentConfig::Validate() const {
  loss_config.Validate();
  cost_weights.Validate();
  if (steps < 1) throw std::invalid_argument("ExperimentConfig: steps < 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: learning_rate must be > 0");
  }
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument("ExperimentConfig: noise_std must be >= 0");
  }
  if (burn_in < 0) throw std::invalid_argument("ExperimentConfig: burn_in < 0");
  if (scenario.n_gt < 1 || scenario.n_pred < scenario.n_gt) {
    throw std::invalid_argument("ExperimentConfig: need n_pred >= n_gt >= 1");
  }
}

namespace {

// Same-size copy of `gt` displaced along `angle` far enough that its IoU with
// `gt` equals `target_iou`.
Box displaced_copy(const Box& gt, double angle, double target_iou) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  auto at = [&](double r) {
    return Box(gt.x0() + r * dx, gt.y0() + r * dy, gt.x1() + r * dx,
               gt.y1() + r * dy);
  };
  double lo = 0.0;
  double hi = gt.width() + gt.height();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (iou(at(mid), gt) > target_iou) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(0.5 * (lo + hi));
}

std::mt19937_64 seeded_rng(std::int64_t seed, std::uint64_t stream) {
  const auto bits = static_cast<std::uint64_t>(seed);
  std::seed_seq seq{static_cast<std::uint32_t>(bits),
                    static_cast<std::uint32_t>(bits >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

}  // namespace

Scene make_ab_scenario(std::int64_t seed) {
  auto rng = seeded_rng(seed, kSceneStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto jitter = [&](double center, double half_width) {
    return center + half_width * (2.0 * unit(rng) - 1.0);
  };

  // A sits slightly off the object with a low score; B is confident but
  // displaced diagonally, which costs it more in L1 than in IoU.
  const double iou_a = jitter(0.70, 0.03);
  const double iou_b = jitter(0.20, 0.03);
  const double p_a = jitter(0.20, 0.02);
  const double p_b = jitter(0.80, 0.02);
  const double angle_a = jitter(0.0, 0.15);
  const double angle_b = jitter(std::numbers::pi / 4.0, 0.15) + std::numbers::pi;

  Scene scene;
  scene.ground_truths.push_back({kAbGroundTruth, 0});
  scene.predictions.push_back(PredictionParams::FromBox(
      displaced_copy(kAbGroundTruth, angle_a, iou_a), p_a));
  scene.predictions.push_back(PredictionParams::FromBox(
      displaced_copy(kAbGroundTruth, angle_b, iou_b), p_b));
  return scene;
}

Scene gen_scene(std::int64_t seed, int n_gt, int n_pred) {
  if (n_gt < 1 || n_pred < n_gt) {
    throw std::invalid_argument("gen_scene: need n_pred >= n_gt >= 1");
  }
  auto rng = seeded_rng(seed, kSceneStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  Scene scene;
  for (int j = 0; j < n_gt; ++j) {
    const double w = uniform(0.1, 0.3);
    const double h = uniform(0.1, 0.3);
    const double cx = uniform(w / 2, 1.0 - w / 2);
    const double cy = uniform(h / 2, 1.0 - h / 2);
    scene.ground_truths.push_back({Box::FromCenterSize(cx, cy, w, h), 0});
  }
  for (int i = 0; i < n_pred; ++i) {
    PredictionParams p;
    if (i < n_gt) {
      const Box& gt = scene.ground_truths[i].box;
      const double w = gt.width() * uniform(0.7, 1.3);
      const double h = gt.height() * uniform(0.7, 1.3);
      p.cx = logit(gt.cx() + gt.width() * uniform(-0.3, 0.3));
      p.cy = logit(gt.cy() + gt.height() * uniform(-0.3, 0.3));
      p.raw_w = inverse_softplus(w);
      p.raw_h = inverse_softplus(h);
      p.logit = normal(rng);
    } else {
      p.cx = logit(uniform(0.1, 0.9));
      p.cy = logit(uniform(0.1, 0.9));
      p.raw_w = inverse_softplus(uniform(0.05, 0.35));
      p.raw_h = inverse_softplus(uniform(0.05, 0.35));
      p.logit = normal(rng) - 1.0;
    }
    scene.predictions.push_back(p);
  }
  std::shuffle(scene.predictions.begin(), scene.predictions.end(), rng);
  return scene;
}

Scene make_scenario(const ScenarioConfig& scenario, std::int64_t seed) {
  if (scenario.kind == ScenarioKind::kAB) return make_ab_scenario(seed);
  return gen_scene(seed, scenario.n_gt, scenario.n_pred);
}

Assignment match_scene(const Scene& scene, const ExperimentConfig& config) {
  const auto preds = scene.decoded();
  const bool modulated = config.mode == Mode::kStable;
  return hungarian(build_cost_matrix(preds, scene.ground_truths,
                                     config.cost_weights, config.loss_config,
                                     modulated));
}

FrozenTargets freeze_targets(const Scene& scene, const Assignment& assignment,
                             const ExperimentConfig& config) {
  const auto preds = scene.decoded();
  FrozenTargets frozen;
  frozen.assignment = assignment;
  frozen.positive.assign(preds.size(), 0);
  frozen.target.assign(preds.size(), 0.0);

  std::vector<PositiveExample> positives;
  for (const auto& [i, j] : assignment.pairs) {
    frozen.positive[i] = 1;
    positives.push_back(
        {preds[i].probability, iou(preds[i].box, scene.ground_truths[j].box)});
  }
  if (config.mode == Mode::kDefault) {
    for (const auto& [i, j] : assignment.pairs) frozen.target[i] = 1.0;
    return frozen;
  }
  double max_iou = 0.0;
  for (const auto& pred : preds) {
    for (const auto& gt : scene.ground_truths) {
      max_iou = std::max(max_iou, iou(pred.box, gt.box));
    }
  }
  const auto targets = position_targets(positives, config.loss_config, max_iou);
  for (std::size_t k = 0; k < assignment.pairs.size(); ++k) {
    frozen.target[assignment.pairs[k].first] = targets[k];
  }
  return frozen;
}

namespace {

LossKind loss_kind(Mode mode) {
  return mode == Mode::kDefault ? LossKind::kFocal
                                : LossKind::kPositionSupervised;
}

}  // namespace

LossBreakdown step_objective(const Scene& scene, const FrozenTargets& frozen,
                             const ExperimentConfig& config) {
  const auto preds = scene.decoded();
  const auto kind = loss_kind(config.mode);
  LossBreakdown out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out.cls += loss_term(kind, {preds[i].probability, frozen.positive[i] != 0,
                                frozen.target[i]},
                         config.loss_config);
  }
  for (const auto& [i, j] : frozen.assignment.pairs) {
    const Box& gt = scene.ground_truths[j].box;
    out.l1 += box_l1(preds[i].box, gt);
    out.giou += 1.0 - giou(preds[i].box, gt);
  }
  out.total = config.loss_config.cls_loss_weight * out.cls +
              config.cost_weights.w_bbox * out.l1 +
              config.cost_weights.w_giou * out.giou;
  return out;
}

std::vector<double> step_gradient(const Scene& scene,
                                  const FrozenTargets& frozen,
                                  const ExperimentConfig& config) {
  const auto kind = loss_kind(config.mode);
  const int n = static_cast<int>(scene.predictions.size());
  std::vector<double> grad(static_cast<std::size_t>(n) * PredictionParams::kSize,
                           0.0);
  for (int i = 0; i < n; ++i) {
    const auto& params = scene.predictions[i];
    const double p = params.probability();
    const double dp = grad_loss_wrt_p(
        kind, {p, frozen.positive[i] != 0, frozen.target[i]},
        config.loss_config);
    grad[i * PredictionParams::kSize + 4] =
        config.loss_config.cls_loss_weight * dp * p * (1.0 - p);
  }
  for (const auto& [i, j] : frozen.assignment.pairs) {
    const auto& params = scene.predictions[i];
    const Box box = params.box();
    const Box& gt = scene.ground_truths[j].box;
    const auto dl1 = box_l1_grad(box, gt);
    const auto dgiou = giou_grad(box, gt);
    std::array<double, 4> dc{};
    for (int k = 0; k < 4; ++k) {
      dc[k] = config.cost_weights.w_bbox * dl1[k] -
              config.cost_weights.w_giou * dgiou[k];
    }
    // x0 = sigmoid(cx) - w/2, x1 = sigmoid(cx) + w/2, w = softplus(raw_w).
    const double sx = sigmoid(params.cx);
    const double sy = sigmoid(params.cy);
    double* g = &grad[i * PredictionParams::kSize];
    g[0] += (dc[0] + dc[2]) * sx * (1.0 - sx);
    g[1] += (dc[1] + dc[3]) * sy * (1.0 - sy);
    g[2] += 0.5 * (dc[2] - dc[0]) * sigmoid(params.raw_w);
    g[3] += 0.5 * (dc[3] - dc[1]) * sigmoid(params.raw_h);
  }
  return grad;
}

StepResult train_step(const Scene& scene, const ExperimentConfig& config,
                      std::mt19937_64& rng) {
  Scene noisy = scene;
  if (config.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_std);
    for (auto& p : noisy.predictions) p.logit += noise(rng);
  }

  StepResult result;
  auto& diag = result.diagnostics;
  diag.assignment = match_scene(noisy, config);
  const auto frozen = freeze_targets(noisy, diag.assignment, config);
  diag.loss = step_objective(noisy, frozen, config);
  diag.gradient = step_gradient(noisy, frozen, config);

  const auto preds = noisy.decoded();
  for (const auto& pred : preds) {
    diag.probabilities.push_back(pred.probability);
    diag.iou_first_gt.push_back(iou(pred.box, noisy.ground_truths[0].box));
  }
  for (const auto& [i, j] : diag.assignment.pairs) {
    diag.pair_iou.push_back(iou(preds[i].box, noisy.ground_truths[j].box));
    diag.pair_probability.push_back(preds[i].probability);
  }

  result.scene = scene;
  double sq = 0.0;
  for (std::size_t i = 0; i < result.scene.predictions.size(); ++i) {
    auto& p = result.scene.predictions[i];
    const double* g = &diag.gradient[i * PredictionParams::kSize];
    double* fields[PredictionParams::kSize] = {&p.cx, &p.cy, &p.raw_w,
                                               &p.raw_h, &p.logit};
    for (int k = 0; k < PredictionParams::kSize; ++k) {
      const double delta = config.learning_rate * g[k];
      *fields[k] -= delta;
      sq += delta * delta;
    }
  }
  diag.update_norm = std::sqrt(sq);
  return result;
}

RunReport run_single(const ExperimentConfig& config, std::int64_t seed) {
  config.Validate();
  Scene scene = make_scenario(config.scenario, seed);
  auto rng = seeded_rng(seed, kNoiseStream);
  const int n_gt = static_cast<int>(scene.ground_truths.size());

  RunReport report;
  report.seed = seed;
  Assignment previous;
  std::vector<double> post_burnin;
  for (int step = 0; step < config.steps; ++step) {
    auto result = train_step(scene, config, rng);
    const auto& diag = result.diagnostics;

    std::vector<int> matched(n_gt);
    for (int j = 0; j < n_gt; ++j) matched[j] = diag.assignment.prediction_for(j);
    const double score =
        step == 0 ? 0.0 : unstable_score(previous, diag.assignment, n_gt);
    if (step >= config.burn_in && step > 0) {
      for (int j = 0; j < n_gt; ++j) {
        if (previous.prediction_for(j) != matched[j]) ++report.flip_count;
      }
      post_burnin.push_back(score);
    }
    report.matched.push_back(std::move(matched));
    report.loss.push_back(diag.loss.total);
    report.probabilities.push_back(diag.probabilities);
    report.iou_first_gt.push_back(diag.iou_first_gt);
    report.unstable.push_back(score);

    previous = diag.assignment;
    scene = std::move(result.scene);
  }
  report.mean_post_burnin_unstable = mean_unstable(post_burnin);

  const auto final_preds = scene.decoded();
  for (int j = 0; j < n_gt; ++j) {
    const int i = previous.prediction_for(j);
    report.winner.push_back(i);
    report.final_iou.push_back(
        iou(final_preds[i].box, scene.ground_truths[j].box));
    report.final_probability.push_back(final_preds[i].probability);
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, int n_seeds) {
  if (n_seeds < 1) throw std::invalid_argument("run_experiment: n_seeds < 1");
  config.Validate();
  ExperimentReport out;
  double unstable_sum = 0.0;
  for (int k = 0; k < n_seeds; ++k) {
    auto run = run_single(config, config.seed + k);
    ++out.winner_histogram[run.winner.front()];
    out.total_post_burnin_flips += run.flip_count;
    if (run.flip_count > 0) ++out.runs_with_post_burnin_flips;
    unstable_sum += run.mean_post_burnin_unstable;
    out.runs.push_back(std::move(run));
  }
  out.mean_post_burnin_unstable = unstable_sum / n_seeds;
  return out;
}

}  // namespace stablematch
