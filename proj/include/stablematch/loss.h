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

#ifndef STABLEMATCH_LOSS_H_
#define STABLEMATCH_LOSS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stablematch {

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before any
// logarithm is taken.
inline constexpr double kProbEpsilon = 1e-8;

// Target functions for positive examples, f1(s, p). s is the positional
// metric (IoU with the matched ground truth), p the predicted probability.
enum class F1Variant {
  kSHalf,        // s^0.5
  kS,            // s
  kSSq,          // s^2
  kSCube,        // s^3
  kSPQuarter,    // s * p^0.25
  kSP,           // s * p
  kS2P,          // s^2 * p
  kExpNorm,      // (e^s - 1) / (e - 1)
  kSinHalfPi,    // sin(s * pi / 2)
  kConstOne,     // 1 (plain focal loss)
};

// Modulators for the matching cost, f2(s').
enum class F2Variant {
  kConstOne,
  kSQuarter,
  kSHalf,
  kS,
  kSSq,
};

enum class RescaleStrategy {
  kMaxIou,  // peak target equals the image's maximum pairwise IoU
  kToOne,   // peak target equals 1
  kNone,
};

struct LossConfig {
  double gamma = 2.0;
  F1Variant f1_variant = F1Variant::kSSq;
  RescaleStrategy rescale_strategy = RescaleStrategy::kMaxIou;
  double cls_loss_weight = 6.0;
  double cost_weight = 2.0;
  F2Variant f2_variant = F2Variant::kSHalf;

  // Throws std::invalid_argument on a negative gamma or non-positive weight.
  void Validate() const;
};

struct PositiveExample {
  double p = 0.0;
  double s = 0.0;
};

// Lowercase, hyphen-free names used in config files ("s_sq", "max_iou", ...).
std::string_view to_string(F1Variant v);
std::string_view to_string(F2Variant v);
std::string_view to_string(RescaleStrategy v);
F1Variant parse_f1_variant(std::string_view name);
F2Variant parse_f2_variant(std::string_view name);
RescaleStrategy parse_rescale_strategy(std::string_view name);

double clamp_probability(double p);

// Binary cross-entropy with a soft target.
double bce(double p, double target);

// Positive term |t - p|^gamma * BCE(p, t) and negative term p^gamma * BCE(p, 0).
double positive_term(double p, double target, double gamma);
double negative_term(double p, double gamma);

// d/dp of the terms above with the target held constant. Inside the clamp
// interval these are exact; outside it the BCE factor is flat.
double positive_term_grad(double p, double target, double gamma);
double negative_term_grad(double p, double gamma);

double focal_loss(std::span<const double> positives,
                  std::span<const double> negatives, double gamma);

double f1_eval(F1Variant variant, double s, double p);
double f2_eval(F2Variant variant, double s_prime);

std::vector<double> rescale_positives(std::span<const double> raw_targets,
                                      double max_iou,
                                      RescaleStrategy strategy);

// Rescaled f1 targets for every positive of one image. When `max_iou` is not
// given the largest positional metric among the positives is used.
std::vector<double> position_targets(std::span<const PositiveExample> positives,
                                     const LossConfig& config,
                                     std::optional<double> max_iou = {});

double position_supervised_loss(std::span<const PositiveExample> positives,
                                std::span<const double> negatives,
                                const LossConfig& config,
                                std::optional<double> max_iou = {});

enum class LossKind { kFocal, kPositionSupervised };

// One classification term. For kPositionSupervised positives `target` is the
// (already rescaled) f1 value; focal positives always use target 1.
struct LossTerm {
  double p = 0.0;
  bool positive = true;
  double target = 1.0;
};

double loss_term(LossKind kind, const LossTerm& term, const LossConfig& config);
double grad_loss_wrt_p(LossKind kind, const LossTerm& term,
                       const LossConfig& config);

}  // namespace stablematch

#endif  // STABLEMATCH_LOSS_H_
