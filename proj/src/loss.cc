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

#include "stablematch/loss.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace stablematch {

namespace {

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table,
                         Enum value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  throw std::invalid_argument("unknown enum value");
}

template <typename Enum, std::size_t N>
Enum parse_name(const std::array<std::pair<Enum, std::string_view>, N>& table,
                std::string_view name, std::string_view what) {
  for (const auto& [v, n] : table) {
    if (n == name) return v;
  }
  throw std::invalid_argument("unknown " + std::string(what) + " '" +
                              std::string(name) + "'");
}

constexpr std::array<std::pair<F1Variant, std::string_view>, 10> kF1Names{{
    {F1Variant::kSHalf, "s_half"},
    {F1Variant::kS, "s"},
    {F1Variant::kSSq, "s_sq"},
    {F1Variant::kSCube, "s_cube"},
    {F1Variant::kSPQuarter, "s_p_quarter"},
    {F1Variant::kSP, "s_p"},
    {F1Variant::kS2P, "s2_p"},
    {F1Variant::kExpNorm, "exp_norm"},
    {F1Variant::kSinHalfPi, "sin_half_pi"},
    {F1Variant::kConstOne, "const_one"},
}};

constexpr std::array<std::pair<F2Variant, std::string_view>, 5> kF2Names{{
    {F2Variant::kConstOne, "const_one"},
    {F2Variant::kSQuarter, "s_quarter"},
    {F2Variant::kSHalf, "s_half"},
    {F2Variant::kS, "s"},
    {F2Variant::kSSq, "s_sq"},
}};

constexpr std::array<std::pair<RescaleStrategy, std::string_view>, 3>
    kRescaleNames{{
        {RescaleStrategy::kMaxIou, "max_iou"},
        {RescaleStrategy::kToOne, "to_one"},
        {RescaleStrategy::kNone, "none"},
    }};

bool inside_clamp(double p) {
  return p > kProbEpsilon && p < 1.0 - kProbEpsilon;
}

// d/dp |t - p|^gamma.
double modulator_grad(double p, double target, double gamma) {
  if (gamma == 0.0) return 0.0;
  const double diff = target - p;
  if (diff == 0.0) return 0.0;
  const double sign = diff > 0.0 ? 1.0 : -1.0;
  return -gamma * std::pow(std::abs(diff), gamma - 1.0) * sign;
}

}  // namespace

void LossConfig::Validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("LossConfig: gamma must be >= 0");
  }
  if (!(cls_loss_weight > 0.0)) {
    throw std::invalid_argument("LossConfig: cls_loss_weight must be > 0");
  }
  if (!(cost_weight > 0.0)) {
    throw std::invalid_argument("LossConfig: cost_weight must be > 0");
  }
}

std::string_view to_string(F1Variant v) { return name_of(kF1Names, v); }
std::string_view to_string(F2Variant v) { return name_of(kF2Names, v); }
std::string_view to_string(RescaleStrategy v) {
  return name_of(kRescaleNames, v);
}

F1Variant parse_f1_variant(std::string_view name) {
  return parse_name(kF1Names, name, "f1_variant");
}
F2Variant parse_f2_variant(std::string_view name) {
  return parse_name(kF2Names, name, "f2_variant");
}
RescaleStrategy parse_rescale_strategy(std::string_view name) {
  return parse_name(kRescaleNames, name, "rescale_strategy");
}

double clamp_probability(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double bce(double p, double target) {
  const double pc = clamp_probability(p);
  return -target * std::log(pc) - (1.0 - target) * std::log(1.0 - pc);
}

double positive_term(double p, double target, double gamma) {
  return std::pow(std::abs(target - p), gamma) * bce(p, target);
}

double negative_term(double p, double gamma) {
  return std::pow(p, gamma) * bce(p, 0.0);
}

double positive_term_grad(double p, double target, double gamma) {
  const double modulator = std::pow(std::abs(target - p), gamma);
  double dbce = 0.0;
  if (inside_clamp(p)) dbce = -target / p + (1.0 - target) / (1.0 - p);
  return modulator_grad(p, target, gamma) * bce(p, target) + modulator * dbce;
}

double negative_term_grad(double p, double gamma) {
  double dmod = 0.0;
  if (gamma != 0.0 && p > 0.0) dmod = gamma * std::pow(p, gamma - 1.0);
  double dbce = inside_clamp(p) ? 1.0 / (1.0 - p) : 0.0;
  return dmod * bce(p, 0.0) + std::pow(p, gamma) * dbce;
}

double focal_loss(std::span<const double> positives,
                  std::span<const double> negatives, double gamma) {
  double loss = 0.0;
  for (double p : positives) loss += positive_term(p, 1.0, gamma);
  for (double p : negatives) loss += negative_term(p, gamma);
  return loss;
}

double f1_eval(F1Variant variant, double s, double p) {
  switch (variant) {
    case F1Variant::kSHalf:
      return std::sqrt(s);
    case F1Variant::kS:
      return s;
    case F1Variant::kSSq:
      return s * s;
    case F1Variant::kSCube:
      return s * s * s;
    case F1Variant::kSPQuarter:
      return s * std::pow(p, 0.25);
    case F1Variant::kSP:
      return s * p;
    case F1Variant::kS2P:
      return s * s * p;
    case F1Variant::kExpNorm:
      return std::expm1(s) / std::expm1(1.0);
    case F1Variant::kSinHalfPi:
      return std::sin(s * std::numbers::pi / 2.0);
    case F1Variant::kConstOne:
      return 1.0;
  }
  throw std::invalid_argument("f1_eval: unknown variant");
}

double f2_eval(F2Variant variant, double s_prime) {
  switch (variant) {
    case F2Variant::kConstOne:
      return 1.0;
    case F2Variant::kSQuarter:
      return std::pow(s_prime, 0.25);
    case F2Variant::kSHalf:
      return std::sqrt(s_prime);
    case F2Variant::kS:
      return s_prime;
    case F2Variant::kSSq:
      return s_prime * s_prime;
  }
  throw std::invalid_argument("f2_eval: unknown variant");
}

std::vector<double> rescale_positives(std::span<const double> raw_targets,
                                      double max_iou,
                                      RescaleStrategy strategy) {
  std::vector<double> out(raw_targets.begin(), raw_targets.end());
  if (strategy == RescaleStrategy::kNone || out.empty()) return out;
  const double peak = *std::max_element(out.begin(), out.end());
  if (peak == 0.0) return out;
  const double target_peak =
      strategy == RescaleStrategy::kMaxIou ? max_iou : 1.0;
  const double factor = target_peak / peak;
  for (double& t : out) t *= factor;
  return out;
}

std::vector<double> position_targets(std::span<const PositiveExample> positives,
                                     const LossConfig& config,
                                     std::optional<double> max_iou) {
  std::vector<double> raw;
  raw.reserve(positives.size());
  double best_s = 0.0;
  for (const auto& pos : positives) {
    raw.push_back(f1_eval(config.f1_variant, pos.s, pos.p));
    best_s = std::max(best_s, pos.s);
  }
  return rescale_positives(raw, max_iou.value_or(best_s),
                           config.rescale_strategy);
}

double position_supervised_loss(std::span<const PositiveExample> positives,
                                std::span<const double> negatives,
                                const LossConfig& config,
                                std::optional<double> max_iou) {
  const auto targets = position_targets(positives, config, max_iou);
  double loss = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    loss += positive_term(positives[i].p, targets[i], config.gamma);
  }
  for (double p : negatives) loss += negative_term(p, config.gamma);
  return loss;
}

double loss_term(LossKind kind, const LossTerm& term, const LossConfig& config) {
  if (!term.positive) return negative_term(term.p, config.gamma);
  const double target = kind == LossKind::kFocal ? 1.0 : term.target;
  return positive_term(term.p, target, config.gamma);
}

double grad_loss_wrt_p(LossKind kind, const LossTerm& term,
                       const LossConfig& config) {
  if (!term.positive) return negative_term_grad(term.p, config.gamma);
  const double target = kind == LossKind::kFocal ? 1.0 : term.target;
  return positive_term_grad(term.p, target, config.gamma);
}

}  // namespace stablematch
