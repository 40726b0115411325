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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.h"

namespace stablematch {
namespace {

const double kLn2 = std::numbers::ln2;

TEST(BceTest, WorkedValues) {
  EXPECT_LT(bce(1.0 - 1e-12, 1.0), 1e-7);
  for (double t : {0.0, 0.3, 0.8, 1.0}) EXPECT_NEAR(bce(0.5, t), kLn2, 1e-15);
  EXPECT_NEAR(bce(0.8, 0.8), 0.500402, 1e-6);
  EXPECT_NEAR(bce(0.8, 0.8), -0.8 * std::log(0.8) - 0.2 * std::log(0.2), 1e-15);
}

TEST(BceTest, ClampKeepsEndpointsFinite) {
  EXPECT_TRUE(std::isfinite(bce(0.0, 1.0)));
  EXPECT_TRUE(std::isfinite(bce(1.0, 0.0)));
  EXPECT_NEAR(bce(0.0, 1.0), -std::log(kProbEpsilon), 1e-9);
}

TEST(FocalLossTest, WorkedValues) {
  const std::vector<double> none;
  EXPECT_LT(focal_loss(std::vector<double>{1.0 - 1e-9}, std::vector<double>{1e-9}, 2.0), 1e-12);
  EXPECT_NEAR(focal_loss(std::vector<double>{0.5}, none, 2.0), 0.25 * kLn2, 1e-15);
  EXPECT_NEAR(focal_loss(none, std::vector<double>{0.5}, 2.0), 0.25 * kLn2, 1e-15);
  EXPECT_NEAR(0.25 * kLn2, 0.173287, 1e-6);
  EXPECT_EQ(focal_loss(none, none, 2.0), 0.0);
}

TEST(F1Test, WorkedValues) {
  EXPECT_DOUBLE_EQ(f1_eval(F1Variant::kSSq, 0.8, 0.3), 0.64);
  EXPECT_DOUBLE_EQ(f1_eval(F1Variant::kExpNorm, 1.0, 0.3), 1.0);
  EXPECT_NEAR(f1_eval(F1Variant::kSinHalfPi, 0.5, 0.3), 0.707107, 1e-6);
  EXPECT_DOUBLE_EQ(f1_eval(F1Variant::kConstOne, 0.1, 0.1), 1.0);
}

TEST(F1Test, AllVariantsMapUnitSquareIntoUnitInterval) {
  const F1Variant all[] = {F1Variant::kSHalf, F1Variant::kS, F1Variant::kSSq,
                           F1Variant::kSCube, F1Variant::kSPQuarter, F1Variant::kSP,
                           F1Variant::kS2P, F1Variant::kExpNorm,
                           F1Variant::kSinHalfPi, F1Variant::kConstOne};
  for (auto v : all) {
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) {
        const double f = f1_eval(v, i / 20.0, j / 20.0);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-15);
      }
    }
  }
}

TEST(RescaleTest, WorkedValues) {
  const std::vector<double> raw{0.64, 0.25};
  const auto m = rescale_positives(raw, 0.8, RescaleStrategy::kMaxIou);
  EXPECT_NEAR(m[0], 0.8, 1e-15);
  EXPECT_NEAR(m[1], 0.3125, 1e-15);
  const auto o = rescale_positives(raw, 0.8, RescaleStrategy::kToOne);
  EXPECT_NEAR(o[0], 1.0, 1e-15);
  EXPECT_NEAR(o[1], 0.390625, 1e-15);
  EXPECT_EQ(rescale_positives(std::vector<double>{0.5}, 0.9, RescaleStrategy::kNone),
            std::vector<double>{0.5});
}

TEST(RescaleTest, ZeroPeakLeavesTargetsUnchanged) {
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_EQ(rescale_positives(zeros, 0.7, RescaleStrategy::kMaxIou), zeros);
  EXPECT_TRUE(rescale_positives({}, 0.7, RescaleStrategy::kToOne).empty());
}

TEST(PositionSupervisedTest, WorkedValues) {
  LossConfig cfg;
  cfg.f1_variant = F1Variant::kS;
  cfg.rescale_strategy = RescaleStrategy::kNone;
  const std::vector<PositiveExample> pos{{0.5, 0.8}};
  const double got = position_supervised_loss(pos, {}, cfg);
  EXPECT_NEAR(got, 0.09 * kLn2, 1e-15);
  EXPECT_NEAR(got, 0.062383, 1e-6);
}

TEST(PositionSupervisedTest, MatchedTargetContributesNothing) {
  LossConfig cfg;
  cfg.f1_variant = F1Variant::kS;
  cfg.rescale_strategy = RescaleStrategy::kNone;
  const std::vector<PositiveExample> pos{{0.37, 0.37}};
  EXPECT_EQ(position_supervised_loss(pos, {}, cfg), 0.0);
}

TEST(PositionSupervisedTest, DefaultVariantUsesImageMaxIou) {
  LossConfig cfg;  // s_sq with max_iou rescale
  const std::vector<PositiveExample> pos{{0.3, 0.8}, {0.6, 0.5}};
  const auto t = position_targets(pos, cfg, 0.9);
  EXPECT_NEAR(t[0], 0.9, 1e-15);
  EXPECT_NEAR(t[1], 0.25 * 0.9 / 0.64, 1e-15);
  const auto t_default = position_targets(pos, cfg);
  EXPECT_NEAR(t_default[0], 0.8, 1e-15);
}

TEST(PositionSupervisedTest, ZeroAtPerfection) {
  LossConfig cfg;
  const std::vector<PositiveExample> pos{{1.0 - kProbEpsilon, 1.0}};
  for (auto r : {RescaleStrategy::kMaxIou, RescaleStrategy::kToOne, RescaleStrategy::kNone}) {
    cfg.rescale_strategy = r;
    EXPECT_LT(position_supervised_loss(pos, {}, cfg), 1e-6);
  }
}

TEST(PositionSupervisedTest, ReducesToFocalBitwise) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LossConfig cfg;
  cfg.f1_variant = F1Variant::kConstOne;
  cfg.rescale_strategy = RescaleStrategy::kNone;
  for (int n = 0; n < 1000; ++n) {
    cfg.gamma = 4.0 * u(rng);
    std::vector<PositiveExample> pos;
    std::vector<double> ps, neg;
    for (int k = 0; k < 3; ++k) {
      pos.push_back({u(rng), u(rng)});
      ps.push_back(pos.back().p);
      neg.push_back(u(rng));
    }
    EXPECT_EQ(position_supervised_loss(pos, neg, cfg), focal_loss(ps, neg, cfg.gamma));
  }
}

TEST(LossOracleTest, RandomInputs) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const F1Variant f1s[] = {F1Variant::kSHalf, F1Variant::kS, F1Variant::kSSq,
                           F1Variant::kSCube, F1Variant::kSPQuarter, F1Variant::kSP,
                           F1Variant::kS2P, F1Variant::kExpNorm,
                           F1Variant::kSinHalfPi, F1Variant::kConstOne};
  const RescaleStrategy rs[] = {RescaleStrategy::kMaxIou, RescaleStrategy::kToOne,
                                RescaleStrategy::kNone};
  for (int n = 0; n < 500; ++n) {
    const double gamma = 4.0 * u(rng);
    std::vector<double> pos{u(rng), u(rng)}, neg{u(rng)};
    EXPECT_LT(oracle::rel_error(focal_loss(pos, neg, gamma), oracle::focal(pos, neg, gamma)),
              1e-12);

    LossConfig cfg;
    cfg.gamma = gamma;
    const int vi = static_cast<int>(u(rng) * 10) % 10;
    const int ri = static_cast<int>(u(rng) * 3) % 3;
    cfg.f1_variant = f1s[vi];
    cfg.rescale_strategy = rs[ri];
    const std::vector<PositiveExample> ex{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const double max_iou = std::max(ex[0].s, ex[1].s);
    const auto want = oracle::position_supervised(
        {{ex[0].p, ex[0].s}, {ex[1].p, ex[1].s}}, neg, static_cast<oracle::F1>(vi),
        static_cast<oracle::Rescale>(ri), max_iou, gamma);
    EXPECT_LT(oracle::rel_error(position_supervised_loss(ex, neg, cfg, max_iou), want),
              1e-12);
  }
}

TEST(LossGradTest, WorkedValues) {
  LossConfig cfg;
  const double g = grad_loss_wrt_p(LossKind::kFocal, {0.5, true, 1.0}, cfg);
  EXPECT_NEAR(g, -kLn2 - 0.5, 1e-15);
  EXPECT_NEAR(g, -1.193147, 1e-6);
  EXPECT_NEAR(grad_loss_wrt_p(LossKind::kFocal, {1.0 - 1e-7, true, 1.0}, cfg), 0.0, 1e-6);
  EXPECT_EQ(grad_loss_wrt_p(LossKind::kPositionSupervised, {0.4, true, 0.4}, cfg), 0.0);
}

TEST(LossGradTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  const double h = 1e-5;
  for (int n = 0; n < 1000; ++n) {
    const double p = prob(rng), t = prob(rng);
    if (std::abs(t - p) < 1e-3) continue;
    for (double gamma : {1.0, 2.0, 4.0}) {
      LossConfig cfg;
      cfg.gamma = gamma;
      for (auto kind : {LossKind::kFocal, LossKind::kPositionSupervised}) {
        for (bool positive : {true, false}) {
          auto f = [&](double x) { return loss_term(kind, {x, positive, t}, cfg); };
          const double a = grad_loss_wrt_p(kind, {p, positive, t}, cfg);
          const double fd = (f(p + h) - f(p - h)) / (2 * h);
          EXPECT_LT(std::abs(a - fd) / std::max(1.0, std::abs(a)), 1e-4);
        }
      }
    }
  }
}

TEST(LossGradTest, SubLinearGammaAtMatchedTargetByDifferences) {
  // For gamma <= 1 the modulator is not differentiable at t = p; the loss is
  // still minimized there, so the two one-sided slopes straddle zero.
  LossConfig cfg;
  cfg.gamma = 1.0;
  const double p = 0.4, h = 1e-6;
  auto f = [&](double x) { return loss_term(LossKind::kPositionSupervised, {x, true, p}, cfg); };
  EXPECT_LE((f(p) - f(p - h)) / h, 0.0);
  EXPECT_GE((f(p + h) - f(p)) / h, 0.0);
}

TEST(NegativeTermTest, StrictlyIncreasing) {
  for (double gamma : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    double prev = negative_term(1e-4, gamma);
    for (int k = 2; k < 10000; ++k) {
      const double cur = negative_term(k * 1e-4, gamma);
      EXPECT_GT(cur, prev) << "gamma " << gamma << " p " << k * 1e-4;
      prev = cur;
    }
  }
}

TEST(LossConfigTest, ValidationAndNames) {
  LossConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.gamma = -1;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = LossConfig{};
  cfg.cls_loss_weight = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_EQ(to_string(F1Variant::kSSq), "s_sq");
  EXPECT_EQ(parse_f1_variant("sin_half_pi"), F1Variant::kSinHalfPi);
  EXPECT_EQ(parse_f2_variant("s_quarter"), F2Variant::kSQuarter);
  EXPECT_EQ(parse_rescale_strategy("to_one"), RescaleStrategy::kToOne);
  EXPECT_THROW(parse_f1_variant("S_SQ"), std::invalid_argument);
  EXPECT_THROW(parse_rescale_strategy("bogus"), std::invalid_argument);
}

}  // namespace
}  // namespace stablematch
