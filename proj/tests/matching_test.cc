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

#include "stablematch/matching.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.h"

namespace stablematch {
namespace {

CostMatrix RandomMatrix(std::mt19937_64& rng, int rows, int cols, bool ties) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> small(0, 3);
  CostMatrix c(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) c(i, j) = ties ? small(rng) : u(rng);
  }
  return c;
}

TEST(ClsCostTest, WorkedValues) {
  EXPECT_NEAR(cls_cost(0.5, 2.0), 0.0, 1e-16);
  EXPECT_LT(cls_cost(1.0, 2.0), -10.0);
  EXPECT_GT(cls_cost(0.0, 2.0), 10.0);
  EXPECT_TRUE(std::isfinite(cls_cost(1.0, 2.0)));
}

TEST(ClsCostTest, ModulatedWorkedValues) {
  LossConfig cfg;  // f2 = s^0.5, gamma 2
  const double got = position_modulated_cls_cost(0.9, 0.25, cfg);
  EXPECT_NEAR(got, 0.3025 * -std::log(0.45) - 0.2025 * -std::log(0.55), 1e-15);
  EXPECT_NEAR(got, 0.1204866, 1e-6);
}

TEST(ClsCostTest, ModulatedReducesToPlain) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const F2Variant all[] = {F2Variant::kConstOne, F2Variant::kSQuarter,
                           F2Variant::kSHalf, F2Variant::kS, F2Variant::kSSq};
  for (int n = 0; n < 1000; ++n) {
    const double p = u(rng), s = u(rng);
    LossConfig cfg;
    cfg.gamma = 4.0 * u(rng);
    for (auto v : all) {
      cfg.f2_variant = v;
      EXPECT_EQ(position_modulated_cls_cost(p, 1.0, cfg), cls_cost(p, cfg.gamma));
    }
    cfg.f2_variant = F2Variant::kConstOne;
    EXPECT_EQ(position_modulated_cls_cost(p, s, cfg), cls_cost(p, cfg.gamma));
  }
}

TEST(ClsCostTest, MatchesOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 1000; ++n) {
    const double p = u(rng), s = u(rng), gamma = 4.0 * u(rng);
    EXPECT_LT(oracle::rel_error(cls_cost(p, gamma), oracle::cls_cost(p, gamma)), 1e-12);
    LossConfig cfg;
    cfg.gamma = gamma;
    const int v = n % 5;
    cfg.f2_variant = static_cast<F2Variant>(v);
    EXPECT_LT(oracle::rel_error(position_modulated_cls_cost(p, s, cfg),
                                oracle::modulated_cost(p, s, static_cast<oracle::F2>(v), gamma)),
              1e-12);
  }
}

TEST(ClsCostTest, StrictlyDecreasing) {
  double prev = cls_cost(0.5 / 10000, 2.0);
  for (int k = 1; k < 10000; ++k) {
    const double cur = cls_cost((k + 0.5) / 10000, 2.0);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  LossConfig cfg;
  for (double p : {0.05, 0.5, 0.95}) {
    prev = position_modulated_cls_cost(p, 1e-4, cfg);
    for (int k = 2; k <= 10000; ++k) {
      const double cur = position_modulated_cls_cost(p, k * 1e-4, cfg);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(CostMatrixTest, ComponentsMatchScalarTerms) {
  LossConfig cfg;
  CostWeights w;
  const Box gt_box(0.3, 0.3, 0.7, 0.7);
  const std::vector<Prediction> preds{{Box(0.35, 0.3, 0.75, 0.7), 0.2},
                                      {Box(0.1, 0.1, 0.5, 0.5), 0.8}};
  const std::vector<GroundTruth> gts{{gt_box, 0}, {Box(0.0, 0.0, 0.2, 0.2), 0}};
  for (bool modulated : {false, true}) {
    const auto c = build_cost_matrix(preds, gts, w, cfg, modulated);
    ASSERT_EQ(c.rows(), 2);
    ASSERT_EQ(c.cols(), 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const auto& a = preds[i].box;
        const auto& b = gts[j].box;
        const oracle::Rect ra{a.x0(), a.y0(), a.x1(), a.y1()};
        const oracle::Rect rb{b.x0(), b.y0(), b.x1(), b.y1()};
        const oracle::real g = oracle::giou(ra, rb);
        const oracle::real cls =
            modulated ? oracle::modulated_cost(preds[i].probability, (g + 1) / 2,
                                               oracle::F2::kSHalf, 2.0L).value
                      : oracle::cls_cost(preds[i].probability, 2.0L).value;
        const oracle::real l1 = std::abs(ra.x0 - rb.x0) + std::abs(ra.y0 - rb.y0) +
                                std::abs(ra.x1 - rb.x1) + std::abs(ra.y1 - rb.y1);
        EXPECT_NEAR(c(i, j), static_cast<double>(2 * cls + 5 * l1 - 2 * g), 1e-13);
      }
    }
    if (!modulated) EXPECT_NE(c(0, 0) - c(0, 1), 0.0);
  }
}

TEST(CostMatrixTest, PlainClassificationTermIsConstantPerRow) {
  LossConfig cfg;
  CostWeights w;
  const std::vector<Prediction> preds{{Box(0.1, 0.1, 0.4, 0.4), 0.3},
                                      {Box(0.5, 0.5, 0.9, 0.9), 0.7}};
  const std::vector<GroundTruth> gts{{Box(0.1, 0.1, 0.4, 0.4), 0},
                                     {Box(0.5, 0.5, 0.9, 0.9), 0}};
  const auto c = build_cost_matrix(preds, gts, w, cfg, false);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double geo = w.w_bbox * box_l1(preds[i].box, gts[j].box) -
                         w.w_giou * giou(preds[i].box, gts[j].box);
      EXPECT_NEAR(c(i, j) - geo, w.w_cls * cls_cost(preds[i].probability, 2.0), 1e-14);
    }
  }
}

TEST(CostMatrixTest, PerfectPredictionDominates) {
  LossConfig cfg;
  CostWeights w;
  const Box gt(0.2, 0.2, 0.5, 0.5);
  const std::vector<Prediction> preds{{gt, 1.0 - 1e-9}, {Box(0.7, 0.7, 0.9, 0.9), 1e-9}};
  const std::vector<GroundTruth> gts{{gt, 0}};
  for (bool modulated : {false, true}) {
    const auto c = build_cost_matrix(preds, gts, w, cfg, modulated);
    EXPECT_LT(c(0, 0), c(1, 0));
    EXPECT_EQ(hungarian(c).prediction_for(0), 0);
  }
  EXPECT_LT(cls_cost(1.0 - 1e-9, 2.0), cls_cost(1e-9, 2.0));
  EXPECT_LT(box_l1(gt, gt), box_l1(preds[1].box, gt));
  EXPECT_GT(giou(gt, gt), giou(preds[1].box, gt));
}

TEST(CostMatrixTest, RejectsTooFewPredictions) {
  LossConfig cfg;
  CostWeights w;
  const std::vector<Prediction> preds{{Box(0, 0, 1, 1), 0.5}};
  const std::vector<GroundTruth> gts{{Box(0, 0, 1, 1), 0}, {Box(0, 0, 1, 1), 0}};
  EXPECT_THROW(build_cost_matrix(preds, gts, w, cfg, false), std::invalid_argument);
  EXPECT_THROW(build_cost_matrix(preds, {}, w, cfg, false), std::invalid_argument);
}

TEST(HungarianTest, WorkedValues) {
  const CostMatrix c{{1, 2}, {3, 0}};
  const auto a = hungarian(c);
  EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(total_cost(c, a), 1.0);
  EXPECT_EQ(brute_force_assign(c), a);

  const CostMatrix diag{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  EXPECT_EQ(hungarian(diag).pairs,
            (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}}));

  const CostMatrix one{{4.5}};
  EXPECT_EQ(hungarian(one).pairs, (std::vector<std::pair<int, int>>{{0, 0}}));

  const CostMatrix column{{3}, {1}, {2}};
  EXPECT_EQ(brute_force_assign(column).prediction_for(0), 1);
  EXPECT_EQ(hungarian(column).prediction_for(0), 1);
}

TEST(HungarianTest, TiesResolveLexicographically) {
  const CostMatrix all_equal{{1, 1}, {1, 1}, {1, 1}};
  EXPECT_EQ(hungarian(all_equal).pairs,
            (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  // Two optima of total 2: (gt0->1, gt1->0) and (gt0->0, gt1->2).
  const CostMatrix two{{1, 5}, {1, 1}, {5, 1}};
  EXPECT_EQ(hungarian(two).pairs, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(brute_force_assign(two), hungarian(two));
}

TEST(HungarianTest, AgreesWithBruteForce) {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 1000; ++n) {
    const int gts = 1 + n % 7;
    const int preds = gts + static_cast<int>(rng() % (8 - gts));
    const auto c = RandomMatrix(rng, preds, gts, n % 2 == 0);
    const auto h = hungarian(c);
    const auto b = brute_force_assign(c);
    ASSERT_EQ(total_cost(c, h), total_cost(c, b));
    ASSERT_EQ(h, b);
  }
}

TEST(HungarianTest, RowPermutationEquivariance) {
  std::mt19937_64 rng(22);
  for (int n = 0; n < 200; ++n) {
    const int gts = 1 + n % 5, preds = gts + 2;
    const auto c = RandomMatrix(rng, preds, gts, false);
    std::vector<int> perm(preds);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CostMatrix pc(preds, gts);
    for (int i = 0; i < preds; ++i) {
      for (int j = 0; j < gts; ++j) pc(i, j) = c(perm[i], j);
    }
    const auto a = hungarian(c), pa = hungarian(pc);
    for (int j = 0; j < gts; ++j) EXPECT_EQ(perm[pa.prediction_for(j)], a.prediction_for(j));
  }
}

TEST(HungarianTest, ConstantShiftInvariance) {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 200; ++n) {
    const int gts = 1 + n % 6, preds = gts + 1;
    // Dyadic entries keep the shifted sums exact.
    CostMatrix c(preds, gts), shifted(preds, gts);
    for (int i = 0; i < preds; ++i) {
      for (int j = 0; j < gts; ++j) {
        c(i, j) = static_cast<double>(rng() % 64) / 8.0;
        shifted(i, j) = c(i, j) + 4.0;
      }
    }
    EXPECT_EQ(hungarian(c), hungarian(shifted));
  }
}

TEST(HungarianTest, RejectsInvalidInput) {
  EXPECT_THROW(hungarian(CostMatrix{{1, 2}}), std::invalid_argument);
  CostMatrix bad(2, 1);
  bad(0, 0) = NAN;
  EXPECT_THROW(hungarian(bad), std::invalid_argument);
  EXPECT_THROW(brute_force_assign(bad), std::invalid_argument);
  EXPECT_THROW(brute_force_assign(CostMatrix(13, 1)), std::invalid_argument);
  EXPECT_THROW(brute_force_assign(CostMatrix(9, 9)), std::invalid_argument);
  EXPECT_THROW(CostMatrix({{1, 2}, {3}}), std::invalid_argument);
}

TEST(HungarianTest, LargerProblemsBeatRandomAssignments) {
  std::mt19937_64 rng(24);
  const auto c = RandomMatrix(rng, 40, 25, false);
  const double best = total_cost(c, hungarian(c));
  std::vector<int> idx(40);
  std::iota(idx.begin(), idx.end(), 0);
  for (int n = 0; n < 500; ++n) {
    std::shuffle(idx.begin(), idx.end(), rng);
    double total = 0.0;
    for (int j = 0; j < 25; ++j) total += c(idx[j], j);
    EXPECT_LE(best, total);
  }
}

TEST(CostWeightsTest, Validation) {
  CostWeights w;
  EXPECT_NO_THROW(w.Validate());
  w.w_bbox = 0.0;
  EXPECT_THROW(w.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace stablematch
