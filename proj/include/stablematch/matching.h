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

#ifndef STABLEMATCH_MATCHING_H_
#define STABLEMATCH_MATCHING_H_

#include <span>
#include <utility>
#include <vector>

#include "stablematch/geometry.h"
#include "stablematch/loss.h"

namespace stablematch {

struct Prediction {
  Box box;
  double probability = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct GroundTruth {
  Box box;
  int class_id = 0;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// Dense Npred x Ngt matrix; row = prediction, column = ground truth.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int rows, int cols, double fill = 0.0);
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return values_[r * cols_ + c]; }
  double operator()(int r, int c) const { return values_[r * cols_ + c]; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

// One-to-one map covering every ground truth. `pairs` is ordered by gt index,
// so pairs[j] = (prediction matched to gt j, j).
struct Assignment {
  std::vector<std::pair<int, int>> pairs;

  int prediction_for(int gt) const { return pairs.at(gt).first; }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Sum of matched entries, accumulated in gt order.
double total_cost(const CostMatrix& c, const Assignment& a);

struct CostWeights {
  double w_cls = 2.0;
  double w_bbox = 5.0;
  double w_giou = 2.0;

  void Validate() const;
};

// Classification matching cost |1-p|^g BCE(p,1) - p^g BCE(1-p,1).
double cls_cost(double p, double gamma);

// Same cost evaluated at q = p * f2(s').
double position_modulated_cls_cost(double p, double s_prime,
                                   const LossConfig& config);

CostMatrix build_cost_matrix(std::span<const Prediction> predictions,
                             std::span<const GroundTruth> ground_truths,
                             const CostWeights& weights,
                             const LossConfig& config, bool modulated);

// Minimum-cost assignment of every ground truth to a distinct prediction.
// Among optimal assignments the one whose per-gt prediction sequence is
// lexicographically smallest is returned.
Assignment hungarian(const CostMatrix& c);

inline constexpr int kBruteForceMaxGt = 8;
inline constexpr int kBruteForceMaxPred = 12;

// Exhaustive oracle with the same tie-breaking as hungarian().
Assignment brute_force_assign(const CostMatrix& c);

}  // namespace stablematch

#endif  // STABLEMATCH_MATCHING_H_
