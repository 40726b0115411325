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

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stablematch {

CostMatrix::CostMatrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("CostMatrix: negative shape");
  }
  values_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(static_cast<int>(rows.size())),
      cols_(rows.size() == 0 ? 0 : static_cast<int>(rows.begin()->size())) {
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != cols_) {
      throw std::invalid_argument("CostMatrix: ragged rows");
    }
    values_.insert(values_.end(), row.begin(), row.end());
  }
}

double total_cost(const CostMatrix& c, const Assignment& a) {
  double total = 0.0;
  for (const auto& [pred, gt] : a.pairs) total += c(pred, gt);
  return total;
}

void CostWeights::Validate() const {
  if (!(w_cls > 0.0) || !(w_bbox > 0.0) || !(w_giou > 0.0)) {
    throw std::invalid_argument("CostWeights: all weights must be > 0");
  }
}

double cls_cost(double p, double gamma) {
  return std::pow(std::abs(1.0 - p), gamma) * bce(p, 1.0) -
         std::pow(p, gamma) * bce(1.0 - p, 1.0);
}

double position_modulated_cls_cost(double p, double s_prime,
                                   const LossConfig& config) {
  const double q = p * f2_eval(config.f2_variant, s_prime);
  return cls_cost(q, config.gamma);
}

CostMatrix build_cost_matrix(std::span<const Prediction> predictions,
                             std::span<const GroundTruth> ground_truths,
                             const CostWeights& weights,
                             const LossConfig& config, bool modulated) {
  const int n_pred = static_cast<int>(predictions.size());
  const int n_gt = static_cast<int>(ground_truths.size());
  if (n_gt < 1) {
    throw std::invalid_argument("build_cost_matrix: no ground truths");
  }
  if (n_pred < n_gt) {
    throw std::invalid_argument("build_cost_matrix: Npred (" +
                                std::to_string(n_pred) + ") < Ngt (" +
                                std::to_string(n_gt) + ")");
  }
  CostMatrix c(n_pred, n_gt);
  for (int i = 0; i < n_pred; ++i) {
    const auto& pred = predictions[i];
    const double row_cls = cls_cost(pred.probability, config.gamma);
    for (int j = 0; j < n_gt; ++j) {
      const auto& gt = ground_truths[j];
      const double g = giou(pred.box, gt.box);
      const double cls =
          modulated ? position_modulated_cls_cost(pred.probability,
                                                  rescale_giou(g), config)
                    : row_cls;
      c(i, j) = weights.w_cls * cls + weights.w_bbox * box_l1(pred.box, gt.box) +
                weights.w_giou * (-g);
    }
  }
  return c;
}

namespace {

void check_assignable(const CostMatrix& c) {
  if (c.rows() < c.cols()) {
    throw std::invalid_argument("assignment: Npred < Ngt");
  }
  for (int i = 0; i < c.rows(); ++i) {
    for (int j = 0; j < c.cols(); ++j) {
      if (!std::isfinite(c(i, j))) {
        throw std::invalid_argument("assignment: non-finite cost entry");
      }
    }
  }
}

// Shortest-augmenting-path Hungarian method with potentials over the
// sub-problem gts x preds (gts.size() <= preds.size()). Returns the chosen
// prediction for each entry of `gts`.
std::vector<int> solve(const CostMatrix& c, const std::vector<int>& gts,
                       const std::vector<int>& preds) {
  const int n = static_cast<int>(gts.size());
  const int m = static_cast<int>(preds.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);

  for (int row = 1; row <= n; ++row) {
    owner[0] = row;
    int col0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[col0] = 1;
      const int row0 = owner[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= m; ++col) {
        if (used[col]) continue;
        const double cur = c(preds[col - 1], gts[row0 - 1]) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= m; ++col) {
        if (used[col]) {
          u[owner[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const int col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> chosen(n, -1);
  for (int col = 1; col <= m; ++col) {
    if (owner[col] != 0) chosen[owner[col] - 1] = preds[col - 1];
  }
  return chosen;
}

Assignment to_assignment(const std::vector<int>& pred_for_gt) {
  Assignment a;
  a.pairs.reserve(pred_for_gt.size());
  for (int j = 0; j < static_cast<int>(pred_for_gt.size()); ++j) {
    a.pairs.emplace_back(pred_for_gt[j], j);
  }
  return a;
}

double sequence_cost(const CostMatrix& c, const std::vector<int>& pred_for_gt) {
  double total = 0.0;
  for (int j = 0; j < static_cast<int>(pred_for_gt.size()); ++j) {
    total += c(pred_for_gt[j], j);
  }
  return total;
}

}  // namespace

Assignment hungarian(const CostMatrix& c) {
  check_assignable(c);
  const int n_gt = c.cols();
  const int n_pred = c.rows();
  if (n_gt == 0) return {};

  std::vector<int> all_gts(n_gt), all_preds(n_pred);
  for (int j = 0; j < n_gt; ++j) all_gts[j] = j;
  for (int i = 0; i < n_pred; ++i) all_preds[i] = i;

  std::vector<int> best = solve(c, all_gts, all_preds);
  double best_total = sequence_cost(c, best);

  // Fix gts in order, each to the smallest prediction index that still
  // admits an optimal completion.
  std::vector<char> taken(n_pred, 0);
  for (int j = 0; j < n_gt; ++j) {
    for (int i = 0; i < n_pred; ++i) {
      if (taken[i]) continue;
      if (i == best[j]) break;

      std::vector<int> rest_gts(all_gts.begin() + j + 1, all_gts.end());
      std::vector<int> rest_preds;
      for (int k = 0; k < n_pred; ++k) {
        if (!taken[k] && k != i) rest_preds.push_back(k);
      }
      std::vector<int> candidate(best.begin(), best.begin() + j);
      candidate.push_back(i);
      if (!rest_gts.empty()) {
        auto tail = solve(c, rest_gts, rest_preds);
        candidate.insert(candidate.end(), tail.begin(), tail.end());
      }
      const double total = sequence_cost(c, candidate);
      if (total <= best_total) {
        best = std::move(candidate);
        best_total = total;
        break;
      }
    }
    taken[best[j]] = 1;
  }
  return to_assignment(best);
}

Assignment brute_force_assign(const CostMatrix& c) {
  check_assignable(c);
  const int n_gt = c.cols();
  const int n_pred = c.rows();
  if (n_gt > kBruteForceMaxGt || n_pred > kBruteForceMaxPred) {
    throw std::invalid_argument("brute_force_assign: matrix too large (" +
                                std::to_string(n_pred) + "x" +
                                std::to_string(n_gt) + ")");
  }
  if (n_gt == 0) return {};

  std::vector<int> current(n_gt, -1), best;
  std::vector<char> taken(n_pred, 0);
  double best_total = std::numeric_limits<double>::infinity();

  // Depth-first in lexicographic order; only strictly better totals replace
  // the incumbent, so the first optimum found is the lexicographic minimum.
  auto recurse = [&](auto&& self, int gt, double partial) -> void {
    if (gt == n_gt) {
      if (partial < best_total) {
        best_total = partial;
        best = current;
      }
      return;
    }
    for (int i = 0; i < n_pred; ++i) {
      if (taken[i]) continue;
      taken[i] = 1;
      current[gt] = i;
      self(self, gt + 1, partial + c(i, gt));
      taken[i] = 0;
    }
  };
  recurse(recurse, 0, 0.0);
  return to_assignment(best);
}

}  // namespace stablematch
