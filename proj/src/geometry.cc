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

#include "stablematch/geometry.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stablematch {

Box::Box(double x0, double y0, double x1, double y1)
    : x0_(x0), y0_(y0), x1_(x1), y1_(y1) {
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) ||
      !std::isfinite(y1)) {
    throw std::invalid_argument("Box: non-finite coordinate");
  }
  if (x1 < x0 || y1 < y0) {
    throw std::invalid_argument("Box: negative extent (" + std::to_string(x0) +
                                ", " + std::to_string(y0) + ", " +
                                std::to_string(x1) + ", " +
                                std::to_string(y1) + ")");
  }
}

Box Box::FromCenterSize(double cx, double cy, double w, double h) {
  return Box(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
}

namespace {

// Forward-mode scalar with a single tangent. `dir` selects which one-sided
// derivative min/max report at ties: +1 for the right, -1 for the left.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

Dual dmax(Dual a, Dual b, int dir) {
  if (a.v > b.v) return a;
  if (a.v < b.v) return b;
  return {a.v, dir > 0 ? std::max(a.d, b.d) : std::min(a.d, b.d)};
}

Dual dmin(Dual a, Dual b, int dir) {
  if (a.v < b.v) return a;
  if (a.v > b.v) return b;
  return {a.v, dir > 0 ? std::min(a.d, b.d) : std::max(a.d, b.d)};
}

struct Overlap {
  Dual inter;
  Dual uni;
  Dual enclosing;
};

Overlap overlap(const std::array<Dual, 4>& a, const std::array<Dual, 4>& b,
                int dir) {
  const Dual zero{};
  Dual iw = dmax(zero, dmin(a[2], b[2], dir) - dmax(a[0], b[0], dir), dir);
  Dual ih = dmax(zero, dmin(a[3], b[3], dir) - dmax(a[1], b[1], dir), dir);
  Dual inter = iw * ih;
  Dual area_a = (a[2] - a[0]) * (a[3] - a[1]);
  Dual area_b = (b[2] - b[0]) * (b[3] - b[1]);
  Dual uni = area_a + area_b - inter;
  Dual ew = dmax(a[2], b[2], dir) - dmin(a[0], b[0], dir);
  Dual eh = dmax(a[3], b[3], dir) - dmin(a[1], b[1], dir);
  return {inter, uni, ew * eh};
}

Dual iou_dual(const Overlap& o) {
  if (o.uni.v <= 0.0) return {};
  return o.inter / o.uni;
}

Dual giou_dual(const Overlap& o) {
  if (o.enclosing.v <= 0.0) return {};
  return iou_dual(o) - (o.enclosing - o.uni) / o.enclosing;
}

std::array<Dual, 4> lift(const Box& box, int seed) {
  auto c = box.corners();
  std::array<Dual, 4> out;
  for (int k = 0; k < 4; ++k) out[k] = {c[k], k == seed ? 1.0 : 0.0};
  return out;
}

double combine_one_sided(double right, double left) {
  if (right == left) return right;
  if ((right > 0.0 && left < 0.0) || (right < 0.0 && left > 0.0)) return 0.0;
  return std::abs(right) < std::abs(left) ? right : left;
}

}  // namespace

double iou(const Box& a, const Box& b) {
  return iou_dual(overlap(lift(a, -1), lift(b, -1), 1)).v;
}

double giou(const Box& a, const Box& b) {
  return giou_dual(overlap(lift(a, -1), lift(b, -1), 1)).v;
}

double rescale_giou(double g) {
  if (!(g >= -1.0 && g <= 1.0)) {
    throw std::invalid_argument("rescale_giou: value outside [-1, 1]");
  }
  return (g + 1.0) / 2.0;
}

double box_l1(const Box& a, const Box& b) {
  return std::abs(a.x0() - b.x0()) + std::abs(a.y0() - b.y0()) +
         std::abs(a.x1() - b.x1()) + std::abs(a.y1() - b.y1());
}

std::vector<int> nms(std::span<const ScoredBox> predictions,
                     double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("nms: threshold outside [0, 1]");
  }
  for (const auto& p : predictions) {
    if (!(p.probability >= 0.0 && p.probability <= 1.0)) {
      throw std::invalid_argument("nms: probability outside [0, 1]");
    }
  }
  std::vector<int> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return predictions[a].probability > predictions[b].probability;
  });

  std::vector<int> kept;
  for (int idx : order) {
    bool keep = true;
    for (int k : kept) {
      if (iou(predictions[idx].box, predictions[k].box) > iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(idx);
  }
  return kept;
}

std::array<double, 4> giou_grad(const Box& pred, const Box& target) {
  std::array<double, 4> grad{};
  const auto b = lift(target, -1);
  for (int k = 0; k < 4; ++k) {
    const auto a = lift(pred, k);
    double right = giou_dual(overlap(a, b, +1)).d;
    double left = giou_dual(overlap(a, b, -1)).d;
    grad[k] = combine_one_sided(right, left);
  }
  return grad;
}

std::array<double, 4> box_l1_grad(const Box& pred, const Box& target) {
  const auto a = pred.corners();
  const auto b = target.corners();
  std::array<double, 4> grad{};
  for (int k = 0; k < 4; ++k) {
    // sign(0) = 0: the one-sided slopes are +1 and -1.
    grad[k] = a[k] > b[k] ? 1.0 : (a[k] < b[k] ? -1.0 : 0.0);
  }
  return grad;
}

bool near_kink(const Box& pred, const Box& target, double margin) {
  const auto a = pred.corners();
  const auto b = target.corners();
  for (int k = 0; k < 4; ++k) {
    if (std::abs(a[k] - b[k]) < margin) return true;
  }
  const double ux = std::min(a[2], b[2]) - std::max(a[0], b[0]);
  const double uy = std::min(a[3], b[3]) - std::max(a[1], b[1]);
  return std::abs(ux) < margin || std::abs(uy) < margin;
}

}  // namespace stablematch
