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

#ifndef STABLEMATCH_GEOMETRY_H_
#define STABLEMATCH_GEOMETRY_H_

#include <array>
#include <span>
#include <vector>

namespace stablematch {

// Axis-aligned box in corner form. Zero-area boxes are valid; negative
// extent and non-finite coordinates are rejected by the constructor.
class Box {
 public:
  Box() = default;
  Box(double x0, double y0, double x1, double y1);

  static Box FromCenterSize(double cx, double cy, double w, double h);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double x1() const { return x1_; }
  double y1() const { return y1_; }

  double width() const { return x1_ - x0_; }
  double height() const { return y1_ - y0_; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x0_ + x1_); }
  double cy() const { return 0.5 * (y0_ + y1_); }

  std::array<double, 4> corners() const { return {x0_, y0_, x1_, y1_}; }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  double x0_ = 0.0;
  double y0_ = 0.0;
  double x1_ = 0.0;
  double y1_ = 0.0;
};

double iou(const Box& a, const Box& b);
double giou(const Box& a, const Box& b);

// Maps a GIoU value from [-1, 1] onto [0, 1].
double rescale_giou(double g);

double box_l1(const Box& a, const Box& b);

inline constexpr double kDefaultNmsThreshold = 0.8;

struct ScoredBox {
  Box box;
  double probability = 0.0;
};

// Greedy suppression. Returns kept indices in descending-probability order;
// equal probabilities are visited lower index first.
std::vector<int> nms(std::span<const ScoredBox> predictions,
                     double iou_threshold = kDefaultNmsThreshold);

// Partial derivatives with respect to the four corners (x0, y0, x1, y1) of
// the first box; the second box is held constant.
//
// At kinks (ties inside min/max or a touching overlap) both one-sided
// derivatives are formed. If they disagree in sign the point is a local
// extremum along that axis and 0 is returned; otherwise the one with the
// smaller magnitude is used.
std::array<double, 4> giou_grad(const Box& pred, const Box& target);
std::array<double, 4> box_l1_grad(const Box& pred, const Box& target);

// True when any min/max or overlap clamp in iou/giou/box_l1 of (pred, target)
// sits within `margin` of switching branch. Finite-difference sampling uses
// this to avoid non-differentiable configurations.
bool near_kink(const Box& pred, const Box& target, double margin);

}  // namespace stablematch

#endif  // STABLEMATCH_GEOMETRY_H_
