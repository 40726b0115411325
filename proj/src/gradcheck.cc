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

#include "stablematch/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "stablematch/geometry.h"
#include "stablematch/loss.h"
#include "stablematch/simlab.h"

namespace stablematch {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

bool GradCheckReport::passed() const {
  if (suites.empty()) return false;
  return std::all_of(suites.begin(), suites.end(),
                     [](const GradCheckSuite& s) { return s.passed(); });
}

namespace {

constexpr double kKinkMargin = 1e-3;
constexpr int kMaxDrawsPerSample = 50;

class Checker {
 public:
  Checker(std::string name, const GradCheckOptions& options)
      : options_(options) {
    suite_.name = std::move(name);
    suite_.tolerance = options.tolerance;
  }

  void compare(double analytic, double numeric) {
    if (options_.corrupt) analytic = 1.1 * analytic + 0.01;
    suite_.max_rel_error =
        std::max(suite_.max_rel_error, relative_error(analytic, numeric));
    ++suite_.comparisons;
  }

  template <typename F>
  double central(F&& f, double x) const {
    const double h = options_.h;
    return (f(x + h) - f(x - h)) / (2.0 * h);
  }

  GradCheckSuite& suite() { return suite_; }

 private:
  const GradCheckOptions& options_;
  GradCheckSuite suite_;
};

constexpr double kGammas[] = {1.0, 2.0, 4.0};

GradCheckSuite check_loss_terms(LossKind kind, const GradCheckOptions& options,
                                std::mt19937_64& rng) {
  Checker c(kind == LossKind::kFocal ? "focal" : "position_supervised", options);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  for (int n = 0; n < options.samples; ++n) {
    const double p = prob(rng);
    const double t = kind == LossKind::kFocal ? 1.0 : prob(rng);
    // |t - p|^gamma is not smooth at t = p for gamma = 1.
    if (std::abs(t - p) < kKinkMargin) {
      ++c.suite().skipped;
      continue;
    }
    for (double gamma : kGammas) {
      LossConfig config;
      config.gamma = gamma;
      for (bool positive : {true, false}) {
        auto f = [&](double x) {
          return loss_term(kind, {x, positive, t}, config);
        };
        c.compare(grad_loss_wrt_p(kind, {p, positive, t}, config),
                  c.central(f, p));
      }
    }
    ++c.suite().checked;
  }
  return c.suite();
}

Box random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double w = 0.05 + 0.4 * u(rng);
  const double h = 0.05 + 0.4 * u(rng);
  const double x = 0.6 * u(rng);
  const double y = 0.6 * u(rng);
  return Box(x, y, x + w, y + h);
}

GradCheckSuite check_geometry(const GradCheckOptions& options,
                              std::mt19937_64& rng) {
  Checker c("geometry", options);
  for (int n = 0; n < options.samples; ++n) {
    const Box pred = random_box(rng);
    const Box target = random_box(rng);
    if (near_kink(pred, target, kKinkMargin)) {
      ++c.suite().skipped;
      continue;
    }
    const auto dg = giou_grad(pred, target);
    const auto dl = box_l1_grad(pred, target);
    for (int k = 0; k < 4; ++k) {
      auto moved = [&](double x) {
        auto v = pred.corners();
        v[k] = x;
        return Box(v[0], v[1], v[2], v[3]);
      };
      const double x = pred.corners()[k];
      c.compare(dg[k], c.central([&](double v) { return giou(moved(v), target); }, x));
      c.compare(dl[k], c.central([&](double v) { return box_l1(moved(v), target); }, x));
    }
    ++c.suite().checked;
  }
  return c.suite();
}

bool scene_near_kink(const Scene& scene, const Assignment& assignment) {
  const auto preds = scene.decoded();
  for (const auto& [i, j] : assignment.pairs) {
    if (near_kink(preds[i].box, scene.ground_truths[j].box, kKinkMargin)) {
      return true;
    }
  }
  return false;
}

double& param_ref(PredictionParams& p, int k) {
  switch (k) {
    case 0: return p.cx;
    case 1: return p.cy;
    case 2: return p.raw_w;
    case 3: return p.raw_h;
    default: return p.logit;
  }
}

double param_value(PredictionParams p, int k) { return param_ref(p, k); }

GradCheckSuite check_step(Mode mode, const GradCheckOptions& options,
                          std::mt19937_64& rng) {
  Checker c(mode == Mode::kDefault ? "step_default" : "step_stable", options);
  ExperimentConfig config;
  config.mode = mode;
  config.noise_std = 0.0;
  std::uniform_int_distribution<int> gt_count(1, 3);
  std::uniform_int_distribution<int> extra(0, 3);

  for (int n = 0; n < options.samples; ++n) {
    bool done = false;
    for (int draw = 0; draw < kMaxDrawsPerSample && !done; ++draw) {
      const int n_gt = gt_count(rng);
      const Scene scene = gen_scene(static_cast<std::int64_t>(rng() >> 1), n_gt,
                                    n_gt + extra(rng));
      const auto assignment = match_scene(scene, config);
      if (scene_near_kink(scene, assignment)) {
        ++c.suite().skipped;
        continue;
      }
      const auto frozen = freeze_targets(scene, assignment, config);
      const auto grad = step_gradient(scene, frozen, config);
      for (std::size_t i = 0; i < scene.predictions.size(); ++i) {
        for (int k = 0; k < PredictionParams::kSize; ++k) {
          auto f = [&](double x) {
            Scene moved = scene;
            param_ref(moved.predictions[i], k) = x;
            return step_objective(moved, frozen, config).total;
          };
          c.compare(grad[i * PredictionParams::kSize + k],
                    c.central(f, param_value(scene.predictions[i], k)));
        }
      }
      ++c.suite().checked;
      done = true;
    }
  }
  return c.suite();
}

}  // namespace

GradCheckReport run_grad_check(const GradCheckOptions& options) {
  if (options.samples < 1) {
    throw std::invalid_argument("run_grad_check: samples < 1");
  }
  if (!(options.h > 0.0) || !(options.tolerance > 0.0)) {
    throw std::invalid_argument("run_grad_check: h and tolerance must be > 0");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                    static_cast<std::uint32_t>(options.seed >> 32)};
  std::mt19937_64 rng(seq);

  GradCheckReport report;
  report.suites.push_back(check_loss_terms(LossKind::kFocal, options, rng));
  report.suites.push_back(
      check_loss_terms(LossKind::kPositionSupervised, options, rng));
  report.suites.push_back(check_geometry(options, rng));
  report.suites.push_back(check_step(Mode::kDefault, options, rng));
  report.suites.push_back(check_step(Mode::kStable, options, rng));
  return report;
}

}  // namespace stablematch
