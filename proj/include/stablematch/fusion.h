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

#ifndef STABLEMATCH_FUSION_H_
#define STABLEMATCH_FUSION_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace stablematch {

// Row-major tokens x dim feature matrix.
struct FeatureMap {
  int tokens = 0;
  int dim = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int tokens, int dim, double fill = 0.0);

  double& at(int t, int c) { return values[static_cast<std::size_t>(t) * dim + c]; }
  double at(int t, int c) const {
    return values[static_cast<std::size_t>(t) * dim + c];
  }
};

// Parameters of one fusion site. `projection` is dim x in_width, row-major,
// mapping the concatenated sources back to dim channels without bias.
struct FusionParams {
  int in_width = 0;
  int dim = 0;
  std::vector<double> projection;
  std::vector<double> norm_scale;
  std::vector<double> norm_bias;

  std::size_t parameter_count() const {
    return projection.size() + norm_scale.size() + norm_bias.size();
  }
};

enum class FusionKind { kSimple, kULike, kDense };

std::string_view to_string(FusionKind kind);
FusionKind parse_fusion_kind(std::string_view name);

// Source list of each fusion site. Index 0 denotes the backbone, index l
// (1-based) the output of encoder layer l.
//   simple: one site {0, L}
//   u_like: site l = {0, l} for l = 1..L
//   dense:  site l = {0, 1, ..., l} for l = 1..L
std::vector<std::vector<int>> fusion_sites(FusionKind kind, int num_layers);

// Projection weights uniform in [-k, k] with k = in_width^-1/2; norm scale 1
// and bias 0.
std::vector<FusionParams> make_fusion_params(FusionKind kind, int num_layers,
                                             int dim, std::uint64_t seed);

std::vector<FeatureMap> fuse(FusionKind kind, const FeatureMap& backbone,
                             std::span<const FeatureMap> encoder_layers,
                             std::span<const FusionParams> params);

// Closed-form count of parameters added by the topology.
long long fusion_param_count(FusionKind kind, int num_layers, int dim);

}  // namespace stablematch

#endif  // STABLEMATCH_FUSION_H_
