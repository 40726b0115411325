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

#include "stablematch/fusion.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace stablematch {

FeatureMap::FeatureMap(int tokens, int dim, double fill)
    : tokens(tokens), dim(dim) {
  if (tokens < 1 || dim < 1) {
    throw std::invalid_argument("FeatureMap: tokens and dim must be >= 1");
  }
  values.assign(static_cast<std::size_t>(tokens) * dim, fill);
}

std::string_view to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::kSimple:
      return "simple";
    case FusionKind::kULike:
      return "u_like";
    case FusionKind::kDense:
      return "dense";
  }
  throw std::invalid_argument("unknown fusion kind");
}

FusionKind parse_fusion_kind(std::string_view name) {
  if (name == "simple") return FusionKind::kSimple;
  if (name == "u_like") return FusionKind::kULike;
  if (name == "dense") return FusionKind::kDense;
  throw std::invalid_argument("unknown fusion kind '" + std::string(name) + "'");
}

std::vector<std::vector<int>> fusion_sites(FusionKind kind, int num_layers) {
  if (num_layers < 1) {
    throw std::invalid_argument("fusion_sites: need at least one encoder layer");
  }
  std::vector<std::vector<int>> sites;
  switch (kind) {
    case FusionKind::kSimple:
      sites.push_back({0, num_layers});
      break;
    case FusionKind::kULike:
      for (int l = 1; l <= num_layers; ++l) sites.push_back({0, l});
      break;
    case FusionKind::kDense:
      for (int l = 1; l <= num_layers; ++l) {
        std::vector<int> sources;
        for (int s = 0; s <= l; ++s) sources.push_back(s);
        sites.push_back(std::move(sources));
      }
      break;
  }
  return sites;
}

std::vector<FusionParams> make_fusion_params(FusionKind kind, int num_layers,
                                             int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("make_fusion_params: dim < 1");
  std::mt19937_64 rng(seed);
  std::vector<FusionParams> params;
  for (const auto& sources : fusion_sites(kind, num_layers)) {
    FusionParams p;
    p.dim = dim;
    p.in_width = static_cast<int>(sources.size()) * dim;
    const double k = 1.0 / std::sqrt(static_cast<double>(p.in_width));
    std::uniform_real_distribution<double> init(-k, k);
    p.projection.resize(static_cast<std::size_t>(dim) * p.in_width);
    for (double& w : p.projection) w = init(rng);
    p.norm_scale.assign(dim, 1.0);
    p.norm_bias.assign(dim, 0.0);
    params.push_back(std::move(p));
  }
  return params;
}

namespace {

// Per-token standardization followed by scale and bias. Constant rows map to
// the bias.
void normalize_rows(FeatureMap& x, const FusionParams& p) {
  for (int t = 0; t < x.tokens; ++t) {
    double mean = 0.0;
    for (int c = 0; c < x.dim; ++c) mean += x.at(t, c);
    mean /= x.dim;
    double var = 0.0;
    for (int c = 0; c < x.dim; ++c) {
      const double d = x.at(t, c) - mean;
      var += d * d;
    }
    var /= x.dim;
    const bool constant = var <= 1e-24 * std::max(1.0, mean * mean);
    const double inv_std = constant ? 0.0 : 1.0 / std::sqrt(var);
    for (int c = 0; c < x.dim; ++c) {
      const double z = constant ? 0.0 : (x.at(t, c) - mean) * inv_std;
      x.at(t, c) = z * p.norm_scale[c] + p.norm_bias[c];
    }
  }
}

}  // namespace

std::vector<FeatureMap> fuse(FusionKind kind, const FeatureMap& backbone,
                             std::span<const FeatureMap> encoder_layers,
                             std::span<const FusionParams> params) {
  const int num_layers = static_cast<int>(encoder_layers.size());
  if (num_layers < 1) {
    throw std::invalid_argument("fuse: need at least one encoder layer");
  }
  const int tokens = backbone.tokens;
  const int dim = backbone.dim;
  for (const auto& layer : encoder_layers) {
    if (layer.tokens != tokens || layer.dim != dim) {
      throw std::invalid_argument("fuse: encoder layer shape " +
                                  std::to_string(layer.tokens) + "x" +
                                  std::to_string(layer.dim) +
                                  " does not match backbone " +
                                  std::to_string(tokens) + "x" +
                                  std::to_string(dim));
    }
  }
  const auto sites = fusion_sites(kind, num_layers);
  if (params.size() != sites.size()) {
    throw std::invalid_argument("fuse: expected " +
                                std::to_string(sites.size()) +
                                " parameter sets, got " +
                                std::to_string(params.size()));
  }

  std::vector<FeatureMap> outputs;
  outputs.reserve(sites.size());
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const auto& sources = sites[s];
    const auto& p = params[s];
    const int width = static_cast<int>(sources.size()) * dim;
    if (p.in_width != width || p.dim != dim ||
        p.projection.size() != static_cast<std::size_t>(dim) * width ||
        p.norm_scale.size() != static_cast<std::size_t>(dim) ||
        p.norm_bias.size() != static_cast<std::size_t>(dim)) {
      throw std::invalid_argument("fuse: site " + std::to_string(s + 1) +
                                  " expects projection width " +
                                  std::to_string(width) + ", got " +
                                  std::to_string(p.in_width));
    }
    FeatureMap out(tokens, dim);
    for (int t = 0; t < tokens; ++t) {
      for (int o = 0; o < dim; ++o) {
        const double* w = &p.projection[static_cast<std::size_t>(o) * width];
        double acc = 0.0;
        for (std::size_t k = 0; k < sources.size(); ++k) {
          const FeatureMap& src =
              sources[k] == 0 ? backbone : encoder_layers[sources[k] - 1];
          for (int c = 0; c < dim; ++c) acc += w[k * dim + c] * src.at(t, c);
        }
        out.at(t, o) = acc;
      }
    }
    normalize_rows(out, p);
    outputs.push_back(std::move(out));
  }
  return outputs;
}

long long fusion_param_count(FusionKind kind, int num_layers, int dim) {
  if (num_layers < 1 || dim < 1) {
    throw std::invalid_argument("fusion_param_count: L and dim must be >= 1");
  }
  const long long d = dim;
  const long long site = 2 * d * d + 2 * d;
  switch (kind) {
    case FusionKind::kSimple:
      return site;
    case FusionKind::kULike:
      return num_layers * site;
    case FusionKind::kDense: {
      // sum_{l=1..L} ((l + 1) d^2 + 2d)
      const long long l = num_layers;
      return (l * (l + 1) / 2 + l) * d * d + 2 * d * l;
    }
  }
  throw std::invalid_argument("fusion_param_count: unknown kind");
}

}  // namespace stablematch
