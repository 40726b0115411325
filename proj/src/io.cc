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

#include "stablematch/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace stablematch {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail("<document>", std::string("invalid JSON: ") + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path.empty() ? "<document>" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Box as_box(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) fail(path, "expected 4 numbers");
  double c[4];
  for (int k = 0; k < 4; ++k) {
    c[k] = as_number(v[k], path + "[" + std::to_string(k) + "]");
  }
  try {
    return Box(c[0], c[1], c[2], c[3]);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

json box_json(const Box& b) { return json::array({b.x0(), b.y0(), b.x1(), b.y1()}); }

// Runs `parse` on obj[key] if present, converting library exceptions into
// ParseError tagged with the field path.
template <typename F>
void optional_field(const json& obj, const char* key, const std::string& path,
                    F&& parse) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string sub = path.empty() ? key : path + "." + key;
  try {
    parse(*it, sub);
  } catch (const std::invalid_argument& e) {
    fail(sub, e.what());
  }
}

}  // namespace

Scene SceneFile::to_scene() const {
  Scene scene;
  scene.ground_truths = ground_truths;
  for (const auto& p : predictions) {
    scene.predictions.push_back(PredictionParams::FromBox(p.box, p.probability));
  }
  scene.Validate();
  return scene;
}

SceneFile SceneFile::FromScene(const Scene& scene) {
  return {scene.ground_truths, scene.decoded()};
}

SceneFile parse_scene_file(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) fail("<document>", "expected an object");
  const std::string version = as_string(field(doc, "version", ""), "version");
  if (version != kSceneFileVersion) {
    fail("version", "unsupported version '" + version + "'");
  }

  SceneFile out;
  const json& gts = field(doc, "ground_truths", "");
  if (!gts.is_array()) fail("ground_truths", "expected an array");
  for (std::size_t j = 0; j < gts.size(); ++j) {
    const std::string path = "ground_truths[" + std::to_string(j) + "]";
    GroundTruth gt;
    gt.box = as_box(field(gts[j], "box", path), path + ".box");
    gt.class_id = as_int(field(gts[j], "class_id", path), path + ".class_id");
    out.ground_truths.push_back(gt);
  }
  const json& preds = field(doc, "predictions", "");
  if (!preds.is_array()) fail("predictions", "expected an array");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string path = "predictions[" + std::to_string(i) + "]";
    Prediction p;
    p.box = as_box(field(preds[i], "box", path), path + ".box");
    p.probability =
        as_number(field(preds[i], "probability", path), path + ".probability");
    if (p.probability < 0.0 || p.probability > 1.0) {
      fail(path + ".probability", "expected a value in [0, 1]");
    }
    out.predictions.push_back(p);
  }
  if (out.ground_truths.empty()) fail("ground_truths", "must not be empty");
  if (out.predictions.size() < out.ground_truths.size()) {
    fail("predictions", "Npred (" + std::to_string(out.predictions.size()) +
                            ") < Ngt (" +
                            std::to_string(out.ground_truths.size()) + ")");
  }
  return out;
}

std::string scene_file_to_json(const SceneFile& scene) {
  json doc;
  doc["version"] = kSceneFileVersion;
  doc["ground_truths"] = json::array();
  for (const auto& gt : scene.ground_truths) {
    doc["ground_truths"].push_back({{"box", box_json(gt.box)}, {"class_id", gt.class_id}});
  }
  doc["predictions"] = json::array();
  for (const auto& p : scene.predictions) {
    doc["predictions"].push_back(
        {{"box", box_json(p.box)}, {"probability", p.probability}});
  }
  return doc.dump(2) + "\n";
}

ExperimentConfig parse_config(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) fail("<document>", "expected an object");
  ExperimentConfig cfg;
  auto num = [](double& dst) {
    return [&dst](const json& v, const std::string& p) { dst = as_number(v, p); };
  };
  auto integer = [](int& dst) {
    return [&dst](const json& v, const std::string& p) { dst = as_int(v, p); };
  };

  bool w_cls_given = false;
  optional_field(doc, "loss_config", "", [&](const json& lc, const std::string& p) {
    if (!lc.is_object()) fail(p, "expected an object");
    auto& l = cfg.loss_config;
    optional_field(lc, "gamma", p, num(l.gamma));
    optional_field(lc, "f1_variant", p, [&](const json& v, const std::string& q) {
      l.f1_variant = parse_f1_variant(as_string(v, q));
    });
    optional_field(lc, "rescale_strategy", p, [&](const json& v, const std::string& q) {
      l.rescale_strategy = parse_rescale_strategy(as_string(v, q));
    });
    optional_field(lc, "cls_loss_weight", p, num(l.cls_loss_weight));
    optional_field(lc, "cost_weight", p, num(l.cost_weight));
    optional_field(lc, "f2_variant", p, [&](const json& v, const std::string& q) {
      l.f2_variant = parse_f2_variant(as_string(v, q));
    });
  });
  optional_field(doc, "cost_weights", "", [&](const json& cw, const std::string& p) {
    if (!cw.is_object()) fail(p, "expected an object");
    w_cls_given = cw.contains("w_cls");
    optional_field(cw, "w_cls", p, num(cfg.cost_weights.w_cls));
    optional_field(cw, "w_bbox", p, num(cfg.cost_weights.w_bbox));
    optional_field(cw, "w_giou", p, num(cfg.cost_weights.w_giou));
  });
  if (!w_cls_given) cfg.cost_weights.w_cls = cfg.loss_config.cost_weight;

  optional_field(doc, "mode", "", [&](const json& v, const std::string& p) {
    cfg.mode = parse_mode(as_string(v, p));
  });
  optional_field(doc, "steps", "", integer(cfg.steps));
  optional_field(doc, "learning_rate", "", num(cfg.learning_rate));
  optional_field(doc, "seed", "", [&](const json& v, const std::string& p) {
    if (!v.is_number_integer()) fail(p, "expected an integer");
    cfg.seed = v.get<std::int64_t>();
  });
  optional_field(doc, "noise_std", "", num(cfg.noise_std));
  optional_field(doc, "burn_in", "", integer(cfg.burn_in));
  optional_field(doc, "scenario", "", [&](const json& sc, const std::string& p) {
    if (!sc.is_object()) fail(p, "expected an object");
    optional_field(sc, "kind", p, [&](const json& v, const std::string& q) {
      cfg.scenario.kind = parse_scenario_kind(as_string(v, q));
    });
    optional_field(sc, "n_gt", p, integer(cfg.scenario.n_gt));
    optional_field(sc, "n_pred", p, integer(cfg.scenario.n_pred));
  });

  try {
    cfg.Validate();
  } catch (const std::invalid_argument& e) {
    fail("<config>", e.what());
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const auto& l = cfg.loss_config;
  json doc = {
      {"loss_config",
       {{"gamma", l.gamma},
        {"f1_variant", to_string(l.f1_variant)},
        {"rescale_strategy", to_string(l.rescale_strategy)},
        {"cls_loss_weight", l.cls_loss_weight},
        {"cost_weight", l.cost_weight},
        {"f2_variant", to_string(l.f2_variant)}}},
      {"cost_weights",
       {{"w_cls", cfg.cost_weights.w_cls},
        {"w_bbox", cfg.cost_weights.w_bbox},
        {"w_giou", cfg.cost_weights.w_giou}}},
      {"mode", to_string(cfg.mode)},
      {"steps", cfg.steps},
      {"learning_rate", cfg.learning_rate},
      {"seed", cfg.seed},
      {"noise_std", cfg.noise_std},
      {"burn_in", cfg.burn_in},
      {"scenario",
       {{"kind", to_string(cfg.scenario.kind)},
        {"n_gt", cfg.scenario.n_gt},
        {"n_pred", cfg.scenario.n_pred}}},
  };
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_cost_matrix_csv(std::ostream& out, const CostMatrix& c) {
  out << "pred";
  for (int j = 0; j < c.cols(); ++j) out << ",gt" << j;
  out << '\n';
  for (int i = 0; i < c.rows(); ++i) {
    out << i;
    for (int j = 0; j < c.cols(); ++j) out << ',' << format_double(c(i, j));
    out << '\n';
  }
}

}  // namespace stablematch
