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

#include "stablematch/cli.h"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "stablematch/fusion.h"
#include "stablematch/gradcheck.h"
#include "stablematch/io.h"
#include "stablematch/matching.h"
#include "stablematch/simlab.h"
#include "stablematch/stability.h"

namespace stablematch {

using nlohmann::json;

namespace {

// Config precedence: defaults < file < environment seed < flags.
ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  if (!path.empty()) cfg = parse_config(read_text_file(path));
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env) {
    const std::string_view text(env);
    std::int64_t seed = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw std::invalid_argument(std::string(kSeedEnvVar) + ": not an integer: '" +
                                  std::string(text) + "'");
    }
    cfg.seed = seed;
  }
  return cfg;
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

struct MatchArgs {
  std::string scene;
  std::string config;
  std::string out_dir;
  bool modulated = false;
};

int cmd_match(const MatchArgs& args, std::ostream& out) {
  const SceneFile scene = parse_scene_file(read_text_file(args.scene));
  const ExperimentConfig cfg = load_config(args.config);
  const CostMatrix c =
      build_cost_matrix(scene.predictions, scene.ground_truths,
                        cfg.cost_weights, cfg.loss_config, args.modulated);
  const Assignment a = hungarian(c);

  json doc;
  doc["modulated"] = args.modulated;
  doc["assignment"] = json::array();
  for (const auto& [pred, gt] : a.pairs) {
    doc["assignment"].push_back({{"gt", gt}, {"pred", pred}});
  }
  doc["total_cost"] = total_cost(c, a);
  if (!args.out_dir.empty()) {
    const auto path = ensure_dir(args.out_dir) / "cost_matrix.csv";
    std::ostringstream csv;
    write_cost_matrix_csv(csv, c);
    write_text_file(path.string(), csv.str());
    doc["cost_matrix_csv_path"] = path.string();
  }
  out << doc.dump(2) << '\n';
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::string> mode;
  int seeds = 100;
};

ExperimentConfig experiment_config(const ExperimentArgs& args) {
  ExperimentConfig cfg = load_config(args.config);
  if (args.mode) cfg.mode = parse_mode(*args.mode);
  return cfg;
}

json summary_json(const ExperimentConfig& cfg, const ExperimentReport& report) {
  json doc;
  doc["mode"] = to_string(cfg.mode);
  doc["first_seed"] = cfg.seed;
  doc["n_seeds"] = report.runs.size();
  doc["steps"] = cfg.steps;
  doc["burn_in"] = cfg.burn_in;
  doc["noise_std"] = cfg.noise_std;
  json hist = json::object();
  for (const auto& [pred, count] : report.winner_histogram) {
    hist[std::to_string(pred)] = count;
  }
  doc["winner_histogram"] = hist;
  doc["flip_count_post_burnin"] = report.total_post_burnin_flips;
  doc["runs_with_post_burnin_flips"] = report.runs_with_post_burnin_flips;
  doc["mean_post_burnin_unstable"] = report.mean_post_burnin_unstable;
  json per_seed = json::array();
  for (const auto& run : report.runs) {
    per_seed.push_back({{"seed", run.seed},
                        {"winner", run.winner.front()},
                        {"flip_count_post_burnin", run.flip_count},
                        {"final_iou", run.final_iou.front()},
                        {"final_probability", run.final_probability.front()}});
  }
  doc["runs"] = per_seed;
  return doc;
}

std::string trajectory_csv(const RunReport& run) {
  std::ostringstream csv;
  csv << "step,matched_index,p_A,p_B,iou_A,iou_B,loss\n";
  for (std::size_t s = 0; s < run.matched.size(); ++s) {
    csv << s << ',' << run.matched[s][0] << ','
        << format_double(run.probabilities[s][0]) << ','
        << format_double(run.probabilities[s][1]) << ','
        << format_double(run.iou_first_gt[s][0]) << ','
        << format_double(run.iou_first_gt[s][1]) << ','
        << format_double(run.loss[s]) << '\n';
  }
  return csv.str();
}

int cmd_ab_demo(const ExperimentArgs& args, std::ostream& out) {
  ExperimentConfig cfg = experiment_config(args);
  cfg.scenario = ScenarioConfig{};
  const ExperimentReport report = run_experiment(cfg, args.seeds);

  const auto dir = ensure_dir(args.out_dir);
  const std::string prefix = "ab_" + std::string(to_string(cfg.mode));
  for (const auto& run : report.runs) {
    write_text_file(
        (dir / (prefix + "_seed" + std::to_string(run.seed) + ".csv")).string(),
        trajectory_csv(run));
  }
  const std::string summary = summary_json(cfg, report).dump(2) + "\n";
  write_text_file((dir / (prefix + "_summary.json")).string(), summary);
  out << summary;
  return kExitOk;
}

int cmd_stability(const ExperimentArgs& args, std::ostream& out) {
  const ExperimentConfig cfg = experiment_config(args);
  const ExperimentReport report = run_experiment(cfg, args.seeds);

  std::vector<UnstableRecord> records;
  for (const auto& run : report.runs) {
    for (std::size_t s = 0; s < run.unstable.size(); ++s) {
      records.push_back({run.seed, static_cast<int>(s), run.unstable[s]});
    }
  }
  const auto path =
      ensure_dir(args.out_dir) /
      ("unstable_" + std::string(to_string(cfg.mode)) + ".csv");
  std::ostringstream csv;
  write_unstable_csv(csv, records);
  write_text_file(path.string(), csv.str());

  json doc;
  doc["mode"] = to_string(cfg.mode);
  doc["n_seeds"] = report.runs.size();
  doc["mean_post_burnin_unstable"] = report.mean_post_burnin_unstable;
  doc["flip_count_post_burnin"] = report.total_post_burnin_flips;
  doc["csv_path"] = path.string();
  out << doc.dump(2) << '\n';
  return kExitOk;
}

struct GradCheckArgs {
  int samples = 100;
  std::uint64_t seed = 0;
  bool corrupt = false;
};

int cmd_grad_check(const GradCheckArgs& args, std::ostream& out) {
  GradCheckOptions options;
  options.samples = args.samples;
  options.seed = args.seed;
  options.corrupt = args.corrupt;
  const GradCheckReport report = run_grad_check(options);

  json doc;
  doc["h"] = options.h;
  doc["tolerance"] = options.tolerance;
  doc["suites"] = json::array();
  for (const auto& s : report.suites) {
    doc["suites"].push_back({{"name", s.name},
                             {"checked", s.checked},
                             {"skipped", s.skipped},
                             {"comparisons", s.comparisons},
                             {"max_rel_error", s.max_rel_error},
                             {"passed", s.passed()}});
  }
  doc["passed"] = report.passed();
  out << doc.dump(2) << '\n';
  return report.passed() ? kExitOk : kExitCheckFailed;
}

struct FuseArgs {
  std::string kind;
  int layers = 6;
  int dim = 8;
  int tokens = 4;
  std::uint64_t seed = 0;
};

FeatureMap random_map(int tokens, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMap m(tokens, dim);
  for (double& v : m.values) v = normal(rng);
  return m;
}

int cmd_fuse_check(const FuseArgs& args, std::ostream& out) {
  const FusionKind kind = parse_fusion_kind(args.kind);
  if (args.layers < 1 || args.dim < 1 || args.tokens < 1) {
    throw std::invalid_argument("layers, dim and tokens must be >= 1");
  }
  std::mt19937_64 rng(args.seed);
  const FeatureMap backbone = random_map(args.tokens, args.dim, rng);
  std::vector<FeatureMap> layers;
  for (int l = 0; l < args.layers; ++l) {
    layers.push_back(random_map(args.tokens, args.dim, rng));
  }
  const auto params = make_fusion_params(kind, args.layers, args.dim, args.seed);
  const auto outputs = fuse(kind, backbone, layers, params);
  const auto sites = fusion_sites(kind, args.layers);

  bool ok = outputs.size() == sites.size();
  long long count = 0;
  json site_docs = json::array();
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const int width = static_cast<int>(sites[s].size()) * args.dim;
    const bool shape_ok = outputs[s].tokens == args.tokens &&
                          outputs[s].dim == args.dim &&
                          params[s].in_width == width;
    ok = ok && shape_ok;
    count += static_cast<long long>(params[s].parameter_count());
    site_docs.push_back({{"site", s + 1},
                         {"sources", sites[s]},
                         {"in_width", params[s].in_width},
                         {"out_tokens", outputs[s].tokens},
                         {"out_dim", outputs[s].dim},
                         {"parameters", params[s].parameter_count()}});
  }
  const long long expected = fusion_param_count(kind, args.layers, args.dim);
  ok = ok && count == expected;

  json doc;
  doc["kind"] = to_string(kind);
  doc["layers"] = args.layers;
  doc["dim"] = args.dim;
  doc["tokens"] = args.tokens;
  doc["sites"] = site_docs;
  doc["param_count"] = count;
  doc["expected_param_count"] = expected;
  doc["ok"] = ok;
  out << doc.dump(2) << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

void add_experiment_options(CLI::App* cmd, ExperimentArgs& args) {
  cmd->add_option("--config", args.config, "Experiment config JSON")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seeds", args.seeds, "Number of consecutive seeds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mode", args.mode, "Override the config mode")
      ->check(CLI::IsMember({"default", "stable"}));
  cmd->add_option("--out-dir", args.out_dir, "Output directory");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Matching and loss experiments for one-to-one detectors",
               "stable_match"};
  app.require_subcommand(1);

  MatchArgs match_args;
  auto* match = app.add_subcommand("match", "Match a scene file");
  match->add_option("--scene", match_args.scene, "Scene JSON")
      ->required()
      ->check(CLI::ExistingFile);
  match->add_option("--config", match_args.config, "Experiment config JSON")
      ->check(CLI::ExistingFile);
  match->add_flag("--modulated", match_args.modulated,
                  "Use the position-modulated classification cost");
  match->add_option("--out-dir", match_args.out_dir,
                    "Write cost_matrix.csv here");

  ExperimentArgs ab_args;
  auto* ab = app.add_subcommand("ab-demo", "Two-prediction training demo");
  add_experiment_options(ab, ab_args);

  ExperimentArgs stab_args;
  auto* stab = app.add_subcommand("stability", "Step-wise unstable scores");
  add_experiment_options(stab, stab_args);

  GradCheckArgs grad_args;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient check");
  grad->add_option("--samples", grad_args.samples, "Samples per suite")
      ->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_args.seed, "Sampling seed");
  grad->add_flag("--corrupt", grad_args.corrupt,
                 "Perturb analytic gradients (negative control)");

  FuseArgs fuse_args;
  auto* fusecmd = app.add_subcommand("fuse-check", "Memory fusion shape report");
  fusecmd->add_option("--kind", fuse_args.kind, "simple | u_like | dense")
      ->required();
  fusecmd->add_option("--layers", fuse_args.layers, "Encoder layers");
  fusecmd->add_option("--dim", fuse_args.dim, "Channel width");
  fusecmd->add_option("--tokens", fuse_args.tokens, "Tokens per map");
  fusecmd->add_option("--seed", fuse_args.seed, "Initialization seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*match) return cmd_match(match_args, out);
    if (*ab) return cmd_ab_demo(ab_args, out);
    if (*stab) return cmd_stability(stab_args, out);
    if (*grad) return cmd_grad_check(grad_args, out);
    if (*fusecmd) return cmd_fuse_check(fuse_args, out);
  } catch (const std::exception& e) {
    err << "stable_match: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace stablematch
