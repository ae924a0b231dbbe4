#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posebench/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace posebench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

struct CommonOptions {
  fs::path out_dir;
  bool force = false;
  bool strict = true;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  uint64_t seed = 0;
};

void add_common(CLI::App *cmd, CommonOptions &opts) {
  cmd->add_option("-o,--out", opts.out_dir, "output directory")->required();
  cmd->add_flag("--force", opts.force,
                "allow writing into an existing output directory");
  cmd->add_flag("!--lenient", opts.strict,
                "skip unknown object ids instead of failing");
  cmd->add_option("-j,--jobs", opts.jobs, "worker threads");
  cmd->add_option("--seed", opts.seed, "master RNG seed");
  cmd->set_config("--config", "", "read options from a config file");
}

void prepare_out_dir(const CommonOptions &opts) {
  if (fs::exists(opts.out_dir) && !opts.force) {
    throw ValidationError("output directory exists, pass --force to reuse: " +
                          opts.out_dir.string());
  }
  fs::create_directories(opts.out_dir);
}

// Every run leaves its fully resolved parameters next to the results.
void write_resolved_config(const CommonOptions &opts, json extra) {
  extra["out"] = opts.out_dir.string();
  extra["strict"] = opts.strict;
  extra["jobs"] = opts.jobs;
  extra["seed"] = opts.seed;
  std::ofstream out(opts.out_dir / "resolved_config.json");
  if (!out) {
    throw IoError("cannot write resolved config in " + opts.out_dir.string());
  }
  out << extra.dump(2) << '\n';
}

struct EvalInputs {
  fs::path models_dir;
  fs::path gt_path;       // single-scene GT JSON...
  int scene_id = 0;
  fs::path manifest_path; // ...or a manifest + split
  std::string split = "test";
  fs::path estimates_path;
};

void add_eval_inputs(CLI::App *cmd, EvalInputs &in) {
  cmd->add_option("--models", in.models_dir, "directory of PLY models");
  auto *gt = cmd->add_option("--gt", in.gt_path, "scene GT JSON file");
  cmd->add_option("--scene-id", in.scene_id, "scene id for --gt")->needs(gt);
  auto *manifest =
      cmd->add_option("--manifest", in.manifest_path, "dataset manifest JSON");
  cmd->add_option("--split", in.split, "manifest split name")->needs(manifest);
  gt->excludes(manifest);
  cmd->add_option("--estimates", in.estimates_path, "estimate CSV file")
      ->required();
}

struct LoadedData {
  ModelSet models;
  std::vector<GtAnnotation> gts;
  std::vector<Estimate> ests;
};

LoadedData load_inputs(const EvalInputs &in, bool strict) {
  LoadedData data;
  if (!in.manifest_path.empty()) {
    const auto manifest = load_manifest(in.manifest_path);
    data.models = load_models(manifest.models_dir);
    const auto it = manifest.splits.find(in.split);
    if (it == manifest.splits.end()) {
      throw ValidationError("manifest has no split named '" + in.split + "'");
    }
    for (const auto &[scene_id, gt_file] : it->second.scenes) {
      auto scene = load_ground_truth(gt_file, scene_id, &data.models, strict);
      data.gts.insert(data.gts.end(), scene.begin(), scene.end());
    }
  } else if (!in.gt_path.empty()) {
    if (in.models_dir.empty()) {
      throw ValidationError("--models is required with --gt");
    }
    data.models = load_models(in.models_dir);
    data.gts = load_ground_truth(in.gt_path, in.scene_id, &data.models, strict);
  } else {
    throw ValidationError("either --gt or --manifest is required");
  }
  data.ests = load_estimates(in.estimates_path, &data.models, strict);
  return data;
}

void add_eval_config(CLI::App *cmd, EvalConfig &cfg) {
  // Thresholds are millimeters only; there is deliberately no cm option.
  cmd->add_option("--theta-p-mm", cfg.error_threshold_mm,
                  "pose error threshold, mm");
  cmd->add_option("--theta-v", cfg.visibility_threshold,
                  "visibility threshold for FN counting");
  cmd->add_option("--confidence", cfg.confidence_threshold,
                  "discard estimates below this confidence");
  cmd->add_option("--resolution", cfg.sweep_resolution,
                  "number of sweep thresholds on [0,1)");
  std::map<std::string, EmptySamplePolicy> policies{
      {"one", EmptySamplePolicy::kOne}, {"skip", EmptySamplePolicy::kSkip}};
  cmd->add_option("--empty-sample-policy", cfg.empty_sample_policy,
                  "score for zero-denominator samples")
      ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case));
  cmd->add_flag("--components-tp-only", cfg.components_tp_only,
                "component statistics over TP matches only");
}

json eval_config_json(const EvalConfig &cfg) {
  return json{{"theta_p_mm", cfg.error_threshold_mm},
              {"theta_v", cfg.visibility_threshold},
              {"confidence_threshold", cfg.confidence_threshold},
              {"sweep_resolution", cfg.sweep_resolution},
              {"empty_sample_policy",
               cfg.empty_sample_policy == EmptySamplePolicy::kOne ? "one"
                                                                  : "skip"},
              {"components_tp_only", cfg.components_tp_only}};
}

void add_noise_options(CLI::App *cmd, NoiseModel &noise) {
  cmd->add_option("--rot-sigma-deg", noise.rotation_sigma_deg,
                  "half-normal rotation noise, degrees");
  cmd->add_option("--trans-sigma-mm", noise.translation_sigma_mm,
                  "per-axis translation noise, mm");
  cmd->add_option("--z-bias-mm", noise.z_bias_mm, "systematic depth offset, mm");
  cmd->add_option("--outlier-rate", noise.outlier_rate,
                  "fraction of estimates replaced by random poses");
  cmd->add_option("--miss-rate", noise.miss_rate,
                  "fraction of GTs yielding no estimate");
  std::map<std::string, ConfidenceMode> modes{
      {"error-decay", ConfidenceMode::kErrorDecay},
      {"miscalibrated", ConfidenceMode::kMiscalibrated}};
  cmd->add_option("--confidence-mode", noise.confidence_mode,
                  "how estimate confidences are assigned")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
}

json noise_json(const NoiseModel &noise) {
  return json{{"rotation_sigma_deg", noise.rotation_sigma_deg},
              {"translation_sigma_mm", noise.translation_sigma_mm},
              {"z_bias_mm", noise.z_bias_mm},
              {"outlier_rate", noise.outlier_rate},
              {"miss_rate", noise.miss_rate},
              {"confidence_mode",
               noise.confidence_mode == ConfidenceMode::kErrorDecay
                   ? "error-decay"
                   : "miscalibrated"},
              {"seed", noise.seed}};
}

const ObjectModel &single_model(const ModelSet &models, int object_id) {
  if (object_id != 0) {
    const auto it = models.find(object_id);
    if (it == models.end()) {
      throw ValidationError("no model with object id " +
                            std::to_string(object_id));
    }
    return it->second;
  }
  if (models.size() != 1) {
    throw ValidationError(
        "model directory holds several objects, pass --object");
  }
  return models.begin()->second;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Offline 6D pose evaluation toolkit: maximum-distance pose "
               "errors, visibility-gated AP/AR, confidence sweeps, synthetic "
               "estimate perturbation and a grasp-process simulation"};
  app.require_subcommand(1);

  // evaluate ---------------------------------------------------------------
  CommonOptions eval_common;
  EvalInputs eval_inputs;
  EvalConfig eval_cfg;
  auto *cmd_evaluate =
      app.add_subcommand("evaluate", "score estimates against ground truth");
  add_common(cmd_evaluate, eval_common);
  add_eval_inputs(cmd_evaluate, eval_inputs);
  add_eval_config(cmd_evaluate, eval_cfg);

  // sweep ------------------------------------------------------------------
  CommonOptions sweep_common;
  EvalInputs sweep_inputs;
  EvalConfig sweep_cfg;
  auto *cmd_sweep = app.add_subcommand(
      "sweep", "AP/AR over a grid of confidence thresholds on [0,1)");
  add_common(cmd_sweep, sweep_common);
  add_eval_inputs(cmd_sweep, sweep_inputs);
  add_eval_config(cmd_sweep, sweep_cfg);

  // distribution -----------------------------------------------------------
  CommonOptions dist_common;
  EvalInputs dist_inputs;
  EvalConfig dist_cfg;
  auto *cmd_distribution = app.add_subcommand(
      "distribution", "per-match MDE values for external plotting");
  add_common(cmd_distribution, dist_common);
  add_eval_inputs(cmd_distribution, dist_inputs);
  add_eval_config(cmd_distribution, dist_cfg);

  // perturb ----------------------------------------------------------------
  CommonOptions perturb_common;
  fs::path perturb_models_dir;
  int perturb_object_id = 0;
  int perturb_scenes = 5;
  int perturb_parts = 8;
  std::string perturb_layout = "grid";
  NoiseModel perturb_noise;
  auto *cmd_perturb = app.add_subcommand(
      "perturb", "generate synthetic GT scenes and noisy estimates");
  add_common(cmd_perturb, perturb_common);
  cmd_perturb->add_option("--models", perturb_models_dir, "directory of PLY models")
      ->required();
  cmd_perturb->add_option("--object", perturb_object_id,
                          "object id to generate scenes for");
  cmd_perturb->add_option("--scenes", perturb_scenes, "number of scenes");
  cmd_perturb->add_option("--parts", perturb_parts, "parts per scene");
  cmd_perturb->add_option("--layout", perturb_layout, "grid or drop")
      ->check(CLI::IsMember({"grid", "drop"}));
  add_noise_options(cmd_perturb, perturb_noise);

  // simulate ---------------------------------------------------------------
  CommonOptions sim_common;
  fs::path sim_models_dir;
  int sim_object_id = 0;
  NoiseModel sim_noise;
  ProcessConfig sim_cfg;
  EvalInputs sim_inputs;  // used by --from-estimates replay
  bool sim_from_estimates = false;
  auto *cmd_simulate = app.add_subcommand(
      "simulate", "grasp-process simulation with crash and timing rules");
  add_common(cmd_simulate, sim_common);
  cmd_simulate->add_option("--models", sim_models_dir, "directory of PLY models");
  cmd_simulate->add_option("--object", sim_object_id, "object id to simulate");
  add_noise_options(cmd_simulate, sim_noise);
  cmd_simulate->add_option("--scenes", sim_cfg.scenes, "number of scenes");
  cmd_simulate->add_option("--parts", sim_cfg.parts_per_scene,
                           "parts per scene");
  cmd_simulate->add_option("--time-budget-s", sim_cfg.time_budget_s,
                           "per-scene time budget, seconds");
  cmd_simulate->add_option("--attempt-time-s", sim_cfg.attempt_time_s,
                           "time per attempt, seconds");
  cmd_simulate->add_option("--slot-margin-mm", sim_cfg.slot_margin_mm,
                           "lateral placement margin, mm");
  cmd_simulate->add_option("--grasp-tolerance-mm", sim_cfg.grasp_tolerance_mm,
                           "MDE at or below places the part, mm");
  cmd_simulate->add_option("--crash-threshold-mm", sim_cfg.crash_threshold_mm,
                           "MDE above crashes the part, mm");
  cmd_simulate->add_option("--min-confidence", sim_cfg.min_confidence,
                           "attempts require an estimate above this");
  cmd_simulate->add_flag("--from-estimates", sim_from_estimates,
                         "replay recorded estimates instead of noise draws");
  cmd_simulate->add_option("--gt", sim_inputs.gt_path,
                           "scene GT JSON for --from-estimates");
  cmd_simulate->add_option("--manifest", sim_inputs.manifest_path,
                           "dataset manifest for --from-estimates");
  cmd_simulate->add_option("--split", sim_inputs.split, "manifest split name");
  cmd_simulate->add_option("--estimates", sim_inputs.estimates_path,
                           "estimate CSV for --from-estimates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_evaluate->parsed() || cmd_sweep->parsed() ||
        cmd_distribution->parsed()) {
      const bool is_eval = cmd_evaluate->parsed();
      const bool is_sweep = cmd_sweep->parsed();
      const CommonOptions &common =
          is_eval ? eval_common : (is_sweep ? sweep_common : dist_common);
      const EvalInputs &inputs =
          is_eval ? eval_inputs : (is_sweep ? sweep_inputs : dist_inputs);
      const EvalConfig &cfg =
          is_eval ? eval_cfg : (is_sweep ? sweep_cfg : dist_cfg);
      cfg.validate();
      prepare_out_dir(common);

      const auto data = load_inputs(inputs, common.strict);
      json resolved = eval_config_json(cfg);
      resolved["estimates"] = inputs.estimates_path.string();

      if (is_eval) {
        const auto report =
            evaluate(data.gts, data.ests, data.models, cfg, common.jobs);
        write_eval_report(common.out_dir, report);
        std::cout << "AP " << format_percent(report.ap) << " AR "
                  << format_percent(report.ar) << "\n";
      } else if (is_sweep) {
        const auto sweep = sweep_confidence(data.gts, data.ests, data.models,
                                            cfg, common.jobs);
        write_sweep_csv(common.out_dir / "sweep.csv", sweep);
      } else {
        const auto results =
            match_all(data.gts, data.ests, data.models, cfg, common.jobs);
        write_distribution_csv(common.out_dir / "mde_distribution.csv",
                               export_distribution(results));
      }
      write_resolved_config(common, std::move(resolved));
      return kExitOk;
    }

    if (cmd_perturb->parsed()) {
      prepare_out_dir(perturb_common);
      const auto models = load_models(perturb_models_dir);
      const auto &model = single_model(models, perturb_object_id);
      const auto layout = perturb_layout == "grid"
                              ? SceneLayout::kContainerGrid
                              : SceneLayout::kRandomDrop;
      perturb_noise.seed = derive_seed(perturb_common.seed, 1);

      const fs::path gt_dir = perturb_common.out_dir / "gt";
      fs::create_directories(gt_dir);
      std::vector<Estimate> all_estimates;
      json manifest_scenes = json::array();
      for (int s = 0; s < perturb_scenes; ++s) {
        const uint64_t scene_seed =
            derive_seed(perturb_common.seed, static_cast<uint64_t>(s));
        auto gts = sample_scene(layout, perturb_parts, model, scene_seed, s, 0);
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%06d.json", s);
        write_ground_truth(gt_dir / name, gts);
        manifest_scenes.push_back(
            {{"scene_id", s}, {"gt", (fs::path("gt") / name).string()}});

        NoiseModel scene_noise = perturb_noise;
        scene_noise.seed = derive_seed(perturb_noise.seed, s);
        auto ests = perturb(gts, scene_noise, models);
        all_estimates.insert(all_estimates.end(), ests.begin(), ests.end());
      }
      write_estimates(perturb_common.out_dir / "estimates.csv", all_estimates);

      // Models stay where they are; the manifest points back at them.
      json manifest{{"name", "synthetic"},
                    {"models", fs::absolute(perturb_models_dir).string()},
                    {"splits", {{"test", manifest_scenes}}}};
      std::ofstream mout(perturb_common.out_dir / "manifest.json");
      mout << manifest.dump(2) << '\n';

      write_resolved_config(
          perturb_common,
          json{{"scenes", perturb_scenes},
               {"parts", perturb_parts},
               {"layout", perturb_layout},
               {"noise", noise_json(perturb_noise)}});
      return kExitOk;
    }

    if (cmd_simulate->parsed()) {
      prepare_out_dir(sim_common);
      sim_cfg.seed = sim_common.seed;
      ProcessOutcome outcome;
      json resolved{{"scenes", sim_cfg.scenes},
                    {"parts", sim_cfg.parts_per_scene},
                    {"time_budget_s", sim_cfg.time_budget_s},
                    {"attempt_time_s", sim_cfg.attempt_time_s},
                    {"slot_margin_mm", sim_cfg.slot_margin_mm},
                    {"grasp_tolerance_mm", sim_cfg.grasp_tolerance_mm},
                    {"crash_threshold_mm", sim_cfg.crash_threshold_mm},
                    {"min_confidence", sim_cfg.min_confidence}};
      if (sim_from_estimates) {
        if (sim_inputs.estimates_path.empty()) {
          throw ValidationError("--from-estimates requires --estimates");
        }
        sim_inputs.models_dir = sim_models_dir;
        const auto data = load_inputs(sim_inputs, sim_common.strict);
        outcome = simulate_from_estimates(sim_cfg, data.gts, data.ests,
                                          data.models);
        resolved["estimates"] = sim_inputs.estimates_path.string();
      } else {
        if (sim_models_dir.empty()) {
          throw ValidationError("--models is required");
        }
        const auto models = load_models(sim_models_dir);
        const auto &model = single_model(models, sim_object_id);
        sim_noise.seed = derive_seed(sim_common.seed, 1);
        outcome = simulate(sim_cfg, model, sim_noise);
        resolved["noise"] = noise_json(sim_noise);
      }
      write_process_outcome(sim_common.out_dir, outcome);
      write_resolved_config(sim_common, std::move(resolved));
      std::cout << "AP " << format_percent(outcome.ap) << " AR "
                << format_percent(outcome.ar) << "\n";
      return kExitOk;
    }
  } catch (const ValidationError &e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError &e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
