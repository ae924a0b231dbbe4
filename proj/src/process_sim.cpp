#include <algorithm>
#include <functional>
#include <limits>
#include <set>

#include "posebench/process_sim.hpp"

namespace posebench {

void ProcessConfig::validate() const {
  if (scenes < 1 || parts_per_scene < 1) {
    throw ValidationError("scenes and parts_per_scene must be at least 1");
  }
  if (!(attempt_time_s > 0.0) || !(time_budget_s > 0.0)) {
    throw ValidationError("time_budget_s and attempt_time_s must be positive");
  }
  if (!(grasp_tolerance_mm > 0.0)) {
    throw ValidationError("grasp_tolerance_mm must be positive");
  }
  if (!(crash_threshold_mm > grasp_tolerance_mm)) {
    throw ValidationError(
        "crash_threshold_mm must exceed grasp_tolerance_mm");
  }
  if (!(slot_margin_mm > 0.0)) {
    throw ValidationError("slot_margin_mm must be positive");
  }
  if (min_confidence < 0.0 || min_confidence > 1.0) {
    throw ValidationError("min_confidence must lie in [0,1]");
  }
}

namespace {

struct Pick {
  int part_index = -1;
  Estimate estimate;
};

// Candidate estimates for one attempt, already associated to alive parts.
using AttemptProvider =
    std::function<std::vector<Pick>(int attempt, const std::vector<int> &alive)>;

void run_scene(const ProcessConfig &cfg, int scene_index,
               const std::vector<GtAnnotation> &parts, const ModelSet &models,
               const AttemptProvider &provider, ProcessOutcome &outcome) {
  std::vector<int> alive(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) alive[i] = static_cast<int>(i);

  SceneOutcome scene;
  double elapsed = 0.0;
  int attempt = 0;
  // An attempt only starts if it can finish inside the budget.
  while (!alive.empty() &&
         elapsed + cfg.attempt_time_s <= cfg.time_budget_s) {
    auto picks = provider(attempt, alive);
    std::erase_if(picks, [&cfg](const Pick &p) {
      return p.estimate.confidence < cfg.min_confidence;
    });

    AttemptRecord record;
    record.scene = scene_index;
    record.elapsed_s = elapsed;

    if (picks.empty()) {
      record.verdict = AttemptVerdict::kSkipped;
    } else {
      // Highest confidence wins; ties go to the pose closest to the camera,
      // then to the lower part index.
      const auto best = std::min_element(
          picks.begin(), picks.end(), [](const Pick &a, const Pick &b) {
            if (a.estimate.confidence != b.estimate.confidence)
              return a.estimate.confidence > b.estimate.confidence;
            const double da = a.estimate.pose.translation.norm();
            const double db = b.estimate.pose.translation.norm();
            if (da != db) return da < db;
            return a.part_index < b.part_index;
          });
      const auto &gt = parts[best->part_index];
      const auto &model = models.at(gt.object_id);
      const double mde = compute_mde(gt.pose, best->estimate.pose, model);
      const Eigen::Vector3d comp =
          compute_axis_components(gt.pose, best->estimate.pose, model);

      record.part = best->part_index;
      record.mde_mm = mde;
      record.confidence = best->estimate.confidence;
      if (mde > cfg.crash_threshold_mm) {
        // Crash removes the part and counts it both FP and FN.
        record.verdict = AttemptVerdict::kFpCrash;
        ++scene.fp;
        ++scene.fn;
        std::erase(alive, best->part_index);
      } else if (mde <= cfg.grasp_tolerance_mm &&
                 comp.x() <= cfg.slot_margin_mm &&
                 comp.y() <= cfg.slot_margin_mm) {
        record.verdict = AttemptVerdict::kTruePositive;
        ++scene.tp;
        std::erase(alive, best->part_index);
      } else {
        // Misplacement: the part stays in the container for a retry.
        record.verdict = AttemptVerdict::kFpMisplace;
        ++scene.fp;
      }
    }
    outcome.attempts.push_back(record);
    elapsed += cfg.attempt_time_s;
    ++attempt;
  }

  scene.fn += static_cast<int>(alive.size());  // timed out in the container
  scene.precision =
      scene.tp + scene.fp > 0
          ? static_cast<double>(scene.tp) / (scene.tp + scene.fp)
          : 1.0;
  scene.recall = scene.tp + scene.fn > 0
                     ? static_cast<double>(scene.tp) / (scene.tp + scene.fn)
                     : 1.0;
  outcome.per_scene.push_back(scene);
  outcome.tp += scene.tp;
  outcome.fp += scene.fp;
  outcome.fn += scene.fn;
}

void finalize(ProcessOutcome &outcome) {
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto &scene : outcome.per_scene) {
    p_sum += scene.precision;
    r_sum += scene.recall;
  }
  const auto n = static_cast<double>(outcome.per_scene.size());
  outcome.ap = p_sum / n;
  outcome.ar = r_sum / n;
}

}  // namespace

ProcessOutcome simulate(const ProcessConfig &cfg, const ObjectModel &model,
                        const NoiseModel &noise, const SceneGeometry &geometry) {
  cfg.validate();
  noise.validate();
  ModelSet models;
  models.emplace(model.object_id, model);

  ProcessOutcome outcome;
  for (int s = 0; s < cfg.scenes; ++s) {
    const uint64_t scene_seed = derive_seed(cfg.seed, static_cast<uint64_t>(s));
    const auto parts = sample_scene(SceneLayout::kContainerGrid,
                                    cfg.parts_per_scene, model, scene_seed, s,
                                    0, geometry);
    // Fresh noise draws per attempt, with an independent stream per part so
    // a part's draws do not depend on which other parts are still present.
    auto provider = [&](int attempt,
                        const std::vector<int> &alive) -> std::vector<Pick> {
      const uint64_t attempt_seed =
          derive_seed(scene_seed ^ noise.seed, static_cast<uint64_t>(attempt));
      std::vector<Pick> picks;
      for (const int part : alive) {
        NoiseModel part_noise = noise;
        part_noise.seed = derive_seed(attempt_seed, static_cast<uint64_t>(part));
        const auto ests =
            perturb({parts[part]}, part_noise, models, geometry);
        if (!ests.empty()) {
          picks.push_back(Pick{part, ests.front()});
        }
      }
      return picks;
    };
    run_scene(cfg, s, parts, models, provider, outcome);
  }
  finalize(outcome);
  return outcome;
}

ProcessOutcome simulate_from_estimates(const ProcessConfig &cfg,
                                       const std::vector<GtAnnotation> &gts,
                                       const std::vector<Estimate> &ests,
                                       const ModelSet &models) {
  cfg.validate();
  auto gt_groups = group_by_sample(gts);
  auto est_groups = group_by_sample(ests);

  std::set<int> scene_ids;
  for (const auto &[key, _] : gt_groups) scene_ids.insert(key.scene_id);
  if (static_cast<int>(scene_ids.size()) < cfg.scenes) {
    throw ValidationError(
        "recorded data covers " + std::to_string(scene_ids.size()) +
        " scenes, need " + std::to_string(cfg.scenes));
  }

  ProcessOutcome outcome;
  int scene_index = 0;
  for (const int scene_id : scene_ids) {
    if (scene_index >= cfg.scenes) break;

    std::vector<int> image_ids;
    for (const auto &[key, _] : gt_groups) {
      if (key.scene_id == scene_id) image_ids.push_back(key.image_id);
    }
    std::sort(image_ids.begin(), image_ids.end());

    const auto &first_image_gts =
        gt_groups.at(SampleKey{scene_id, image_ids.front()});
    if (static_cast<int>(first_image_gts.size()) < cfg.parts_per_scene) {
      throw ValidationError(
          "scene " + std::to_string(scene_id) + " records " +
          std::to_string(first_image_gts.size()) + " parts, need " +
          std::to_string(cfg.parts_per_scene) + " per scene");
    }
    std::vector<GtAnnotation> parts(first_image_gts.begin(),
                                    first_image_gts.begin() +
                                        cfg.parts_per_scene);

    auto provider = [&](int attempt,
                        const std::vector<int> &alive) -> std::vector<Pick> {
      const int image_index =
          std::min<int>(attempt, static_cast<int>(image_ids.size()) - 1);
      const SampleKey key{scene_id, image_ids[image_index]};
      const auto it = est_groups.find(key);
      if (it == est_groups.end()) return {};

      // Each remaining part takes its closest same-class estimate. Going
      // part-first keeps stale detections of already-placed parts from
      // re-attaching to a neighbour and registering a phantom crash.
      std::vector<Pick> picks;
      for (const int part : alive) {
        const auto model_it = models.find(parts[part].object_id);
        if (model_it == models.end()) {
          throw ValidationError("part references object id " +
                                std::to_string(parts[part].object_id) +
                                " with no loaded model");
        }
        const Estimate *best = nullptr;
        double best_mde = std::numeric_limits<double>::infinity();
        for (const auto &est : it->second) {
          if (est.object_id != parts[part].object_id) continue;
          const double mde =
              compute_mde(parts[part].pose, est.pose, model_it->second);
          if (mde < best_mde) {
            best_mde = mde;
            best = &est;
          }
        }
        if (best != nullptr) {
          picks.push_back(Pick{part, *best});
        }
      }
      return picks;
    };
    run_scene(cfg, scene_index, parts, models, provider, outcome);
    ++scene_index;
  }
  finalize(outcome);
  return outcome;
}

}  // namespace posebench
