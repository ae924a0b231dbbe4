#pragma once

#include "posebench/perturb.hpp"

namespace posebench {

struct ProcessConfig {
  int scenes = 5;
  int parts_per_scene = 8;
  double time_budget_s = 160.0;
  double attempt_time_s = 20.0;
  double slot_margin_mm = 20.0;      // allowed lateral placement error
  double grasp_tolerance_mm = 15.0;  // MDE at or below -> placed
  double crash_threshold_mm = 30.0;  // MDE above -> crash, part removed
  double min_confidence = 0.0;       // attempts require an estimate above this
  uint64_t seed = 0;

  void validate() const;
};

enum class AttemptVerdict { kTruePositive, kFpCrash, kFpMisplace, kSkipped };

struct AttemptRecord {
  int scene = 0;
  int part = -1;  // -1 for skipped attempts with no target
  AttemptVerdict verdict = AttemptVerdict::kSkipped;
  double mde_mm = 0.0;
  double confidence = 0.0;
  double elapsed_s = 0.0;
};

struct SceneOutcome {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 1.0;
  double recall = 1.0;
};

struct ProcessOutcome {
  std::vector<AttemptRecord> attempts;
  std::vector<SceneOutcome> per_scene;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double ap = 0.0;
  double ar = 0.0;
};

// Monte-Carlo run of the sequencing experiment: per scene, grid-layout parts
// are picked by the highest-confidence perturbed estimate until the time
// budget runs out. MDE <= grasp_tolerance and lateral error within
// slot_margin places the part (TP); MDE > crash_threshold crashes it, which
// removes the part and counts both FP and FN; anything between is a
// misplacement FP with the part left in the container for a retry. Parts
// still present at budget exhaustion are FN. AP/AR are per-scene
// precision/recall averaged over scenes.
ProcessOutcome simulate(const ProcessConfig &cfg, const ObjectModel &model,
                        const NoiseModel &noise,
                        const SceneGeometry &geometry = {});

// Same rules, but each attempt draws from recorded samples instead of fresh
// noise: scenes come from distinct scene_ids (sorted, first cfg.scenes of
// them), the parts of a scene are the GTs of its first image, and attempt k
// uses the estimates of the scene's k-th image (clamped to the last).
// Estimates attach to the remaining part of the same class with minimum MDE.
ProcessOutcome simulate_from_estimates(const ProcessConfig &cfg,
                                       const std::vector<GtAnnotation> &gts,
                                       const std::vector<Estimate> &ests,
                                       const ModelSet &models);

}  // namespace posebench
