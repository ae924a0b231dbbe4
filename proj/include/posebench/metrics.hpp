#pragma once

#include <vector>

#include "posebench/dataset.hpp"

namespace posebench {

// Policy for samples where a precision or recall denominator is zero.
// kOne scores the empty ratio as 1 (no wrong action taken); kSkip leaves
// the sample out of that mean.
enum class EmptySamplePolicy { kOne, kSkip };

struct EvalConfig {
  double error_threshold_mm = 15.0;   // theta_p
  double visibility_threshold = 0.85; // theta_v
  double confidence_threshold = 0.0;  // c; estimates below are discarded
  int sweep_resolution = 101;
  EmptySamplePolicy empty_sample_policy = EmptySamplePolicy::kOne;
  // Component statistics over TP matches only, instead of all matches.
  bool components_tp_only = false;

  void validate() const;
};

enum class Verdict { kTruePositive, kFalsePositive };

struct MatchEntry {
  int estimate_index = -1;
  int gt_index = -1;  // -1 when no GT of the same class exists in the sample
  double mde_mm = 0.0;
  Verdict verdict = Verdict::kFalsePositive;
  int object_id = 0;
  // Pose pair retained for component statistics; unset for gt_index == -1.
  Pose gt_pose;
  Pose est_pose;
};

struct SampleMatchResult {
  int scene_id = 0;
  int image_id = 0;
  std::vector<MatchEntry> matches;
  std::vector<int> unmatched_gt_fn;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct SweepPoint {
  double confidence = 0.0;
  double ap = 0.0;
  double ar = 0.0;
};

struct AxisStats {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d stddev = Eigen::Vector3d::Zero();
  size_t count = 0;
};

struct EvalReport {
  double ap = 0.0;
  double ar = 0.0;
  std::vector<SampleMatchResult> per_sample;
  std::vector<std::pair<int, double>> mde_distribution;  // (object_id, mde_mm)
  AxisStats component_stats;
  std::vector<SweepPoint> sweep;
};

// Matches the estimates of one sample against its ground truth.
// Estimates below the confidence threshold are discarded. Each surviving
// estimate is scored by its minimum MDE over same-class GTs; estimates are
// processed in increasing order of that minimum (ties: higher confidence,
// then input order) and assigned to the minimizing GT. GTs may absorb any
// number of estimates. TP iff the assigned MDE <= error_threshold_mm.
// FN = GTs with visibility >= visibility_threshold and no TP assigned.
SampleMatchResult match_sample(const std::vector<GtAnnotation> &gts,
                               const std::vector<Estimate> &ests,
                               const ModelSet &models, const EvalConfig &cfg);

// Unweighted per-sample means of TP/(TP+FP) and TP/(TP+FN), with the
// configured policy for zero denominators. Throws on an empty result list.
std::pair<double, double> compute_ap_ar(
    const std::vector<SampleMatchResult> &results,
    EmptySamplePolicy policy = EmptySamplePolicy::kOne);

// Matches every (scene_id, image_id) sample in the union of both lists and
// returns results sorted by sample key. `jobs` caps worker threads; results
// are independent of the degree of parallelism.
std::vector<SampleMatchResult> match_all(const std::vector<GtAnnotation> &gts,
                                         const std::vector<Estimate> &ests,
                                         const ModelSet &models,
                                         const EvalConfig &cfg, int jobs = 1);

// Re-evaluates at `sweep_resolution` confidence thresholds evenly spaced on
// [0,1): c_i = i / resolution.
std::vector<SweepPoint> sweep_confidence(const std::vector<GtAnnotation> &gts,
                                         const std::vector<Estimate> &ests,
                                         const ModelSet &models,
                                         const EvalConfig &cfg, int jobs = 1);

// One (object_id, mde_mm) row per matched estimate, TP and FP alike.
std::vector<std::pair<int, double>> export_distribution(
    const std::vector<SampleMatchResult> &results);

// Per-axis mean and sample standard deviation of the axis error components
// over matched pairs. With fewer than two matches the stddev is reported as
// zero and a warning is emitted.
AxisStats component_statistics(const std::vector<SampleMatchResult> &results,
                               const ModelSet &models,
                               bool tp_only = false);

// Full pipeline: matching, scores, distribution, components, sweep.
EvalReport evaluate(const std::vector<GtAnnotation> &gts,
                    const std::vector<Estimate> &ests, const ModelSet &models,
                    const EvalConfig &cfg, int jobs = 1);

}  // namespace posebench
