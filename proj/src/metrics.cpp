#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <thread>

#include "posebench/metrics.hpp"

namespace posebench {

void EvalConfig::validate() const {
  if (!(error_threshold_mm > 0.0)) {
    throw ValidationError("error_threshold_mm must be positive");
  }
  if (visibility_threshold < 0.0 || visibility_threshold > 1.0) {
    throw ValidationError("visibility_threshold must lie in [0,1]");
  }
  if (confidence_threshold < 0.0 || confidence_threshold > 1.0) {
    throw ValidationError("confidence_threshold must lie in [0,1]");
  }
  if (sweep_resolution < 2) {
    throw ValidationError("sweep_resolution must be at least 2");
  }
}

SampleMatchResult match_sample(const std::vector<GtAnnotation> &gts,
                               const std::vector<Estimate> &ests,
                               const ModelSet &models, const EvalConfig &cfg) {
  cfg.validate();
  SampleMatchResult result;
  if (!gts.empty()) {
    result.scene_id = gts.front().scene_id;
    result.image_id = gts.front().image_id;
  } else if (!ests.empty()) {
    result.scene_id = ests.front().scene_id;
    result.image_id = ests.front().image_id;
  }

  struct Candidate {
    int est_index;
    int gt_index;       // -1: no same-class GT present
    double min_mde;     // +inf for the no-GT case
    double confidence;
  };
  std::vector<Candidate> candidates;
  for (size_t e = 0; e < ests.size(); ++e) {
    const auto &est = ests[e];
    if (est.confidence < cfg.confidence_threshold) continue;
    const auto model_it = models.find(est.object_id);
    if (model_it == models.end()) {
      throw ValidationError("estimate references object id " +
                            std::to_string(est.object_id) +
                            " with no loaded model");
    }
    Candidate cand{static_cast<int>(e), -1,
                   std::numeric_limits<double>::infinity(), est.confidence};
    for (size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].object_id != est.object_id) continue;
      const double mde =
          compute_mde(gts[g].pose, est.pose, model_it->second);
      if (mde < cand.min_mde) {
        cand.min_mde = mde;
        cand.gt_index = static_cast<int>(g);
      }
    }
    candidates.push_back(cand);
  }

  // Increasing minimum MDE; ties broken by higher confidence, then input
  // order, so the result is deterministic.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) {
                     if (a.min_mde != b.min_mde) return a.min_mde < b.min_mde;
                     if (a.confidence != b.confidence)
                       return a.confidence > b.confidence;
                     return a.est_index < b.est_index;
                   });

  std::vector<bool> gt_has_tp(gts.size(), false);
  for (const auto &cand : candidates) {
    MatchEntry entry;
    entry.estimate_index = cand.est_index;
    entry.gt_index = cand.gt_index;
    entry.mde_mm = cand.min_mde;
    entry.object_id = ests[cand.est_index].object_id;
    entry.est_pose = ests[cand.est_index].pose;
    if (cand.gt_index >= 0) {
      entry.gt_pose = gts[cand.gt_index].pose;
      if (cand.min_mde <= cfg.error_threshold_mm) {
        entry.verdict = Verdict::kTruePositive;
        gt_has_tp[cand.gt_index] = true;
      }
    }
    if (entry.verdict == Verdict::kTruePositive) {
      ++result.tp;
    } else {
      ++result.fp;
    }
    result.matches.push_back(entry);
  }

  for (size_t g = 0; g < gts.size(); ++g) {
    if (!gt_has_tp[g] && gts[g].visibility >= cfg.visibility_threshold) {
      result.unmatched_gt_fn.push_back(static_cast<int>(g));
      ++result.fn;
    }
  }
  return result;
}

std::pair<double, double> compute_ap_ar(
    const std::vector<SampleMatchResult> &results, EmptySamplePolicy policy) {
  if (results.empty()) {
    throw ValidationError("no samples to score");
  }
  double precision_sum = 0.0, recall_sum = 0.0;
  size_t precision_n = 0, recall_n = 0;
  for (const auto &r : results) {
    if (r.tp + r.fp > 0) {
      precision_sum += static_cast<double>(r.tp) / (r.tp + r.fp);
      ++precision_n;
    } else if (policy == EmptySamplePolicy::kOne) {
      precision_sum += 1.0;
      ++precision_n;
    }
    if (r.tp + r.fn > 0) {
      recall_sum += static_cast<double>(r.tp) / (r.tp + r.fn);
      ++recall_n;
    } else if (policy == EmptySamplePolicy::kOne) {
      recall_sum += 1.0;
      ++recall_n;
    }
  }
  const double ap = precision_n > 0 ? precision_sum / precision_n : 1.0;
  const double ar = recall_n > 0 ? recall_sum / recall_n : 1.0;
  return {ap, ar};
}

std::vector<SampleMatchResult> match_all(const std::vector<GtAnnotation> &gts,
                                         const std::vector<Estimate> &ests,
                                         const ModelSet &models,
                                         const EvalConfig &cfg, int jobs) {
  auto gt_groups = group_by_sample(gts);
  auto est_groups = group_by_sample(ests);

  std::vector<SampleKey> keys;
  for (const auto &[key, _] : gt_groups) keys.push_back(key);
  for (const auto &[key, _] : est_groups) {
    if (!gt_groups.contains(key)) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());

  static const std::vector<GtAnnotation> kNoGts;
  static const std::vector<Estimate> kNoEsts;
  std::vector<SampleMatchResult> results(keys.size());
  auto process = [&](size_t i) {
    const auto git = gt_groups.find(keys[i]);
    const auto eit = est_groups.find(keys[i]);
    results[i] = match_sample(git != gt_groups.end() ? git->second : kNoGts,
                              eit != est_groups.end() ? eit->second : kNoEsts,
                              models, cfg);
    results[i].scene_id = keys[i].scene_id;
    results[i].image_id = keys[i].image_id;
  };

  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(keys.size())));
  if (workers == 1) {
    for (size_t i = 0; i < keys.size(); ++i) process(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < keys.size();
             i = next.fetch_add(1)) {
          process(i);
        }
      });
    }
    for (auto &t : pool) t.join();
  }
  return results;
}

std::vector<SweepPoint> sweep_confidence(const std::vector<GtAnnotation> &gts,
                                         const std::vector<Estimate> &ests,
                                         const ModelSet &models,
                                         const EvalConfig &cfg, int jobs) {
  cfg.validate();
  std::vector<SweepPoint> points;
  points.reserve(cfg.sweep_resolution);
  for (int i = 0; i < cfg.sweep_resolution; ++i) {
    EvalConfig step = cfg;
    step.confidence_threshold =
        static_cast<double>(i) / cfg.sweep_resolution;
    const auto results = match_all(gts, ests, models, step, jobs);
    const auto [ap, ar] = compute_ap_ar(results, cfg.empty_sample_policy);
    points.push_back(SweepPoint{step.confidence_threshold, ap, ar});
  }
  return points;
}

std::vector<std::pair<int, double>> export_distribution(
    const std::vector<SampleMatchResult> &results) {
  std::vector<std::pair<int, double>> rows;
  for (const auto &r : results) {
    for (const auto &m : r.matches) {
      if (m.gt_index < 0) continue;  // no GT, no defined error value
      rows.emplace_back(m.object_id, m.mde_mm);
    }
  }
  return rows;
}

AxisStats component_statistics(const std::vector<SampleMatchResult> &results,
                               const ModelSet &models, bool tp_only) {
  std::vector<Eigen::Vector3d> components;
  for (const auto &r : results) {
    for (const auto &m : r.matches) {
      if (m.gt_index < 0) continue;
      if (tp_only && m.verdict != Verdict::kTruePositive) continue;
      components.push_back(
          compute_axis_components(m.gt_pose, m.est_pose, models.at(m.object_id)));
    }
  }

  AxisStats stats;
  stats.count = components.size();
  if (components.empty()) return stats;
  for (const auto &c : components) stats.mean += c;
  stats.mean /= static_cast<double>(components.size());
  if (components.size() < 2) {
    std::cerr << "warning: fewer than 2 matches, component stddev reported as 0\n";
    return stats;
  }
  Eigen::Vector3d sq_sum = Eigen::Vector3d::Zero();
  for (const auto &c : components) {
    sq_sum += (c - stats.mean).cwiseAbs2();
  }
  stats.stddev = (sq_sum / static_cast<double>(components.size() - 1)).cwiseSqrt();
  return stats;
}

EvalReport evaluate(const std::vector<GtAnnotation> &gts,
                    const std::vector<Estimate> &ests, const ModelSet &models,
                    const EvalConfig &cfg, int jobs) {
  cfg.validate();
  EvalReport report;
  report.per_sample = match_all(gts, ests, models, cfg, jobs);
  std::tie(report.ap, report.ar) =
      compute_ap_ar(report.per_sample, cfg.empty_sample_policy);
  report.mde_distribution = export_distribution(report.per_sample);
  report.component_stats =
      component_statistics(report.per_sample, models, cfg.components_tp_only);
  report.sweep = sweep_confidence(gts, ests, models, cfg, jobs);
  return report;
}

}  // namespace posebench
