#include <cmath>
#include <numbers>
#include <random>

#include "posebench/perturb.hpp"

namespace posebench {

void NoiseModel::validate() const {
  if (rotation_sigma_deg < 0.0 || translation_sigma_mm < 0.0) {
    throw ValidationError("noise sigmas must be non-negative");
  }
  if (outlier_rate < 0.0 || outlier_rate > 1.0) {
    throw ValidationError("outlier_rate must lie in [0,1]");
  }
  if (miss_rate < 0.0 || miss_rate > 1.0) {
    throw ValidationError("miss_rate must lie in [0,1]");
  }
  if (!(confidence_error_scale_mm > 0.0)) {
    throw ValidationError("confidence_error_scale_mm must be positive");
  }
}

uint64_t derive_seed(uint64_t master, uint64_t stream) {
  // splitmix64 finalizer over the combined state.
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64 &rng) {
  // Normalized 4-normal quaternion is uniform on SO(3).
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Eigen::Vector3d random_position(std::mt19937_64 &rng,
                                const SceneGeometry &geo) {
  std::uniform_real_distribution<double> ux(-geo.half_extent_x_mm,
                                            geo.half_extent_x_mm);
  std::uniform_real_distribution<double> uy(-geo.half_extent_y_mm,
                                            geo.half_extent_y_mm);
  std::uniform_real_distribution<double> uz(geo.z_min_mm, geo.z_max_mm);
  const double x = ux(rng);
  const double y = uy(rng);
  const double z = uz(rng);
  return {x, y, z};
}

}  // namespace

std::vector<GtAnnotation> sample_scene(SceneLayout layout, int n_parts,
                                       const ObjectModel &model, uint64_t seed,
                                       int scene_id, int image_id,
                                       const SceneGeometry &geometry) {
  if (n_parts < 1) {
    throw ValidationError("n_parts must be at least 1");
  }
  model.validate();
  std::mt19937_64 rng(seed);
  std::vector<GtAnnotation> annotations;
  annotations.reserve(n_parts);

  if (layout == SceneLayout::kContainerGrid) {
    const int capacity = geometry.grid_cols * geometry.grid_rows;
    if (n_parts > capacity) {
      throw ValidationError("n_parts " + std::to_string(n_parts) +
                            " exceeds container grid capacity " +
                            std::to_string(capacity));
    }
    std::uniform_real_distribution<double> uz(geometry.z_min_mm,
                                              geometry.z_max_mm);
    std::uniform_real_distribution<double> uyaw(0.0, 2.0 * std::numbers::pi);
    const double z = uz(rng);  // one container distance per scene
    const double pitch = model.diameter * 1.2;
    for (int i = 0; i < n_parts; ++i) {
      const int col = i % geometry.grid_cols;
      const int row = i / geometry.grid_cols;
      GtAnnotation ann;
      ann.scene_id = scene_id;
      ann.image_id = image_id;
      ann.object_id = model.object_id;
      // Upright: rotation about the camera axis only.
      ann.pose.rotation =
          Eigen::AngleAxisd(uyaw(rng), Eigen::Vector3d::UnitZ())
              .toRotationMatrix();
      ann.pose.translation = {
          (col - 0.5 * (geometry.grid_cols - 1)) * pitch,
          (row - 0.5 * (geometry.grid_rows - 1)) * pitch, z};
      ann.visibility = 1.0;
      annotations.push_back(ann);
    }
  } else {
    for (int i = 0; i < n_parts; ++i) {
      GtAnnotation ann;
      ann.scene_id = scene_id;
      ann.image_id = image_id;
      ann.object_id = model.object_id;
      ann.pose.rotation = random_rotation(rng);
      ann.pose.translation = random_position(rng, geometry);
      ann.visibility = 1.0;
      annotations.push_back(ann);
    }
    if (geometry.overlap_visibility < 1.0) {
      for (size_t i = 1; i < annotations.size(); ++i) {
        for (size_t j = 0; j < i; ++j) {
          const Eigen::Vector2d d =
              annotations[i].pose.translation.head<2>() -
              annotations[j].pose.translation.head<2>();
          if (d.norm() < model.diameter) {
            annotations[i].visibility = geometry.overlap_visibility;
            break;
          }
        }
      }
    }
  }
  return annotations;
}

std::vector<Estimate> perturb(const std::vector<GtAnnotation> &gts,
                              const NoiseModel &noise, const ModelSet &models,
                              const SceneGeometry &geometry) {
  noise.validate();
  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> uniform01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Estimate> estimates;
  estimates.reserve(gts.size());
  for (const auto &gt : gts) {
    const auto model_it = models.find(gt.object_id);
    if (model_it == models.end()) {
      throw ValidationError("no model loaded for object id " +
                            std::to_string(gt.object_id));
    }
    if (uniform01(rng) < noise.miss_rate) continue;

    Estimate est;
    est.scene_id = gt.scene_id;
    est.image_id = gt.image_id;
    est.object_id = gt.object_id;

    if (uniform01(rng) < noise.outlier_rate) {
      est.pose.rotation = random_rotation(rng);
      est.pose.translation = random_position(rng, geometry);
    } else {
      Eigen::Vector3d axis(normal(rng), normal(rng), normal(rng));
      if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitX();
      axis.normalize();
      const double angle_rad = std::abs(normal(rng)) *
                               noise.rotation_sigma_deg * std::numbers::pi /
                               180.0;
      est.pose.rotation =
          Eigen::AngleAxisd(angle_rad, axis).toRotationMatrix() *
          gt.pose.rotation;
      est.pose.translation =
          gt.pose.translation +
          Eigen::Vector3d(normal(rng), normal(rng), normal(rng)) *
              noise.translation_sigma_mm +
          Eigen::Vector3d(0.0, 0.0, noise.z_bias_mm);
    }

    switch (noise.confidence_mode) {
      case ConfidenceMode::kErrorDecay: {
        const double mde = compute_mde(gt.pose, est.pose, model_it->second);
        est.confidence = std::clamp(
            std::exp(-mde / noise.confidence_error_scale_mm), 0.0, 1.0);
        break;
      }
      case ConfidenceMode::kMiscalibrated:
        est.confidence = uniform01(rng);
        break;
    }
    estimates.push_back(est);
  }
  return estimates;
}

}  // namespace posebench
