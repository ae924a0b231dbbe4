#pragma once

#include <cstdint>

#include "posebench/dataset.hpp"

namespace posebench {

enum class SceneLayout { kContainerGrid, kRandomDrop };

enum class ConfidenceMode {
  // c = exp(-MDE / error_scale_mm), so larger errors score lower.
  kErrorDecay,
  // Uniform random confidence, uncorrelated with the error. Reproduces an
  // estimator whose uncertainty carries no information.
  kMiscalibrated,
};

struct NoiseModel {
  double rotation_sigma_deg = 0.0;   // half-normal axis-angle magnitude
  double translation_sigma_mm = 0.0; // isotropic normal, per axis
  double z_bias_mm = 0.0;            // systematic depth offset
  double outlier_rate = 0.0;         // estimate replaced by a random pose
  double miss_rate = 0.0;            // GT yields no estimate
  ConfidenceMode confidence_mode = ConfidenceMode::kErrorDecay;
  double confidence_error_scale_mm = 15.0;
  uint64_t seed = 0;

  void validate() const;
};

struct SceneGeometry {
  // Lateral extent of the container area, mm, centered on the camera axis.
  double half_extent_x_mm = 200.0;
  double half_extent_y_mm = 150.0;
  // Camera distance range, mm.
  double z_min_mm = 300.0;
  double z_max_mm = 800.0;
  // container_grid capacity is grid_cols * grid_rows.
  int grid_cols = 4;
  int grid_rows = 4;
  // Visibility assigned to parts whose grid/drop footprint overlaps another
  // part (random_drop only); 1.0 disables the downscaling.
  double overlap_visibility = 1.0;
};

// Generates ground-truth parts for one synthetic scene. container_grid
// places upright parts on a regular grid at one shared camera distance;
// random_drop draws uniform positions and uniform random orientations.
// Same seed, same output.
std::vector<GtAnnotation> sample_scene(SceneLayout layout, int n_parts,
                                       const ObjectModel &model, uint64_t seed,
                                       int scene_id = 0, int image_id = 0,
                                       const SceneGeometry &geometry = {});

// Derives one noisy estimate per surviving GT: a fraction miss_rate is
// dropped, rotations get a half-normal axis-angle kick, translations a
// per-axis normal kick plus z_bias, and a fraction outlier_rate is replaced
// by a uniformly random pose in the scene volume. Confidence comes from the
// configured mode, which needs the realized MDE and hence the models.
std::vector<Estimate> perturb(const std::vector<GtAnnotation> &gts,
                              const NoiseModel &noise, const ModelSet &models,
                              const SceneGeometry &geometry = {});

// Stream-splitting for independent sub-generators (scenes, attempts).
uint64_t derive_seed(uint64_t master, uint64_t stream);

}  // namespace posebench
