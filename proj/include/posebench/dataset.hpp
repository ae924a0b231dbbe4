#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "posebench/geometry.hpp"

namespace posebench {

using ModelSet = std::map<int, ObjectModel>;

// One ground-truth object instance in one image.
struct GtAnnotation {
  int scene_id = 0;
  int image_id = 0;
  int object_id = 0;
  Pose pose;
  double visibility = 1.0;  // fraction of the instance visible, [0,1]
};

// One estimator output for one image.
struct Estimate {
  int scene_id = 0;
  int image_id = 0;
  int object_id = 0;
  Pose pose;
  double confidence = 1.0;     // [0,1]; 1.0 when the estimator provides none
  double inference_time = 0.0; // seconds
};

struct DatasetSplit {
  // (scene_id, gt file) pairs; one scene annotation file per scene.
  std::vector<std::pair<int, std::filesystem::path>> scenes;
};

struct DatasetManifest {
  std::string name;  // dataset variant, e.g. "R", "S", "R-S"
  std::filesystem::path models_dir;
  std::map<std::string, DatasetSplit> splits;
};

// Reads vertex positions (mm) from an ASCII or binary little-endian PLY.
// Faces and non-position vertex properties are skipped.
std::vector<Eigen::Vector3d> load_ply_vertices(const std::filesystem::path &path);

// Loads every *.ply in `dir`, keyed by the trailing integer in the file stem
// (obj_000001.ply -> id 1). Throws on duplicate ids or an empty directory.
ModelSet load_models(const std::filesystem::path &dir);

// Scene GT JSON: {"<image_id>": [{"obj_id", "cam_R_m2c" (9 row-major),
// "cam_t_m2c" (mm), "visib_fract"}, ...], ...}. The file carries no scene id,
// so the caller supplies it. When `models` is given, unknown object ids are
// rejected (strict) or dropped with a counted warning.
std::vector<GtAnnotation> load_ground_truth(const std::filesystem::path &path,
                                            int scene_id = 0,
                                            const ModelSet *models = nullptr,
                                            bool strict = true);

// Estimate CSV, header `scene_id,im_id,obj_id,score,R,t,time`. R is 9
// space-separated floats row-major, t is 3 floats in mm. The score and time
// columns may be omitted from the header (defaults 1.0 and 0.0).
std::vector<Estimate> load_estimates(const std::filesystem::path &path,
                                     const ModelSet *models = nullptr,
                                     bool strict = true);

void write_ground_truth(const std::filesystem::path &path,
                        const std::vector<GtAnnotation> &annotations);

void write_estimates(const std::filesystem::path &path,
                     const std::vector<Estimate> &estimates);

DatasetManifest load_manifest(const std::filesystem::path &path);

// Per-image grouping key.
struct SampleKey {
  int scene_id = 0;
  int image_id = 0;
  auto operator<=>(const SampleKey &) const = default;
};

template <typename T>
std::map<SampleKey, std::vector<T>> group_by_sample(const std::vector<T> &items) {
  std::map<SampleKey, std::vector<T>> groups;
  for (const auto &item : items) {
    groups[SampleKey{item.scene_id, item.image_id}].push_back(item);
  }
  return groups;
}

}  // namespace posebench
