#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace posebench {

// Thrown when input data violates a structural constraint (bad rotation,
// out-of-range visibility, unknown object id). Maps to exit code 2 in the CLI.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// Thrown for filesystem and format-level failures. Maps to exit code 1.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

// Rigid model-to-camera transform. Translation is in millimeters.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static constexpr double kRotationTolerance = 1e-6;

  Eigen::Vector3d apply(const Eigen::Vector3d &p) const {
    return rotation * p + translation;
  }

  Pose compose(const Pose &other) const {
    return Pose{rotation * other.rotation,
                rotation * other.translation + translation};
  }

  // Throws ValidationError naming the violated property: R must be
  // orthonormal with det +1 within kRotationTolerance per entry, t finite.
  void validate(const std::string &context = "pose") const;

  bool is_valid() const;
};

// Vertex set of one object, in millimeters. Faces are irrelevant for the
// error metrics, so only vertices are kept.
struct ObjectModel {
  int object_id = 0;
  std::vector<Eigen::Vector3d> vertices;
  double diameter = 0.0;  // max pairwise vertex distance, mm

  void validate() const;
};

// Max pairwise vertex distance. Quadratic; model vertex counts at
// evaluation scale keep this cheap.
double compute_diameter(const std::vector<Eigen::Vector3d> &vertices);

ObjectModel make_model(int object_id, std::vector<Eigen::Vector3d> vertices);

// Maximum distance error: max over model vertices of |gt(v) - est(v)|.
// The per-point error is convex in v, so the vertex maximum bounds the
// whole surface.
double compute_mde(const Pose &gt, const Pose &est, const ObjectModel &model);

// Mean corresponding-vertex distance. Always <= MDE.
double compute_add(const Pose &gt, const Pose &est, const ObjectModel &model);

// Per camera-axis mean of |gt(v) - est(v)| over vertices, in mm.
Eigen::Vector3d compute_axis_components(const Pose &gt, const Pose &est,
                                        const ObjectModel &model);

}  // namespace posebench
