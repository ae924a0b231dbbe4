#pragma once

// Shared helpers for the test suites: random input generators and
// independent brute-force oracles. The oracles go through homogeneous 4x4
// matrices on purpose, so they share no code path with the library.

#include <random>

#include "posebench/dataset.hpp"

namespace posebench::testing {

inline Eigen::Matrix3d random_rotation_matrix(std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Pose random_pose(std::mt19937_64 &rng, double translation_range_mm = 500.0) {
  std::uniform_real_distribution<double> u(-translation_range_mm,
                                           translation_range_mm);
  Pose pose;
  pose.rotation = random_rotation_matrix(rng);
  pose.translation = {u(rng), u(rng), u(rng)};
  return pose;
}

inline ObjectModel random_model(std::mt19937_64 &rng, int min_vertices = 4,
                                int max_vertices = 30,
                                double extent_mm = 50.0) {
  std::uniform_int_distribution<int> nv(min_vertices, max_vertices);
  std::uniform_real_distribution<double> u(-extent_mm, extent_mm);
  std::vector<Eigen::Vector3d> vertices;
  const int n = nv(rng);
  for (int i = 0; i < n; ++i) {
    vertices.emplace_back(u(rng), u(rng), u(rng));
  }
  return make_model(1, std::move(vertices));
}

inline ObjectModel unit_cube_model(int object_id = 1) {
  std::vector<Eigen::Vector3d> vertices;
  for (const double x : {-1.0, 1.0})
    for (const double y : {-1.0, 1.0})
      for (const double z : {-1.0, 1.0}) vertices.emplace_back(x, y, z);
  return make_model(object_id, std::move(vertices));
}

inline Eigen::Matrix4d homogeneous(const Pose &pose) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = pose.rotation;
  m.topRightCorner<3, 1>() = pose.translation;
  return m;
}

// max_x || P_gt x - P_est x || over homogeneous vertex coordinates.
inline double oracle_mde(const Pose &gt, const Pose &est,
                         const ObjectModel &model) {
  const Eigen::Matrix4d a = homogeneous(gt);
  const Eigen::Matrix4d b = homogeneous(est);
  double best = 0.0;
  for (const auto &v : model.vertices) {
    const Eigen::Vector4d x(v.x(), v.y(), v.z(), 1.0);
    const double d = ((a - b) * x).head<3>().norm();
    best = std::max(best, d);
  }
  return best;
}

inline double oracle_add(const Pose &gt, const Pose &est,
                         const ObjectModel &model) {
  const Eigen::Matrix4d a = homogeneous(gt);
  const Eigen::Matrix4d b = homogeneous(est);
  double sum = 0.0;
  for (const auto &v : model.vertices) {
    const Eigen::Vector4d x(v.x(), v.y(), v.z(), 1.0);
    sum += ((a - b) * x).head<3>().norm();
  }
  return sum / static_cast<double>(model.vertices.size());
}

inline Eigen::Vector3d oracle_axis_components(const Pose &gt, const Pose &est,
                                              const ObjectModel &model) {
  const Eigen::Matrix4d a = homogeneous(gt);
  const Eigen::Matrix4d b = homogeneous(est);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto &v : model.vertices) {
    const Eigen::Vector4d x(v.x(), v.y(), v.z(), 1.0);
    sum += ((a - b) * x).head<3>().cwiseAbs();
  }
  return sum / static_cast<double>(model.vertices.size());
}

// Random interior point of the vertex convex hull, via exponential weights.
inline Eigen::Vector3d random_hull_point(std::mt19937_64 &rng,
                                         const ObjectModel &model) {
  std::uniform_real_distribution<double> u(1e-12, 1.0);
  double total = 0.0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  for (const auto &v : model.vertices) {
    const double w = -std::log(u(rng));
    point += w * v;
    total += w;
  }
  return point / total;
}

inline bool pose_bits_equal(const Pose &a, const Pose &b) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (a.rotation(r, c) != b.rotation(r, c)) return false;
    }
    if (a.translation(r) != b.translation(r)) return false;
  }
  return true;
}

}  // namespace posebench::testing
