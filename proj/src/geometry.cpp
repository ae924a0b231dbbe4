#include "posebench/geometry.hpp"

#include <cmath>
#include <sstream>

namespace posebench {

void Pose::validate(const std::string &context) const {
  if (!rotation.allFinite()) {
    throw ValidationError(context + ": rotation matrix has non-finite entries");
  }
  if (!translation.allFinite()) {
    throw ValidationError(context + ": translation has non-finite entries");
  }
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  const double ortho_dev =
      (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_dev > kRotationTolerance) {
    std::ostringstream os;
    os << context << ": rotation is not orthonormal, max |R^T R - I| entry = "
       << ortho_dev;
    throw ValidationError(os.str());
  }
  const double det_dev = std::abs(rotation.determinant() - 1.0);
  if (det_dev > kRotationTolerance) {
    std::ostringstream os;
    os << context << ": rotation determinant deviates from +1 by " << det_dev;
    throw ValidationError(os.str());
  }
}

bool Pose::is_valid() const {
  try {
    validate();
    return true;
  } catch (const ValidationError &) {
    return false;
  }
}

double compute_diameter(const std::vector<Eigen::Vector3d> &vertices) {
  double max_sq = 0.0;
  for (size_t i = 0; i < vertices.size(); ++i) {
    for (size_t j = i + 1; j < vertices.size(); ++j) {
      max_sq = std::max(max_sq, (vertices[i] - vertices[j]).squaredNorm());
    }
  }
  return std::sqrt(max_sq);
}

void ObjectModel::validate() const {
  if (vertices.size() < 4) {
    throw ValidationError("model " + std::to_string(object_id) +
                          ": needs at least 4 vertices, has " +
                          std::to_string(vertices.size()));
  }
  for (const auto &v : vertices) {
    if (!v.allFinite()) {
      throw ValidationError("model " + std::to_string(object_id) +
                            ": non-finite vertex");
    }
  }
  if (!(diameter > 0.0)) {
    throw ValidationError("model " + std::to_string(object_id) +
                          ": diameter must be positive");
  }
}

ObjectModel make_model(int object_id, std::vector<Eigen::Vector3d> vertices) {
  ObjectModel model;
  model.object_id = object_id;
  model.vertices = std::move(vertices);
  model.diameter = compute_diameter(model.vertices);
  model.validate();
  return model;
}

namespace {

// All three metrics reduce to statistics of (R_gt - R_est) v + (t_gt - t_est).
struct ErrorMap {
  Eigen::Matrix3d dr;
  Eigen::Vector3d dt;

  ErrorMap(const Pose &gt, const Pose &est)
      : dr(gt.rotation - est.rotation),
        dt(gt.translation - est.translation) {}

  Eigen::Vector3d at(const Eigen::Vector3d &v) const { return dr * v + dt; }
};

void check_inputs(const Pose &gt, const Pose &est, const ObjectModel &model) {
  gt.validate("ground-truth pose");
  est.validate("estimated pose");
  model.validate();
}

}  // namespace

double compute_mde(const Pose &gt, const Pose &est, const ObjectModel &model) {
  check_inputs(gt, est, model);
  const ErrorMap err(gt, est);
  double max_sq = 0.0;
  for (const auto &v : model.vertices) {
    max_sq = std::max(max_sq, err.at(v).squaredNorm());
  }
  return std::sqrt(max_sq);
}

double compute_add(const Pose &gt, const Pose &est, const ObjectModel &model) {
  check_inputs(gt, est, model);
  const ErrorMap err(gt, est);
  double sum = 0.0;
  for (const auto &v : model.vertices) {
    sum += err.at(v).norm();
  }
  return sum / static_cast<double>(model.vertices.size());
}

Eigen::Vector3d compute_axis_components(const Pose &gt, const Pose &est,
                                        const ObjectModel &model) {
  check_inputs(gt, est, model);
  const ErrorMap err(gt, est);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto &v : model.vertices) {
    sum += err.at(v).cwiseAbs();
  }
  return sum / static_cast<double>(model.vertices.size());
}

}  // namespace posebench
