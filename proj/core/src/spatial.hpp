#pragma once

// World-frame spatial algebra. Motion vectors are (ω, v_O) with v_O the
// velocity of the body-fixed point passing through the world origin; force
// vectors are (n_O, f). Everything is expressed in world coordinates, so
// composite inertias add without transforms.

#include <vector>

#include "synsculpt/model.hpp"

namespace synsculpt::detail {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

inline Vec6 cross_motion(const Vec6& v, const Vec6& m) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(m.head<3>());
  out.tail<3>() = v.head<3>().cross(m.tail<3>()) + v.tail<3>().cross(m.head<3>());
  return out;
}

inline Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = v.head<3>().cross(f.tail<3>());
  return out;
}

// Spatial inertia about the world origin of a body with mass m, world COM c
// and world rotational inertia Ic about the COM.
inline Mat6 spatial_inertia(double m, const Vec3& c, const Mat3& Ic) {
  const Mat3 cx = skew(c);
  Mat6 I;
  I.topLeftCorner<3, 3>() = Ic + m * cx * cx.transpose();
  I.topRightCorner<3, 3>() = m * cx;
  I.bottomLeftCorner<3, 3>() = m * cx.transpose();
  I.bottomRightCorner<3, 3>() = m * Mat3::Identity();
  return I;
}

struct TreeState {
  std::vector<Pose> pose;                         // world pose of each body
  std::vector<Eigen::Matrix<double, 6, Eigen::Dynamic>> S;  // world motion subspace, 6×dofs
  std::vector<Mat6> inertia;                      // spatial inertia about the world origin
};

TreeState compute_tree(const KinematicModel& model, const VecX& q);

}  // namespace synsculpt::detail
