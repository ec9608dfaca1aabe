#include <cmath>

#include "synsculpt/model.hpp"

namespace synsculpt {

Eigen::Quaterniond quaternion_exp(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * rotation_vector.x(), 0.5 * rotation_vector.y(), 0.5 * rotation_vector.z());
    return q.normalized();
  }
  const Vec3 axis = rotation_vector / angle;
  const double s = std::sin(0.5 * angle);
  return Eigen::Quaterniond(std::cos(0.5 * angle), s * axis.x(), s * axis.y(), s * axis.z());
}

Vec3 quaternion_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // shortest arc
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v / q.w();
  return (2.0 * std::atan2(s, q.w()) / s) * v;
}

VecX neutral_configuration(const KinematicModel& model) {
  VecX q = VecX::Zero(model.nq());
  if (model.floating_base()) q[3] = 1.0;
  return q;
}

Eigen::Quaterniond base_orientation(const KinematicModel& model, const VecX& q) {
  if (!model.floating_base()) return Eigen::Quaterniond::Identity();
  return Eigen::Quaterniond(q[3], q[4], q[5], q[6]);
}

void check_configuration(const KinematicModel& model, const VecX& q, double quat_tol) {
  if (q.size() != model.nq())
    throw ValidationError("dimension mismatch: configuration has " + std::to_string(q.size()) +
                          " entries, model expects " + std::to_string(model.nq()));
  if (!q.allFinite()) throw ValidationError("configuration contains NaN or infinite values");
  if (model.floating_base()) {
    const double n = q.segment<4>(3).norm();
    if (std::abs(n - 1.0) > quat_tol) throw ValidationError("base quaternion is not unit norm");
  }
}

void check_velocity(const KinematicModel& model, const VecX& v) {
  if (v.size() != model.nv())
    throw ValidationError("dimension mismatch: velocity has " + std::to_string(v.size()) +
                          " entries, model expects " + std::to_string(model.nv()));
}

VecX integrate(const KinematicModel& model, const VecX& q, const VecX& v, double dt) {
  VecX out = q;
  for (const Body& b : model.bodies()) {
    switch (b.joint) {
      case JointType::Free6: {
        out.segment<3>(b.q_index) += dt * v.segment<3>(b.v_index + 3);
        const Eigen::Quaterniond orientation(q[b.q_index + 3], q[b.q_index + 4], q[b.q_index + 5], q[b.q_index + 6]);
        const Eigen::Quaterniond next = (quaternion_exp(dt * v.segment<3>(b.v_index)) * orientation).normalized();
        out[b.q_index + 3] = next.w();
        out[b.q_index + 4] = next.x();
        out[b.q_index + 5] = next.y();
        out[b.q_index + 6] = next.z();
        break;
      }
      case JointType::Fixed:
        break;
      default:
        out[b.q_index] += dt * v[b.v_index];
    }
  }
  return out;
}

VecX difference(const KinematicModel& model, const VecX& q0, const VecX& q1) {
  VecX d = VecX::Zero(model.nv());
  for (const Body& b : model.bodies()) {
    switch (b.joint) {
      case JointType::Free6: {
        const Eigen::Quaterniond r0(q0[b.q_index + 3], q0[b.q_index + 4], q0[b.q_index + 5], q0[b.q_index + 6]);
        const Eigen::Quaterniond r1(q1[b.q_index + 3], q1[b.q_index + 4], q1[b.q_index + 5], q1[b.q_index + 6]);
        d.segment<3>(b.v_index) = quaternion_log(r1 * r0.conjugate());
        d.segment<3>(b.v_index + 3) = q1.segment<3>(b.q_index) - q0.segment<3>(b.q_index);
        break;
      }
      case JointType::Fixed:
        break;
      default:
        d[b.v_index] = q1[b.q_index] - q0[b.q_index];
    }
  }
  return d;
}

MatX integrate_path(const KinematicModel& model, const VecX& q0, const MatX& velocities, double dt) {
  const Eigen::Index frames = velocities.rows();
  MatX positions(frames, model.nq());
  if (frames == 0) return positions;
  positions.row(0) = q0.transpose();
  VecX q = q0;
  for (Eigen::Index k = 0; k + 1 < frames; ++k) {
    q = integrate(model, q, velocities.row(k).transpose(), dt);
    positions.row(k + 1) = q.transpose();
  }
  return positions;
}

}  // namespace synsculpt
