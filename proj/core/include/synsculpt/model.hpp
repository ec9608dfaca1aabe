#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "synsculpt/errors.hpp"

namespace synsculpt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Pose = Eigen::Isometry3d;

// Free6 is the floating base: q stores position + unit quaternion (w,x,y,z),
// v stores the base twist as (angular, linear), both in world coordinates.
// Fixed is only accepted for test harnesses (fixed-base pendulums, sliders).
enum class JointType { Free6, Fixed, Revolute, Prismatic };

std::string_view to_string(JointType type);

struct Body {
  std::string name;
  int parent = -1;
  JointType joint = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();
  Pose parent_to_joint = Pose::Identity();
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Identity();  // about the COM, body axes

  int q_index = 0;
  int v_index = 0;
  int dofs() const;
};

struct Frame {
  std::string name;
  int body = 0;
  Pose offset = Pose::Identity();
};

class KinematicModel {
 public:
  const std::string& name() const { return name_; }
  const Vec3& gravity() const { return gravity_; }
  const std::vector<Body>& bodies() const { return bodies_; }
  const std::vector<Frame>& frames() const { return frames_; }

  int nq() const { return nq_; }
  int nv() const { return nv_; }
  bool floating_base() const { return bodies_.front().joint == JointType::Free6; }
  // Number of velocity coordinates owned by the root joint (6 or 0).
  int base_dofs() const { return floating_base() ? 6 : 0; }
  double total_mass() const;

  std::optional<int> find_body(std::string_view name) const;
  std::optional<int> find_frame(std::string_view name) const;
  // Body or frame named `name`, resolved to (body index, offset). Throws
  // ValidationError for unknown names.
  Frame resolve_frame(std::string_view name) const;

  // Velocity index of the 1-DoF joint that moves body `body_name`.
  int joint_velocity_index(std::string_view body_name) const;
  int joint_position_index(std::string_view body_name) const;

  // Canonical model document as JSON text.
  const std::string& document() const { return document_; }

 private:
  friend KinematicModel parse_model(std::string_view);

  std::string name_;
  Vec3 gravity_{0.0, 0.0, -9.81};
  std::vector<Body> bodies_;
  std::vector<Frame> frames_;
  int nq_ = 0;
  int nv_ = 0;
  std::string document_;
};

// Parses and validates a model document. Bodies may be listed in any order;
// they are sorted topologically so that parent index < child index.
KinematicModel parse_model(std::string_view json_text);
KinematicModel load_model(const std::filesystem::path& path);

// --- Configuration space -------------------------------------------------

VecX neutral_configuration(const KinematicModel& model);

Eigen::Quaterniond base_orientation(const KinematicModel& model, const VecX& q);

// Throws ValidationError if q/v have the wrong size or the base quaternion is
// not unit norm within `quat_tol`.
void check_configuration(const KinematicModel& model, const VecX& q, double quat_tol = 1e-9);
void check_velocity(const KinematicModel& model, const VecX& v);

// q ⊕ v·dt: additive on joints and base position, multiplicative
// (world-frame quaternion exponential) on the base orientation.
VecX integrate(const KinematicModel& model, const VecX& q, const VecX& v, double dt);

// Tangent vector d with integrate(q0, d, 1) == q1.
VecX difference(const KinematicModel& model, const VecX& q0, const VecX& q1);

// Explicit Euler rollout: row 0 is q0, row k+1 = row k ⊕ velocities.row(k)·dt.
MatX integrate_path(const KinematicModel& model, const VecX& q0, const MatX& velocities, double dt);

Eigen::Quaterniond quaternion_exp(const Vec3& rotation_vector);
Vec3 quaternion_log(const Eigen::Quaterniond& q);

}  // namespace synsculpt
