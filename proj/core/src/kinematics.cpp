#include "synsculpt/kinematics.hpp"

#include "spatial.hpp"

namespace synsculpt {

namespace detail {

TreeState compute_tree(const KinematicModel& model, const VecX& q) {
  check_configuration(model, q, 1e-6);
  const auto& bodies = model.bodies();
  TreeState st;
  st.pose.resize(bodies.size());
  st.S.resize(bodies.size());
  st.inertia.resize(bodies.size());

  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Body& b = bodies[i];
    auto& S = st.S[i];
    S.resize(6, b.dofs());
    if (b.parent < 0) {
      if (b.joint == JointType::Free6) {
        const Vec3 p = q.segment<3>(b.q_index);
        Pose pose = Pose::Identity();
        pose.translation() = p;
        pose.linear() = base_orientation(model, q).normalized().toRotationMatrix();
        st.pose[i] = pose;
        // (ω, ṗ) -> (ω, ṗ + p × ω)
        S.setZero();
        S.topLeftCorner<3, 3>().setIdentity();
        S.bottomLeftCorner<3, 3>() = skew(p);
        S.bottomRightCorner<3, 3>().setIdentity();
      } else {
        st.pose[i] = b.parent_to_joint;
      }
    } else {
      const Pose joint = st.pose[b.parent] * b.parent_to_joint;
      const Vec3 axis_w = joint.linear() * b.axis;
      const Vec3 origin = joint.translation();
      Pose motion = Pose::Identity();
      if (b.joint == JointType::Revolute) {
        motion.linear() = Eigen::AngleAxisd(q[b.q_index], b.axis).toRotationMatrix();
        S.col(0) << axis_w, origin.cross(axis_w);
      } else if (b.joint == JointType::Prismatic) {
        motion.translation() = b.axis * q[b.q_index];
        S.col(0) << Vec3::Zero(), axis_w;
      }
      st.pose[i] = joint * motion;
    }
    const Mat3& R = st.pose[i].linear();
    const Vec3 c = st.pose[i] * b.com;
    st.inertia[i] = spatial_inertia(b.mass, c, R * b.inertia * R.transpose());
  }
  return st;
}

}  // namespace detail

Poses forward_kinematics(const KinematicModel& model, const VecX& q) {
  Poses out;
  out.bodies = detail::compute_tree(model, q).pose;
  out.frames.reserve(model.frames().size());
  for (const Frame& f : model.frames()) out.frames.push_back(out.bodies[f.body] * f.offset);
  return out;
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Pose6: return "pose6";
    case TaskKind::Orientation3: return "orientation3";
    case TaskKind::Position3: return "position3";
  }
  return "pose6";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "pose6" || text == "pose") return TaskKind::Pose6;
  if (text == "orientation3" || text == "orientation") return TaskKind::Orientation3;
  if (text == "position3" || text == "position") return TaskKind::Position3;
  throw ValidationError("unknown task kind '" + std::string(text) + "'");
}

TaskSpec upper_torso_orientation() { return TaskSpec{"upper_torso", TaskKind::Orientation3, Vec3::Zero()}; }

Vec3 task_point(const KinematicModel& model, const VecX& q, const TaskSpec& task) {
  const Frame frame = model.resolve_frame(task.frame);
  const auto st = detail::compute_tree(model, q);
  return st.pose[frame.body] * (frame.offset * task.point);
}

MatX task_jacobian(const KinematicModel& model, const VecX& q, const TaskSpec& task) {
  const Frame frame = model.resolve_frame(task.frame);
  const auto st = detail::compute_tree(model, q);
  const Vec3 x = st.pose[frame.body] * (frame.offset * task.point);

  MatX J6 = MatX::Zero(6, model.nv());
  for (int i = frame.body; i >= 0; i = model.bodies()[i].parent) {
    const Body& b = model.bodies()[i];
    for (int c = 0; c < b.dofs(); ++c) {
      const Vec3 w = st.S[i].col(c).head<3>();
      const Vec3 v = st.S[i].col(c).tail<3>();
      J6.col(b.v_index + c) << w, v + w.cross(x);
    }
  }
  switch (task.kind) {
    case TaskKind::Orientation3: return J6.topRows<3>();
    case TaskKind::Position3: return J6.bottomRows<3>();
    default: return J6;
  }
}

}  // namespace synsculpt
