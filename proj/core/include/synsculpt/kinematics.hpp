#pragma once

#include <string>
#include <vector>

#include "synsculpt/model.hpp"

namespace synsculpt {

struct Poses {
  std::vector<Pose> bodies;  // world pose of each body frame (after its joint)
  std::vector<Pose> frames;  // world pose of each named frame
};

// World poses of every body and named frame. The root pose equals the base
// pose stored in q.
Poses forward_kinematics(const KinematicModel& model, const VecX& q);

enum class TaskKind { Pose6, Orientation3, Position3 };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

// One row of a stack-of-tasks table: a frame, which of its motion components
// are controlled, and the controlled point in frame coordinates.
struct TaskSpec {
  std::string frame;
  TaskKind kind = TaskKind::Pose6;
  Vec3 point = Vec3::Zero();

  int dimension() const { return kind == TaskKind::Pose6 ? 6 : 3; }
};

// Default torso task: orientation of "upper_torso".
TaskSpec upper_torso_orientation();

// Task Jacobian (rows: angular then linear, restricted by kind). Columns
// follow the model's velocity ordering.
MatX task_jacobian(const KinematicModel& model, const VecX& q, const TaskSpec& task);

// World position of the task point.
Vec3 task_point(const KinematicModel& model, const VecX& q, const TaskSpec& task);

}  // namespace synsculpt
