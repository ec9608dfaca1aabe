#pragma once

// nlohmann-level codecs shared by the service and the public string API.
// Kept out of the installed headers.

#include "json.hpp"
#include "synsculpt/kinematics.hpp"
#include "synsculpt/metrics.hpp"
#include "synsculpt/service.hpp"

namespace synsculpt::detail {

using nlohmann::json;

json matrix_json(const MatX& m);
json vector_json(const VecX& v);
MatX matrix_from(const json& j, const char* what, Eigen::Index cols);
VecX vector_from(const json& j, const char* what, Eigen::Index size);

json trajectory_json(const JointTrajectory& traj, const KinematicModel& model, bool with_frames);
JointTrajectory trajectory_from(const json& j, const KinematicModel& model);

CoefficientSchedule coefficients_from(const json& j, const Synergy& synergy);
SequencePlan plan_from(const json& j, const LibraryResolver& resolve);
TaskSpec task_from(const json& j);

json parse_text(std::string_view text, const char* what);

json report_json(const MetricsReport& r);
json comparison_json(const Comparison& c);

// Reads a required/optional member with a schema error naming the field.
template <class T>
T field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ValidationError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + name + "' has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const char* name, T fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return field<T>(j, name);
}

}  // namespace synsculpt::detail
