#include "json_codec.hpp"

#include <cmath>

namespace synsculpt {
namespace detail {

json matrix_json(const MatX& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const VecX& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

MatX matrix_from(const json& j, const char* what, Eigen::Index cols) {
  if (!j.is_array()) throw ValidationError(std::string("'") + what + "' must be an array of rows");
  MatX m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError(std::string("dimension mismatch: '") + what + "' row " + std::to_string(r) + " must have " +
                            std::to_string(cols) + " values");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw ValidationError(std::string("'") + what + "' holds a non-numeric value");
      m(static_cast<Eigen::Index>(r), c) = row[c].get<double>();
    }
  }
  return m;
}

VecX vector_from(const json& j, const char* what, Eigen::Index size) {
  if (!j.is_array() || (size >= 0 && static_cast<Eigen::Index>(j.size()) != size))
    throw ValidationError(std::string("'") + what + "' must be an array of " + std::to_string(size) + " numbers");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string("'") + what + "' holds a non-numeric value");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json trajectory_json(const JointTrajectory& traj, const KinematicModel& model, bool with_frames) {
  json j;
  j["model"] = traj.model;
  j["label"] = traj.label;
  j["rate_hz"] = traj.rate_hz;
  j["t0"] = traj.t0;
  j["style"] = traj.style;
  j["source"] = traj.source ? json(std::string(to_string(*traj.source))) : json();
  j["positions"] = matrix_json(traj.positions);
  j["velocities"] = matrix_json(traj.velocities);
  if (with_frames) {
    json names = json::array();
    for (const auto& b : model.bodies()) names.push_back(b.name);
    j["body_names"] = std::move(names);
    json frames = json::array();
    for (int k = 0; k < traj.frames(); ++k) {
      const Poses poses = forward_kinematics(model, traj.q(k));
      json bodies = json::array();
      for (const auto& p : poses.bodies) bodies.push_back({p.translation().x(), p.translation().y(), p.translation().z()});
      frames.push_back({{"t", traj.time(k)},
                        {"q", vector_json(traj.q(k))},
                        {"v", vector_json(traj.v(k))},
                        {"body_positions", std::move(bodies)}});
    }
    j["frames"] = std::move(frames);
  }
  return j;
}

JointTrajectory trajectory_from(const json& j, const KinematicModel& model) {
  if (!j.is_object()) throw ValidationError("trajectory must be a JSON object");
  const std::string ref = field_or<std::string>(j, "model", "");
  if (!ref.empty() && ref != model.name())
    throw ModelMismatchError("trajectory references model '" + ref + "', loaded model is '" + model.name() + "'");
  if (!j.contains("positions")) throw ValidationError("missing field 'positions'");
  MatX positions = matrix_from(j.at("positions"), "positions", model.nq());
  std::optional<MatX> velocities;
  if (j.contains("velocities") && !j.at("velocities").is_null())
    velocities = matrix_from(j.at("velocities"), "velocities", model.nv());
  const double rate = field<double>(j, "rate_hz");
  JointTrajectory traj =
      assemble_trajectory(model, std::move(positions), std::move(velocities), rate, field_or<double>(j, "t0", 0.0));
  traj.label = field_or<std::string>(j, "label", "");
  traj.style = field_or<std::string>(j, "style", "");
  if (j.contains("source") && !j.at("source").is_null()) {
    traj.source = parse_source(field<std::string>(j, "source"));
    if (!traj.source) throw ValidationError("unknown trajectory source '" + j.at("source").get<std::string>() + "'");
  }
  return traj;
}

CoefficientSchedule coefficients_from(const json& j, const Synergy& synergy) {
  const int k = synergy.components();
  const std::string mode = field_or<std::string>(j, "mode", "const");
  const bool has_values = j.is_object() && j.contains("values") && !j.at("values").is_null();
  if (mode == "const" || mode == "constant") {
    if (!has_values) return CoefficientSchedule::constant(synergy.mean_coefficients());
    return CoefficientSchedule::constant(vector_from(j.at("values"), "coeffs.values", k));
  }
  if (mode == "stored") {
    if (synergy.coefficients.cols() == 0) throw ValidationError("synergy has no stored coefficient series");
    return CoefficientSchedule::stored(k);
  }
  if (mode == "curve") {
    if (!has_values || !j.at("values").is_array() || static_cast<int>(j.at("values").size()) != k)
      throw ValidationError("curve coefficients need " + std::to_string(k) + " knot lists");
    CoefficientSchedule s;
    for (const json& channel : j.at("values")) {
      CoefficientChannel ch{CoeffMode::Curve, 0.0, {}};
      if (!channel.is_array() || channel.empty()) throw ValidationError("curve knot list must be a non-empty array");
      for (const json& knot : channel) {
        const VecX tk = vector_from(knot, "curve knot", 2);
        ch.knots.emplace_back(tk[0], tk[1]);
      }
      s.channels.push_back(std::move(ch));
    }
    return s;
  }
  throw ValidationError("unknown coefficient mode '" + mode + "' (expected const, stored or curve)");
}

SequencePlan plan_from(const json& j, const LibraryResolver& resolve) {
  if (!j.is_object()) throw ValidationError("sequence plan must be a JSON object");
  SequencePlan plan;
  plan.rate_hz = field_or<double>(j, "rate_hz", 100.0);
  if (!j.contains("steps") || !j.at("steps").is_array()) throw ValidationError("missing field 'steps'");
  for (const json& s : j.at("steps")) {
    const std::string lib_ref = field<std::string>(s, "library");
    std::optional<int> version;
    if (s.contains("version") && !s.at("version").is_null()) version = field<int>(s, "version");
    const auto lib = resolve(lib_ref, version);
    const auto& entry = lib->at(field<std::string>(s, "label"));
    auto synergy = std::make_shared<const Synergy>(entry.synergy);

    SequenceStep step;
    step.synergy = synergy;
    step.request.coefficients = coefficients_from(s.value("coeffs", json::object()), *synergy);
    step.request.duration_s = field_or<double>(s, "duration_s", synergy->duration_s);
    step.request.rate_hz = plan.rate_hz;
    if (s.contains("transition") && !s.at("transition").is_null()) {
      const json& t = s.at("transition");
      const std::string kind = field_or<std::string>(t, "kind", "none");
      if (kind == "linear_blend" || kind == "linear-blend" || kind == "linear") {
        step.transition = Transition::LinearBlend;
        step.blend_window_s = field<double>(t, "window_s");
      } else if (kind != "none") {
        throw ValidationError("unknown transition kind '" + kind + "'");
      }
    }
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

TaskSpec task_from(const json& j) {
  TaskSpec t;
  t.frame = field<std::string>(j, "frame");
  t.kind = parse_task_kind(field_or<std::string>(j, "kind", "orientation3"));
  if (j.contains("point") && !j.at("point").is_null()) t.point = vector_from(j.at("point"), "point", 3);
  return t;
}

json report_json(const MetricsReport& r) {
  return {{"label", r.label},
          {"mean_dP", r.mean_dp},
          {"mean_dKE_J", r.mean_dke},
          {"mean_power_W", r.mean_power_w},
          {"power_W_per_kg", r.power_w_per_kg},
          {"foot_slide_ratio", r.foot_slide_ratio},
          {"rate_hz", r.rate_hz}};
}

json comparison_json(const Comparison& c) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  json rows = json::array();
  for (const auto& row : c.rows)
    rows.push_back({{"label", row.label},
                    {"report", report_json(row.report)},
                    {"ratio_dP", opt(row.dp_ratio)},
                    {"ratio_dKE", opt(row.dke_ratio)},
                    {"ratio_power", opt(row.power_ratio)},
                    {"ratio_foot_slide", opt(row.slide_ratio)}});
  return {{"baseline", c.baseline}, {"rows", std::move(rows)}};
}

json parse_text(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace detail

SequencePlan parse_sequence_plan(std::string_view json_text, const LibraryResolver& resolve) {
  return detail::plan_from(detail::parse_text(json_text, "sequence plan"), resolve);
}

CoefficientSchedule parse_coefficients(std::string_view json_text, const Synergy& synergy) {
  return detail::coefficients_from(detail::parse_text(json_text, "coefficient schedule"), synergy);
}

std::string trajectory_to_json(const JointTrajectory& traj, const KinematicModel& model, bool with_frames) {
  return detail::trajectory_json(traj, model, with_frames).dump();
}

JointTrajectory trajectory_from_json(std::string_view json_text, const KinematicModel& model) {
  return detail::trajectory_from(detail::parse_text(json_text, "trajectory"), model);
}

}  // namespace synsculpt
