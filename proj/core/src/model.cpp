#include "synsculpt/model.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace synsculpt {

using nlohmann::json;

std::string_view to_string(JointType type) {
  switch (type) {
    case JointType::Free6: return "free6";
    case JointType::Fixed: return "fixed";
    case JointType::Revolute: return "revolute";
    case JointType::Prismatic: return "prismatic";
  }
  return "unknown";
}

int Body::dofs() const {
  switch (joint) {
    case JointType::Free6: return 6;
    case JointType::Fixed: return 0;
    default: return 1;
  }
}

double KinematicModel::total_mass() const {
  return std::accumulate(bodies_.begin(), bodies_.end(), 0.0,
                         [](double acc, const Body& b) { return acc + b.mass; });
}

std::optional<int> KinematicModel::find_body(std::string_view name) const {
  for (std::size_t i = 0; i < bodies_.size(); ++i)
    if (bodies_[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> KinematicModel::find_frame(std::string_view name) const {
  for (std::size_t i = 0; i < frames_.size(); ++i)
    if (frames_[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

Frame KinematicModel::resolve_frame(std::string_view name) const {
  if (auto f = find_frame(name)) return frames_[*f];
  if (auto b = find_body(name)) return Frame{std::string(name), *b, Pose::Identity()};
  throw ValidationError("unknown frame '" + std::string(name) + "'");
}

int KinematicModel::joint_velocity_index(std::string_view body_name) const {
  auto b = find_body(body_name);
  if (!b || bodies_[*b].dofs() != 1)
    throw ValidationError("no 1-DoF joint named '" + std::string(body_name) + "'");
  return bodies_[*b].v_index;
}

int KinematicModel::joint_position_index(std::string_view body_name) const {
  auto b = find_body(body_name);
  if (!b || bodies_[*b].dofs() != 1)
    throw ValidationError("no 1-DoF joint named '" + std::string(body_name) + "'");
  return bodies_[*b].q_index;
}

namespace {

Vec3 read_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(what + ": expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Mat3 rpy_to_matrix(const Vec3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Pose read_transform(const json& j, const std::string& what) {
  Pose pose = Pose::Identity();
  if (j.is_null()) return pose;
  if (j.is_array()) {
    pose.translation() = read_vec3(j, what);
    return pose;
  }
  if (j.contains("xyz")) pose.translation() = read_vec3(j.at("xyz"), what + ".xyz");
  if (j.contains("rpy")) pose.linear() = rpy_to_matrix(read_vec3(j.at("rpy"), what + ".rpy"));
  return pose;
}

JointType parse_joint_type(const std::string& s, const std::string& body) {
  if (s == "free6") return JointType::Free6;
  if (s == "fixed") return JointType::Fixed;
  if (s == "revolute") return JointType::Revolute;
  if (s == "prismatic") return JointType::Prismatic;
  throw ValidationError("body '" + body + "': unknown joint type '" + s + "'");
}

struct RawBody {
  Body body;
  std::string parent;
};

}  // namespace

KinematicModel parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model document is not valid JSON: ") + e.what());
  }

  KinematicModel model;
  try {
    model.name_ = doc.value("name", std::string("model"));
    if (doc.contains("gravity")) model.gravity_ = read_vec3(doc.at("gravity"), "gravity");

    std::vector<RawBody> raw;
    std::map<std::string, int> by_name;
    for (const auto& jb : doc.at("bodies")) {
      RawBody rb;
      Body& b = rb.body;
      b.name = jb.at("name").get<std::string>();
      if (by_name.count(b.name)) throw ValidationError("duplicate body name '" + b.name + "'");
      if (jb.contains("parent") && !jb.at("parent").is_null())
        rb.parent = jb.at("parent").get<std::string>();

      const json& joint = jb.at("joint");
      b.joint = parse_joint_type(joint.at("type").get<std::string>(), b.name);
      if (b.dofs() == 1) {
        Vec3 axis = read_vec3(joint.at("axis"), "body '" + b.name + "' joint.axis");
        if (std::abs(axis.norm() - 1.0) > 1e-6)
          throw ValidationError("body '" + b.name + "': joint axis is not unit norm");
        b.axis = axis.normalized();
      }
      b.parent_to_joint = read_transform(jb.value("transform", json()), "body '" + b.name + "' transform");

      const json& in = jb.at("inertial");
      b.mass = in.at("mass").get<double>();
      if (!(b.mass > 0.0)) throw ValidationError("body '" + b.name + "': mass must be positive");
      b.com = in.contains("com") ? read_vec3(in.at("com"), "body '" + b.name + "' com") : Vec3::Zero();
      const json& ji = in.at("inertia");
      if (!ji.is_array() || ji.size() != 6)
        throw ValidationError("body '" + b.name + "': inertia must list 6 upper-triangular entries");
      const double ixx = ji[0], ixy = ji[1], ixz = ji[2], iyy = ji[3], iyz = ji[4], izz = ji[5];
      b.inertia << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
      Eigen::SelfAdjointEigenSolver<Mat3> eig(b.inertia, Eigen::EigenvaluesOnly);
      if (!(eig.eigenvalues().minCoeff() > 0.0))
        throw ValidationError("body '" + b.name + "': non-SPD inertia");

      by_name[b.name] = static_cast<int>(raw.size());
      raw.push_back(std::move(rb));
    }
    if (raw.empty()) throw ValidationError("model has no bodies");

    // Exactly one root; everything else must reach it.
    int root = -1;
    std::vector<std::vector<int>> children(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].parent.empty()) {
        if (root >= 0)
          throw ValidationError("multiple root bodies: '" + raw[root].body.name + "' and '" +
                                raw[i].body.name + "'");
        root = static_cast<int>(i);
        continue;
      }
      auto it = by_name.find(raw[i].parent);
      if (it == by_name.end())
        throw ValidationError("body '" + raw[i].body.name + "': unknown parent '" + raw[i].parent + "'");
      children[it->second].push_back(static_cast<int>(i));
    }
    if (root < 0) throw ValidationError("cycle detected: no root body (every body has a parent)");
    const JointType root_joint = raw[root].body.joint;
    if (root_joint != JointType::Free6 && root_joint != JointType::Fixed)
      throw ValidationError("root body '" + raw[root].body.name + "' must use a free6 joint");

    // Depth-first preorder (children in document order) gives parent index <
    // child index and leaves a depth-first document in its original order.
    std::vector<int> order;
    std::vector<int> new_index(raw.size(), -1);
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int b = stack.back();
      stack.pop_back();
      new_index[b] = static_cast<int>(order.size());
      order.push_back(b);
      for (auto it = children[b].rbegin(); it != children[b].rend(); ++it) stack.push_back(*it);
    }
    if (order.size() != raw.size()) {
      for (std::size_t i = 0; i < raw.size(); ++i)
        if (new_index[i] < 0) throw ValidationError("cycle detected involving body '" + raw[i].body.name + "'");
    }

    int q_at = 0, v_at = 0;
    for (int old : order) {
      Body b = raw[old].body;
      if (b.joint == JointType::Free6 && old != root)
        throw ValidationError("body '" + b.name + "': free6 joint allowed only on the root");
      b.parent = raw[old].parent.empty() ? -1 : new_index[by_name.at(raw[old].parent)];
      b.q_index = q_at;
      b.v_index = v_at;
      q_at += b.joint == JointType::Free6 ? 7 : b.dofs();
      v_at += b.dofs();
      model.bodies_.push_back(std::move(b));
    }
    model.nq_ = q_at;
    model.nv_ = v_at;

    if (doc.contains("frames")) {
      for (const auto& jf : doc.at("frames")) {
        Frame f;
        f.name = jf.at("name").get<std::string>();
        if (model.find_frame(f.name)) throw ValidationError("duplicate frame name '" + f.name + "'");
        const std::string body = jf.at("body").get<std::string>();
        auto bi = model.find_body(body);
        if (!bi) throw ValidationError("frame '" + f.name + "': unknown body '" + body + "'");
        f.body = *bi;
        f.offset = read_transform(jf.value("offset", json()), "frame '" + f.name + "' offset");
        model.frames_.push_back(std::move(f));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model document schema violation: ") + e.what());
  }

  model.document_ = doc.dump();
  return model;
}

KinematicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace synsculpt
