#include "synsculpt/corpus.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace synsculpt {

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::Squat: return "squat";
    case MotionKind::StepInPlace: return "step_in_place";
    case MotionKind::JumpingJack: return "jumping_jack";
    case MotionKind::WalkInCircle: return "walk_in_circle";
  }
  return "squat";
}

std::optional<MotionKind> parse_motion_kind(std::string_view text) {
  for (MotionKind k : kAllMotions)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kLegSegment = 0.4;

struct Pose6 {
  Vec3 position{0.0, 0.0, kStandingPelvisHeight};
  double yaw = 0.0;
};

class Posture {
 public:
  explicit Posture(const KinematicModel& model) : model_(model), q_(neutral_configuration(model)) {}

  void set(std::string_view joint, double angle) { q_[model_.joint_position_index(joint)] = angle; }
  void both(std::string_view joint, double left, double right) {
    set("l_" + std::string(joint), left);
    set("r_" + std::string(joint), right);
  }
  void base(const Pose6& pose) {
    if (!model_.floating_base()) return;
    q_.head<3>() = pose.position;
    const Eigen::Quaterniond r(Eigen::AngleAxisd(pose.yaw, Vec3::UnitZ()));
    q_.segment<4>(3) << r.w(), r.x(), r.y(), r.z();
  }
  const VecX& q() const { return q_; }

 private:
  const KinematicModel& model_;
  VecX q_;
};

using PoseFn = std::function<VecX(double)>;

PoseFn squat(const KinematicModel& m, const CorpusOptions& o) {
  return [&m, o](double t) {
    const double w = kTwoPi * 0.25 * o.tempo;  // 4 s per repetition
    const double depth = 0.8 * o.amplitude;
    const double s = 0.5 * (1.0 - std::cos(w * t));
    const double phi = depth * s;
    Posture p(m);
    // Equal thigh/shank lengths: hip φ, knee −2φ, ankle φ keeps the feet planted and flat.
    p.base({Vec3(0.0, 0.0, kStandingPelvisHeight - 2.0 * kLegSegment * (1.0 - std::cos(phi))), 0.0});
    p.both("hip_pitch", phi, phi);
    p.both("knee", -2.0 * phi, -2.0 * phi);
    p.both("ankle_pitch", phi, phi);
    p.both("shoulder_pitch", -1.0 * o.amplitude * s, -1.0 * o.amplitude * s);
    p.both("elbow", -0.3 * o.amplitude * s * s, -0.3 * o.amplitude * s * s);
    // Idle upper-body sway, off the squat tempo.
    p.set("waist_yaw", 0.12 * o.amplitude * std::sin(kTwoPi * 0.37 * t + 0.4));
    p.both("shoulder_roll", 0.15 * o.amplitude * std::sin(kTwoPi * 0.61 * t),
           -0.15 * o.amplitude * std::sin(kTwoPi * 0.61 * t + 1.1));
    return p.q();
  };
}

PoseFn step_in_place(const KinematicModel& m, const CorpusOptions& o) {
  return [&m, o](double t) {
    const double w = kTwoPi / 1.2 * o.tempo;
    const double phase = std::sin(w * t);
    const double left = 0.5 * o.amplitude * std::pow(std::max(0.0, phase), 2);
    const double right = 0.5 * o.amplitude * std::pow(std::max(0.0, -phase), 2);
    Posture p(m);
    p.base({});
    // hip −β, knee 2β, ankle −β lifts the foot straight up and keeps it flat.
    p.both("hip_pitch", -left, -right);
    p.both("knee", 2.0 * left, 2.0 * right);
    p.both("ankle_pitch", -left, -right);
    p.both("shoulder_pitch", 0.35 * o.amplitude * phase, -0.35 * o.amplitude * phase);
    p.both("elbow", -0.25 * o.amplitude * (1.0 + std::cos(2.0 * w * t + 0.7)),
           -0.25 * o.amplitude * (1.0 + std::cos(2.0 * w * t + 0.7)));
    p.set("waist_yaw", 0.1 * o.amplitude * std::sin(kTwoPi * 0.23 * t));
    return p.q();
  };
}

PoseFn jumping_jack(const KinematicModel& m, const CorpusOptions& o) {
  return [&m, o](double t) {
    const double w = kTwoPi / 1.0 * o.tempo;
    const double s = 0.5 * (1.0 - std::cos(w * t));
    const double roll = 0.25 * o.amplitude * s;
    Posture p(m);
    const double hop = 0.05 * o.amplitude * std::pow(std::sin(w * t), 2);
    p.base({Vec3(0.0, 0.0, kStandingPelvisHeight - 2.0 * kLegSegment * (1.0 - std::cos(roll)) + hop), 0.0});
    p.both("hip_roll", roll, -roll);
    p.both("ankle_roll", -roll, roll);
    p.both("shoulder_roll", 2.2 * o.amplitude * s, -2.2 * o.amplitude * s);
    p.both("elbow", -0.2 * o.amplitude * s - 0.15 * o.amplitude * std::sin(2.0 * w * t),
           -0.2 * o.amplitude * s - 0.15 * o.amplitude * std::sin(2.0 * w * t + 0.5));
    p.set("waist_yaw", 0.08 * o.amplitude * std::sin(kTwoPi * 0.31 * t + 0.2));
    return p.q();
  };
}

PoseFn walk_in_circle(const KinematicModel& m, const CorpusOptions& o) {
  return [&m, o](double t) {
    const double w = kTwoPi / 1.2 * o.tempo;
    const double turn = kTwoPi / 12.0 * o.tempo;  // one lap per 12 s
    const double radius = 1.0;
    const double psi = turn * t;
    const double phase = std::sin(w * t);
    const double swing = 0.3 * o.amplitude * phase;
    const double knee_l = 0.6 * o.amplitude * std::pow(std::max(0.0, phase), 2);
    const double knee_r = 0.6 * o.amplitude * std::pow(std::max(0.0, -phase), 2);
    Posture p(m);
    const double bob = 0.01 * o.amplitude * (1.0 - std::cos(2.0 * w * t));
    p.base({Vec3(radius * std::sin(psi), radius * (1.0 - std::cos(psi)), kStandingPelvisHeight - bob), psi});
    p.both("hip_pitch", -swing - 0.5 * knee_l, swing - 0.5 * knee_r);
    p.both("knee", knee_l, knee_r);
    p.both("ankle_pitch", swing - 0.5 * knee_l, -swing - 0.5 * knee_r);
    p.both("shoulder_pitch", 0.3 * o.amplitude * phase, -0.3 * o.amplitude * phase);
    p.set("waist_yaw", 0.1 * o.amplitude * phase);
    return p.q();
  };
}

}  // namespace

JointTrajectory generate_motion(const KinematicModel& humanoid, MotionKind kind, const CorpusOptions& options) {
  if (!(options.duration_s > 0.0) || !(options.rate_hz > 0.0))
    throw ValidationError("corpus duration and rate must be positive");
  PoseFn pose;
  switch (kind) {
    case MotionKind::Squat: pose = squat(humanoid, options); break;
    case MotionKind::StepInPlace: pose = step_in_place(humanoid, options); break;
    case MotionKind::JumpingJack: pose = jumping_jack(humanoid, options); break;
    case MotionKind::WalkInCircle: pose = walk_in_circle(humanoid, options); break;
  }

  const int frames = static_cast<int>(std::floor(options.duration_s * options.rate_hz + 1e-9));
  JointTrajectory traj;
  traj.model = humanoid.name();
  traj.label = std::string(to_string(kind));
  traj.style = "prototypical";
  traj.source = TrajectorySource::Mocap;
  traj.rate_hz = options.rate_hz;
  traj.positions.resize(frames, humanoid.nq());
  traj.velocities.resize(frames, humanoid.nv());
  constexpr double h = 1e-6;
  for (int k = 0; k < frames; ++k) {
    const double t = k / options.rate_hz;
    traj.positions.row(k) = pose(t).transpose();
    traj.velocities.row(k) = (difference(humanoid, pose(t - h), pose(t + h)) / (2.0 * h)).transpose();
  }
  return traj;
}

JointTrajectory inject_velocity_noise(const KinematicModel& model, const JointTrajectory& traj,
                                      const NoiseOptions& options) {
  validate(traj, model);
  if (!(options.max_hz > options.min_hz) || options.min_hz < 0.0 || options.tones < 1)
    throw ValidationError("invalid noise band");
  std::mt19937_64 rng(options.seed);
  const auto unit = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  const int frames = traj.frames();
  MatX noisy = traj.velocities;
  for (int c = 0; c < model.nv(); ++c) {
    const double signal_rms = std::sqrt(traj.velocities.col(c).squaredNorm() / frames);
    VecX noise = VecX::Zero(frames);
    for (int m = 0; m < options.tones; ++m) {
      const double f = options.min_hz + (options.max_hz - options.min_hz) * unit();
      const double phi = kTwoPi * unit();
      for (int k = 0; k < frames; ++k) noise[k] += std::sin(kTwoPi * f * traj.time(k) + phi);
    }
    const double noise_rms = std::sqrt(noise.squaredNorm() / frames);
    if (signal_rms > 0.0 && noise_rms > 0.0) noisy.col(c) += (options.relative_amplitude * signal_rms / noise_rms) * noise;
  }

  JointTrajectory out = trajectory_from_velocities(model, traj.q(0), noisy, traj.rate_hz, TrajectorySource::External);
  out.t0 = traj.t0;
  out.style = traj.style;
  out.label = traj.label + "+noise";
  return out;
}

}  // namespace synsculpt
