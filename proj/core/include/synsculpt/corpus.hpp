#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "synsculpt/model.hpp"
#include "synsculpt/trajectory.hpp"

namespace synsculpt {

// Prototypical moves for the bundled humanoid. Each is a composition of
// phase-shifted sinusoids over named joints; velocities are the analytic
// rates (evaluated by a fine central difference of the closed form).
enum class MotionKind { Squat, StepInPlace, JumpingJack, WalkInCircle };

inline constexpr MotionKind kAllMotions[] = {MotionKind::Squat, MotionKind::StepInPlace, MotionKind::JumpingJack,
                                             MotionKind::WalkInCircle};

std::string_view to_string(MotionKind kind);
std::optional<MotionKind> parse_motion_kind(std::string_view text);

struct CorpusOptions {
  double duration_s = 10.0;
  double rate_hz = 100.0;
  double amplitude = 1.0;  // scales every joint excursion
  double tempo = 1.0;      // scales every frequency
};

// Requires the joint names of the bundled humanoid (l_/r_ hips, knees,
// ankles, shoulders, elbows, waist_yaw).
JointTrajectory generate_motion(const KinematicModel& humanoid, MotionKind kind, const CorpusOptions& options = {});

// Standing height of the bundled humanoid's pelvis with soles on z = 0.
inline constexpr double kStandingPelvisHeight = 0.93;

struct NoiseOptions {
  double min_hz = 10.0;
  double max_hz = 40.0;
  double relative_amplitude = 0.1;  // noise RMS / signal RMS, per velocity channel
  int tones = 4;
  std::uint64_t seed = 1;
};

// Adds band-limited noise (a sum of random-phase tones in [min_hz, max_hz))
// to every velocity channel and re-integrates positions from the first frame.
JointTrajectory inject_velocity_noise(const KinematicModel& model, const JointTrajectory& traj,
                                      const NoiseOptions& options = {});

}  // namespace synsculpt
