#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "synsculpt/model.hpp"

namespace synsculpt {

enum class TrajectorySource { Mocap, Synthesized, External };

std::string_view to_string(TrajectorySource source);
std::optional<TrajectorySource> parse_source(std::string_view text);

// Uniformly sampled generalized positions and velocities. Row k is the
// sample at t0 + k / rate_hz.
struct JointTrajectory {
  std::string model;
  std::string label;
  double rate_hz = 100.0;
  double t0 = 0.0;
  MatX positions;   // frames × nq
  MatX velocities;  // frames × nv
  std::string style;
  std::optional<TrajectorySource> source;

  int frames() const { return static_cast<int>(positions.rows()); }
  double dt() const { return 1.0 / rate_hz; }
  double time(int k) const { return t0 + k / rate_hz; }
  double duration() const { return frames() > 0 ? (frames() - 1) / rate_hz : 0.0; }
  std::vector<double> timestamps() const;
  VecX q(int k) const { return positions.row(k).transpose(); }
  VecX v(int k) const { return velocities.row(k).transpose(); }
};

// Checks the trajectory invariants against the model (dimensions, T >= 2,
// unit quaternions within 1e-6, finite values, positive rate).
void validate(const JointTrajectory& traj, const KinematicModel& model);

// Optional metadata stored next to the CSV as <stem>.json.
struct Sidecar {
  std::string model;
  std::optional<double> rate_hz;
  std::string style;
  std::optional<TrajectorySource> source;
};

struct LoadOptions {
  // Zero-phase low-pass applied to velocities after loading; disabled when
  // unset.
  std::optional<double> lowpass_cutoff_hz;
};

// Builds a validated trajectory from raw samples: base quaternions within
// 1e-3 of unit are renormalized (others rejected) and missing velocities are
// obtained by differentiate() (a forward difference when T = 2).
JointTrajectory assemble_trajectory(const KinematicModel& model, MatX positions, std::optional<MatX> velocities,
                                    double rate_hz, double t0 = 0.0, const LoadOptions& options = {});

// CSV header for the model: t, base_px.. base_qz, joint_0.., optionally v_*.
std::vector<std::string> csv_columns(const KinematicModel& model, bool with_velocities);

JointTrajectory read_trajectory_csv(std::istream& in, const KinematicModel& model, const Sidecar& sidecar = {},
                                    const LoadOptions& options = {});
JointTrajectory load_trajectory(const std::filesystem::path& csv_path, const KinematicModel& model,
                                const LoadOptions& options = {});

void write_trajectory_csv(std::ostream& out, const JointTrajectory& traj, const KinematicModel& model);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);
// Writes the CSV (with velocity columns) and its JSON sidecar.
void save_trajectory(const JointTrajectory& traj, const KinematicModel& model, const std::filesystem::path& csv_path);

// Finite-difference velocities: central in the interior, second-order
// one-sided at the ends. Base orientation rates come from the quaternion
// logarithm of relative rotations (world-frame angular velocity).
MatX differentiate(const KinematicModel& model, const MatX& positions, double rate_hz);

// Same stencil on a plain (non-quaternion) signal, e.g. velocities -> accelerations.
MatX differentiate_signal(const MatX& samples, double rate_hz);

// Forward-backward first-order low-pass, applied column-wise.
MatX lowpass(const MatX& samples, double rate_hz, double cutoff_hz);

// Linear interpolation of joints and base position, slerp of the base
// quaternion; velocities are re-derived with differentiate().
JointTrajectory resample(const JointTrajectory& traj, const KinematicModel& model, double new_rate_hz);

// Builds a trajectory by explicit Euler integration of velocities from q0.
JointTrajectory trajectory_from_velocities(const KinematicModel& model, const VecX& q0, const MatX& velocities,
                                           double rate_hz, std::optional<TrajectorySource> source = std::nullopt);

}  // namespace synsculpt
