#pragma once

#include <string>
#include <vector>

#include "synsculpt/model.hpp"
#include "synsculpt/trajectory.hpp"

namespace synsculpt {

// Frames [start, end) of a trajectory. The boundary frame whose momentum
// jump opened the segment is its first frame.
struct MotionSegment {
  std::string trajectory;
  int start = 0;
  int end = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double peak_dp = 0.0;  // ΔP at the opening boundary (0 for the first segment)

  int length() const { return end - start; }
  friend bool operator==(const MotionSegment&, const MotionSegment&) = default;
};

struct SegmentOptions {
  double threshold = 0.75;    // ΔP_th, raw momentum-norm units of the model
  double min_duration = 0.5;  // refractory window between boundaries, s
};

// ΔP(t_k) = ‖A(q_k) v_k − A(q_{k−1}) v_{k−1}‖ for k = 1..T−1 (length T−1).
VecX delta_p_series(const JointTrajectory& traj, const KinematicModel& model);

// Boundary rule on a precomputed ΔP series. Exposed separately so the rule
// can be exercised without a model.
std::vector<MotionSegment> segment_series(const VecX& delta_p, double rate_hz, double t0,
                                          const SegmentOptions& options = {});

std::vector<MotionSegment> segment(const JointTrajectory& traj, const KinematicModel& model,
                                   const SegmentOptions& options = {});

// start_s,end_s,peak_dP
std::string segments_to_csv(const std::vector<MotionSegment>& segments);

}  // namespace synsculpt
