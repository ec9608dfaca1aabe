#include "synsculpt/segmenter.hpp"

#include <iomanip>
#include <sstream>

#include "synsculpt/dynamics.hpp"

namespace synsculpt {

VecX delta_p_series(const JointTrajectory& traj, const KinematicModel& model) {
  validate(traj, model);
  const int frames = traj.frames();
  VecX dp(frames - 1);
  VecX previous = momentum(model, traj.q(0), traj.v(0));
  for (int k = 1; k < frames; ++k) {
    VecX current = momentum(model, traj.q(k), traj.v(k));
    dp[k - 1] = (current - previous).norm();
    previous = std::move(current);
  }
  return dp;
}

std::vector<MotionSegment> segment_series(const VecX& delta_p, double rate_hz, double t0,
                                          const SegmentOptions& options) {
  if (!(options.threshold > 0.0)) throw ValidationError("segmentation threshold must be positive");
  if (!(options.min_duration >= 0.0)) throw ValidationError("min_duration must be non-negative");
  const int frames = static_cast<int>(delta_p.size()) + 1;
  const auto time = [&](int k) { return t0 + k / rate_hz; };

  std::vector<MotionSegment> out;
  MotionSegment current;
  current.start = 0;
  int last_boundary = 0;
  for (int k = 1; k < frames; ++k) {
    const double dp = delta_p[k - 1];
    // Compare elapsed frames rather than differences of absolute times so the
    // rule is insensitive to t0.
    const double elapsed = (k - last_boundary) / rate_hz;
    if (dp > options.threshold && elapsed >= options.min_duration - 1e-12) {
      current.end = k;
      out.push_back(current);
      current = MotionSegment{};
      current.start = k;
      current.peak_dp = dp;
      last_boundary = k;
    }
  }
  current.end = frames;
  out.push_back(current);
  for (auto& s : out) {
    s.start_s = time(s.start);
    s.end_s = time(s.end);
  }
  return out;
}

std::vector<MotionSegment> segment(const JointTrajectory& traj, const KinematicModel& model,
                                   const SegmentOptions& options) {
  auto segments = segment_series(delta_p_series(traj, model), traj.rate_hz, traj.t0, options);
  for (auto& s : segments) s.trajectory = traj.label;
  return segments;
}

std::string segments_to_csv(const std::vector<MotionSegment>& segments) {
  std::ostringstream out;
  out << "start_s,end_s,peak_dP\n" << std::setprecision(17);
  for (const auto& s : segments) out << s.start_s << ',' << s.end_s << ',' << s.peak_dp << '\n';
  return out.str();
}

}  // namespace synsculpt
