#include <set>

#include "doctest.h"
#include "synsculpt/corpus.hpp"
#include "synsculpt/dynamics.hpp"
#include "synsculpt/segmenter.hpp"
#include "test_support.hpp"

using namespace synsculpt;
using namespace synsculpt::test;

namespace {

// Slider whose velocity changes by `steps[i].second` at time `steps[i].first`.
JointTrajectory slider_steps(const KinematicModel& slider, double duration, double rate,
                             const std::vector<std::pair<double, double>>& steps, double v0 = 0.2) {
  const int T = static_cast<int>(duration * rate);
  MatX vel(T, 1);
  for (int k = 0; k < T; ++k) {
    double v = v0;
    for (const auto& [t, dv] : steps)
      if (k >= static_cast<int>(std::lround(t * rate))) v += dv;
    vel(k, 0) = v;
  }
  auto traj = trajectory_from_velocities(slider, VecX::Zero(1), vel, rate);
  traj.label = "steps";
  return traj;
}

void check_cover(const std::vector<MotionSegment>& segs, int frames) {
  REQUIRE(!segs.empty());
  CHECK(segs.front().start == 0);
  CHECK(segs.back().end == frames);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].start < segs[i].end);
    if (i) CHECK(segs[i].start == segs[i - 1].end);
  }
}

std::set<int> boundaries(const std::vector<MotionSegment>& segs) {
  std::set<int> b;
  for (const auto& s : segs) b.insert(s.start);
  return b;
}

}  // namespace

TEST_CASE("delta_p_series") {
  const double m = 3.0;
  const auto slider = parse_model(slider_json(m));
  SUBCASE("constant velocity on a configuration-independent mass matrix") {
    const auto traj = slider_steps(slider, 3.0, 100.0, {});
    const VecX dp = delta_p_series(traj, slider);
    CHECK(dp.size() == traj.frames() - 1);
    CHECK(dp.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("velocity step of magnitude s spikes by s times the column norm of A") {
    const double s = 0.4;
    const auto traj = slider_steps(slider, 3.0, 100.0, {{1.5, s}});
    VecX dp = delta_p_series(traj, slider);
    const double column_norm = mass_matrix(slider, VecX::Zero(1)).col(0).norm();
    CHECK(column_norm == doctest::Approx(m));
    CHECK(dp[149] == doctest::Approx(s * column_norm).epsilon(1e-12));
    dp[149] = 0.0;
    CHECK(dp.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("segment") {
  const auto slider = parse_model(slider_json(2.0));
  SUBCASE("constant velocity gives one segment") {
    const auto traj = slider_steps(slider, 5.0, 100.0, {});
    const auto segs = segment(traj, slider);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].start == 0);
    CHECK(segs[0].end == traj.frames());
    CHECK(segs[0].trajectory == "steps");
  }
  SUBCASE("single jump at 2.0 s") {
    const auto traj = slider_steps(slider, 5.0, 100.0, {{2.0, 1.0}});
    const auto segs = segment(traj, slider);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].start_s == 0.0);
    CHECK(segs[1].start_s == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(segs[1].start == 200);
    CHECK(segs[1].end == traj.frames());
    CHECK(segs[1].peak_dp == doctest::Approx(2.0));
    check_cover(segs, traj.frames());
  }
  SUBCASE("refractory window suppresses a close second spike") {
    const auto traj = slider_steps(slider, 5.0, 100.0, {{2.0, 1.0}, {2.3, -1.0}, {3.0, 1.0}});
    const auto segs = segment(traj, slider, {.threshold = 0.75, .min_duration = 0.5});
    CHECK(boundaries(segs) == std::set<int>{0, 200, 300});
    const auto all = segment(traj, slider, {.threshold = 0.75, .min_duration = 0.0});
    CHECK(boundaries(all) == std::set<int>{0, 200, 230, 300});
  }
  SUBCASE("threshold monotonicity refines the boundary set") {
    Random rng(5);
    const VecX dp = rng.vector(600, 0.0, 2.0).cwiseAbs();
    std::vector<MotionSegment> previous;
    for (double th = 2.0; th > 0.05; th -= 0.1) {
      const auto segs = segment_series(dp, 100.0, 0.0, {.threshold = th, .min_duration = 0.0});
      check_cover(segs, 601);
      if (!previous.empty()) {
        CHECK(segs.size() >= previous.size());
        const auto fine = boundaries(segs);
        for (int b : boundaries(previous)) CHECK(fine.count(b) == 1);
      }
      previous = segs;
    }
  }
  SUBCASE("deterministic") {
    const auto model = humanoid();
    const auto traj = generate_motion(model, MotionKind::StepInPlace, {.duration_s = 4.0});
    const auto a = segment(traj, model);
    const auto b = segment(traj, model);
    CHECK(a == b);
    check_cover(a, traj.frames());
  }
  SUBCASE("invalid options") {
    CHECK_THROWS_AS(segment_series(VecX::Zero(3), 100.0, 0.0, {.threshold = 0.0}), ValidationError);
    CHECK_THROWS_AS(segment_series(VecX::Zero(3), 100.0, 0.0, {.threshold = 1.0, .min_duration = -1.0}),
                    ValidationError);
  }
}

TEST_CASE("segments_to_csv") {
  const auto segs = segment_series((VecX(4) << 0, 1, 0, 0).finished(), 10.0, 0.0, {.threshold = 0.5, .min_duration = 0});
  CHECK(segments_to_csv(segs) == "start_s,end_s,peak_dP\n0,0.20000000000000001,0\n0.20000000000000001,0.5,1\n");
}
