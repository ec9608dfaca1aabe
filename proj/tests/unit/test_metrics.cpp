#include <cmath>

#include "doctest.h"
#include "synsculpt/corpus.hpp"
#include "synsculpt/kinematics.hpp"
#include "synsculpt/metrics.hpp"
#include "synsculpt/synth.hpp"
#include "test_support.hpp"

using namespace synsculpt;
using namespace synsculpt::test;

namespace {

JointTrajectory make(const KinematicModel& model, MatX positions, MatX velocities, double rate) {
  JointTrajectory t;
  t.model = model.name();
  t.label = "t";
  t.rate_hz = rate;
  t.positions = std::move(positions);
  t.velocities = std::move(velocities);
  return t;
}

// Standing humanoid with soles on z = 0, repeated for `frames` frames.
JointTrajectory standing(const KinematicModel& model, int frames) {
  VecX q = neutral_configuration(model);
  q[2] = kStandingPelvisHeight;
  MatX P(frames, model.nq());
  for (int k = 0; k < frames; ++k) P.row(k) = q.transpose();
  return make(model, P, MatX::Zero(frames, model.nv()), 100.0);
}

}  // namespace

TEST_CASE("energetics") {
  SUBCASE("constant velocity on a slider is energetically flat") {
    const auto slider = parse_model(slider_json(2.0));
    const auto traj = trajectory_from_velocities(slider, VecX::Zero(1), MatX::Constant(300, 1, 0.7), 100.0);
    const auto e = energetics(traj, slider);
    CHECK(e.mean_dp < 1e-12);
    CHECK(e.mean_dke < 1e-12);
  }
  SUBCASE("pendulum matches the discrete closed-form sums") {
    const double m = 1.5, L = 0.8, A = 0.6, w = 2 * M_PI * 0.7, rate = 1000.0;
    const auto pendulum = parse_model(pendulum_json(m, L));
    const int T = 3001;
    MatX P(T, 1), V(T, 1);
    for (int k = 0; k < T; ++k) {
      P(k, 0) = A * std::sin(w * k / rate);
      V(k, 0) = A * w * std::cos(w * k / rate);
    }
    const auto traj = make(pendulum, P, V, rate);
    const double I = m * L * L;
    double dp = 0.0, dke = 0.0;
    for (int k = 1; k < T; ++k) {
      dp += I * std::abs(V(k, 0) - V(k - 1, 0));
      dke += 0.5 * I * std::abs(V(k, 0) * V(k, 0) - V(k - 1, 0) * V(k - 1, 0));
    }
    const auto e = energetics(traj, pendulum, rate);
    CHECK(std::abs(e.mean_dp - dp / (T - 1)) < 1e-6 * dp / (T - 1));
    CHECK(std::abs(e.mean_dke - dke / (T - 1)) < 1e-6 * dke / (T - 1));
  }
  SUBCASE("time translation invariance") {
    const auto model = humanoid();
    auto traj = generate_motion(model, MotionKind::StepInPlace, {.duration_s = 1.0});
    const auto a = energetics(traj, model);
    traj.t0 = 17.25;
    const auto b = energetics(traj, model);
    CHECK(a.mean_dp == b.mean_dp);
    CHECK(a.mean_dke == b.mean_dke);
  }
  SUBCASE("velocity scaling on a configuration-independent model") {
    const auto slider = parse_model(slider_json(1.3));
    MatX V(500, 1);
    for (int k = 0; k < 500; ++k) V(k, 0) = std::sin(0.03 * k) + 0.2;
    const auto base = energetics(trajectory_from_velocities(slider, VecX::Zero(1), V, 100.0), slider);
    for (double c : {-2.0, 0.5, 3.0}) {
      const auto s = energetics(trajectory_from_velocities(slider, VecX::Zero(1), c * V, 100.0), slider);
      CHECK(s.mean_dp == doctest::Approx(std::abs(c) * base.mean_dp).epsilon(1e-9));
      CHECK(s.mean_dke == doctest::Approx(c * c * base.mean_dke).epsilon(1e-9));
    }
  }
  SUBCASE("synergy reconstruction of a noisy squat lowers mean dKE") {
    const auto model = humanoid();
    const auto clean = generate_motion(model, MotionKind::Squat, {.duration_s = 4.0});
    const auto noisy = inject_velocity_noise(model, clean);
    const auto syn = extract(noisy, MotionSegment{noisy.label, 0, noisy.frames()}, model, {.k = 3});
    const auto recon =
        reconstruct(model, syn, {CoefficientSchedule::stored(3), syn.duration_s, noisy.rate_hz, std::nullopt});
    const double before = energetics(noisy, model).mean_dke;
    const double after = energetics(recon, model).mean_dke;
    MESSAGE("mean dKE noisy " << before << " J, reconstructed " << after << " J");
    CHECK(after < before);
  }
}

TEST_CASE("mechanical_power") {
  SUBCASE("static pose") {
    const auto model = humanoid();
    CHECK(mechanical_power(standing(model, 20), model).mean_w == 0.0);
  }
  SUBCASE("pendulum against the analytic power") {
    const double m = 2.0, L = 0.5, A = 0.8, w = 2 * M_PI * 0.5, rate = 100.0;
    const auto pendulum = parse_model(pendulum_json(m, L));
    const int T = 401;
    MatX P(T, 1), V(T, 1);
    double analytic = 0.0;
    for (int k = 0; k < T; ++k) {
      const double t = k / rate;
      const double th = A * std::sin(w * t), thd = A * w * std::cos(w * t), thdd = -A * w * w * std::sin(w * t);
      P(k, 0) = th;
      V(k, 0) = thd;
      analytic += std::abs((m * L * L * thdd + m * 9.81 * L * std::sin(th)) * thd);
    }
    analytic /= T;
    const auto p = mechanical_power(make(pendulum, P, V, rate), pendulum);
    CHECK(std::abs(p.mean_w - analytic) < 0.02 * analytic);
    CHECK(p.w_per_kg == doctest::Approx(p.mean_w / pendulum.total_mass()));
  }
  SUBCASE("floating base is unactuated") {
    const auto model = humanoid();
    auto traj = standing(model, 50);
    traj.velocities.col(3).setConstant(0.4);  // drift the whole body along x
    traj = trajectory_from_velocities(model, traj.q(0), traj.velocities, 100.0);
    CHECK(mechanical_power(traj, model).mean_w < 1e-9);
  }
  SUBCASE("needs three frames") {
    const auto model = humanoid();
    CHECK_THROWS_AS(mechanical_power(standing(model, 2), model), ValidationError);
  }
}

TEST_CASE("foot_sliding_ratio") {
  const auto model = humanoid();
  SUBCASE("soles sit on the ground plane when standing") {
    const auto traj = standing(model, 1);
    for (const char* foot : {"left_foot", "right_foot"})
      CHECK(std::abs(task_point(model, traj.q(0), TaskSpec{foot, TaskKind::Position3}).z()) < 1e-12);
  }
  SUBCASE("static feet on the ground") { CHECK(foot_sliding_ratio(standing(model, 100), model) == 0.0); }
  SUBCASE("feet translating horizontally at ground height") {
    auto traj = standing(model, 100);
    traj.velocities.col(3).setConstant(0.3);
    traj.velocities.col(4).setConstant(-0.1);
    traj = trajectory_from_velocities(model, traj.q(0), traj.velocities, 100.0);
    CHECK(foot_sliding_ratio(traj, model) == 1.0);
  }
  SUBCASE("25 of 100 contact frames sliding") {
    auto traj = standing(model, 50);  // two feet: 100 contact frames
    for (int k = 0; k < 25; k += 2) traj.velocities(k, 3) = 0.2;         // both feet slide: 13 frames → 26
    traj.velocities.row(0).setZero();                                     // drop one frame → 24
    traj.velocities(40, model.joint_velocity_index("l_hip_yaw")) = 1.0;  // one foot spins in place
    traj.velocities(41, model.joint_velocity_index("l_hip_pitch")) = 1.0;  // one foot swings → 25
    const double ratio = foot_sliding_ratio(traj, model);
    CHECK(ratio == doctest::Approx(0.25));
  }
  SUBCASE("no contact gives zero") {
    auto traj = standing(model, 10);
    traj.positions.col(2).array() += 0.5;
    traj.velocities.col(3).setConstant(1.0);
    CHECK(foot_sliding_ratio(traj, model) == 0.0);
  }
  SUBCASE("invariant under world yaw") {
    auto traj = generate_motion(model, MotionKind::WalkInCircle, {.duration_s = 4.0});
    const double before = foot_sliding_ratio(traj, model);
    MESSAGE("walk-in-circle foot slide ratio " << before);
    CHECK(before > 0.0);
    const Eigen::Quaterniond yaw(Eigen::AngleAxisd(0.83, Vec3::UnitZ()));
    const Mat3 R = yaw.toRotationMatrix();
    for (int k = 0; k < traj.frames(); ++k) {
      traj.positions.row(k).head<3>() = (R * traj.positions.row(k).head<3>().transpose()).transpose();
      const Eigen::Quaterniond q(traj.positions(k, 3), traj.positions(k, 4), traj.positions(k, 5), traj.positions(k, 6));
      const Eigen::Quaterniond r = yaw * q;
      traj.positions.row(k).segment<4>(3) << r.w(), r.x(), r.y(), r.z();
      traj.velocities.row(k).head<3>() = (R * traj.velocities.row(k).head<3>().transpose()).transpose();
      traj.velocities.row(k).segment<3>(3) = (R * traj.velocities.row(k).segment<3>(3).transpose()).transpose();
    }
    CHECK(foot_sliding_ratio(traj, model) == doctest::Approx(before).epsilon(1e-12));
  }
  SUBCASE("unknown foot frame") {
    CHECK_THROWS_AS(foot_sliding_ratio(standing(model, 5), model, {.feet = {"hoof"}}), ValidationError);
  }
}

TEST_CASE("compare and csv") {
  MetricsReport a{"orig", 2.0, 4.0, 10.0, 0.2, 0.5, 1000.0};
  MetricsReport b{"proj", 1.0, 1.0, 5.0, 0.1, 0.25, 1000.0};
  const std::vector<MetricsReport> both{a, b};
  SUBCASE("identity comparison") {
    const std::vector<MetricsReport> same{a, a};
    for (const auto& row : compare(same).rows) {
      CHECK(row.dp_ratio == 1.0);
      CHECK(row.dke_ratio == 1.0);
      CHECK(row.power_ratio == 1.0);
      CHECK(row.slide_ratio == 1.0);
    }
  }
  SUBCASE("ratios are elementwise divisions") {
    const auto c = compare(both);
    CHECK(c.baseline == "orig");
    CHECK(c.rows[1].dp_ratio == 0.5);
    CHECK(c.rows[1].dke_ratio == 0.25);
    CHECK(c.rows[1].power_ratio == 0.5);
    CHECK(c.rows[1].slide_ratio == 0.5);
  }
  SUBCASE("zero baseline reports NA") {
    MetricsReport zero = a;
    zero.mean_power_w = 0.0;
    const std::vector<MetricsReport> rs{zero, b};
    const auto c = compare(rs);
    CHECK(!c.rows[1].power_ratio);
    const std::string csv = comparison_to_csv(c);
    CHECK(csv.find("proj,1,1,5,0.1,0.25,1000,0.5,0.25,NA,0.5") != std::string::npos);
    CHECK(csv.find("inf") == std::string::npos);
  }
  SUBCASE("report csv header") {
    CHECK(reports_to_csv(both).rfind("label,mean_dP,mean_dKE_J,mean_power_W,power_W_per_kg,foot_slide_ratio,rate_hz\n", 0) ==
          0);
  }
  SUBCASE("evaluate fills every field") {
    const auto model = humanoid();
    const auto traj = generate_motion(model, MotionKind::JumpingJack, {.duration_s = 1.0});
    const auto r = evaluate(traj, model);
    CHECK(r.label == "jumping_jack");
    CHECK(r.mean_dp > 0.0);
    CHECK(r.mean_dke > 0.0);
    CHECK(r.mean_power_w > 0.0);
    CHECK(r.foot_slide_ratio >= 0.0);
    CHECK(r.foot_slide_ratio <= 1.0);
    CHECK(r.rate_hz == 1000.0);
  }
}
