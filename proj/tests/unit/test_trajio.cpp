#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "synsculpt/corpus.hpp"
#include "synsculpt/trajectory.hpp"
#include "test_support.hpp"

using namespace synsculpt;
using namespace synsculpt::test;
namespace fs = std::filesystem;

namespace {

std::string header(const KinematicModel& model, bool with_vel = false) {
  std::string h;
  for (const auto& c : csv_columns(model, with_vel)) h += (h.empty() ? "" : ",") + c;
  return h + "\n";
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "synsculpt_trajio";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("csv column layout") {
  const auto chain = chain3();
  const auto cols = csv_columns(chain, true);
  const std::vector<std::string> expected{"t",       "base_px", "base_py", "base_pz", "base_qw", "base_qx",
                                          "base_qy", "base_qz", "joint_0", "joint_1", "v_base_wx", "v_base_wy",
                                          "v_base_wz", "v_base_vx", "v_base_vy", "v_base_vz", "v_joint_0", "v_joint_1"};
  CHECK(cols == expected);
}

TEST_CASE("read_trajectory_csv") {
  const auto chain = chain3();
  SUBCASE("two-row minimal file") {
    std::istringstream in(header(chain) + "0,0,0,0,1,0,0,0,0,0\n0.01,0,0,0,1,0,0,0,0.01,0\n");
    const auto traj = read_trajectory_csv(in, chain);
    CHECK(traj.frames() == 2);
    CHECK(traj.rate_hz == doctest::Approx(100.0));
    CHECK(traj.velocities(0, 6) == doctest::Approx(1.0));
    CHECK(traj.velocities(1, 6) == doctest::Approx(1.0));
  }
  SUBCASE("timestamp gap of twice dt") {
    std::istringstream in(header(chain) +
                          "0,0,0,0,1,0,0,0,0,0\n0.01,0,0,0,1,0,0,0,0,0\n0.03,0,0,0,1,0,0,0,0,0\n"
                          "0.04,0,0,0,1,0,0,0,0,0\n");
    CHECK_THROWS_WITH_AS(read_trajectory_csv(in, chain), doctest::Contains("non-uniform sampling"), ValidationError);
  }
  SUBCASE("NaN is rejected") {
    std::istringstream in(header(chain) + "0,0,0,0,1,0,0,0,0,0\n0.01,0,0,0,1,0,0,0,nan,0\n");
    CHECK_THROWS_WITH_AS(read_trajectory_csv(in, chain), doctest::Contains("NaN value at row 3"), ValidationError);
  }
  SUBCASE("dimension mismatch") {
    std::istringstream in("t,base_px,base_py,base_pz,base_qw,base_qx,base_qy,base_qz,joint_0\n"
                          "0,0,0,0,1,0,0,0,0\n0.01,0,0,0,1,0,0,0,0\n");
    CHECK_THROWS_WITH_AS(read_trajectory_csv(in, chain), doctest::Contains("dimension mismatch"), ValidationError);
    std::istringstream short_row(header(chain) + "0,0,0,0,1,0,0,0,0,0\n0.01,0,0,0,1,0,0,0,0\n");
    CHECK_THROWS_WITH_AS(read_trajectory_csv(short_row, chain), doctest::Contains("dimension mismatch"),
                         ValidationError);
  }
  SUBCASE("near-unit quaternions are renormalized, others rejected") {
    std::istringstream ok(header(chain) + "0,0,0,0,1.0005,0,0,0,0,0\n0.01,0,0,0,0.9995,0,0,0,0,0\n");
    const auto traj = read_trajectory_csv(ok, chain);
    CHECK(traj.positions(0, 3) == 1.0);
    CHECK(traj.positions(1, 3) == 1.0);
    std::istringstream bad(header(chain) + "0,0,0,0,1.01,0,0,0,0,0\n0.01,0,0,0,1,0,0,0,0,0\n");
    CHECK_THROWS_AS(read_trajectory_csv(bad, chain), ValidationError);
  }
  SUBCASE("timestamps must increase") {
    std::istringstream in(header(chain) + "0,0,0,0,1,0,0,0,0,0\n0,0,0,0,1,0,0,0,0,0\n");
    CHECK_THROWS_WITH_AS(read_trajectory_csv(in, chain), doctest::Contains("strictly increasing"), ValidationError);
  }
  SUBCASE("sidecar model mismatch") {
    std::istringstream in(header(chain) + "0,0,0,0,1,0,0,0,0,0\n0.01,0,0,0,1,0,0,0,0,0\n");
    CHECK_THROWS_AS(read_trajectory_csv(in, chain, Sidecar{"humanoid19"}), ModelMismatchError);
  }
  SUBCASE("velocity columns are taken as given") {
    std::istringstream in(header(chain, true) + "0,0,0,0,1,0,0,0,0,0,1,2,3,4,5,6,7,8\n"
                                                "0.01,0,0,0,1,0,0,0,0,0,1,2,3,4,5,6,7,8\n");
    const auto traj = read_trajectory_csv(in, chain);
    CHECK(traj.velocities(1, 7) == 8.0);
  }
}

TEST_CASE("bundled squat file has 1000 frames") {
  const auto model = humanoid();
  const auto traj = load_trajectory(data_dir() / "corpus" / "squat.csv", model);
  CHECK(traj.frames() == 1000);
  CHECK(traj.rate_hz == 100.0);
  CHECK(traj.label == "squat");
  CHECK(traj.source == TrajectorySource::Mocap);
}

TEST_CASE("differentiate") {
  const auto pendulum = parse_model(pendulum_json(1.0, 1.0));
  const double rate = 100.0;
  const int T = 201;
  SUBCASE("constant positions") {
    const auto chain = chain3();
    Random rng(1);
    const VecX q = rng.configuration(chain);
    MatX positions(T, chain.nq());
    for (int k = 0; k < T; ++k) positions.row(k) = q.transpose();
    CHECK(max_abs(differentiate(chain, positions, rate)) < 1e-12);
  }
  SUBCASE("linear ramp") {
    MatX positions(T, 1);
    for (int k = 0; k < T; ++k) positions(k, 0) = 0.3 + k / rate;
    const MatX v = differentiate(pendulum, positions, rate);
    CHECK(max_abs(v.array() - 1.0) < 1e-9);
  }
  SUBCASE("unit-rate 1 Hz sinusoid") {
    MatX positions(T, 1);
    for (int k = 0; k < T; ++k) positions(k, 0) = std::sin(2 * M_PI * k / rate) / (2 * M_PI);
    const MatX v = differentiate(pendulum, positions, rate);
    double err = 0.0;
    for (int k = 0; k < T; ++k) err = std::max(err, std::abs(v(k, 0) - std::cos(2 * M_PI * k / rate)));
    CHECK(err < 2e-3);
  }
  SUBCASE("base angular velocity from quaternion logarithm") {
    const auto chain = chain3();
    const Vec3 omega(0.3, -0.5, 0.8);
    MatX positions(T, chain.nq());
    for (int k = 0; k < T; ++k) {
      const Eigen::Quaterniond r = quaternion_exp(omega * (k / rate));
      positions.row(k) << 0, 0, 0, r.w(), r.x(), r.y(), r.z(), 0, 0;
    }
    const MatX v = differentiate(chain, positions, rate);
    for (int k = 0; k < T; ++k) CHECK(max_abs(v.row(k).head<3>().transpose() - omega) < 1e-9);
  }
  SUBCASE("fewer than three frames") {
    CHECK_THROWS_AS(differentiate(pendulum, MatX::Zero(2, 1), rate), ValidationError);
  }
  SUBCASE("differentiate of Euler integration stays within 2·dt·max|q̈|") {
    const auto chain = chain3();
    const double dt = 1.0 / rate;
    MatX vel(T, chain.nv());
    double max_acc = 0.0;
    for (int k = 0; k < T; ++k) {
      const double t = k * dt;
      for (int c = 0; c < chain.nv(); ++c) {
        const double w = 1.0 + 0.3 * c;
        vel(k, c) = std::sin(w * t + c);
        max_acc = std::max(max_acc, w);
      }
    }
    const auto traj = trajectory_from_velocities(chain, neutral_configuration(chain), vel, rate);
    const MatX v = differentiate(chain, traj.positions, rate);
    CHECK(max_abs(v - vel) <= 2 * dt * max_acc);
  }
}

TEST_CASE("resample") {
  const auto model = humanoid();
  const auto traj = generate_motion(model, MotionKind::WalkInCircle, {.duration_s = 3.0});
  SUBCASE("same rate is the identity") {
    const auto same = resample(traj, model, traj.rate_hz);
    CHECK(max_abs(same.positions - traj.positions) <= 1e-12);
    CHECK(max_abs(same.velocities - traj.velocities) <= 1e-12);
  }
  SUBCASE("100 -> 1000 -> 100 Hz round trip") {
    const auto up = resample(traj, model, 1000.0);
    CHECK(up.frames() == (traj.frames() - 1) * 10 + 1);
    const auto down = resample(up, model, 100.0);
    REQUIRE(down.frames() == traj.frames());
    CHECK(max_abs(down.positions - traj.positions) < 1e-6);
  }
  SUBCASE("upsampled frames keep unit quaternions") {
    const auto up = resample(traj, model, 730.0);
    for (int k = 0; k < up.frames(); ++k) CHECK(std::abs(up.positions.row(k).segment<4>(3).norm() - 1.0) < 1e-12);
  }
  SUBCASE("two-frame trajectory upsampled 10x is linear") {
    const auto chain = chain3();
    JointTrajectory two;
    two.model = chain.name();
    two.rate_hz = 10.0;
    two.positions = MatX::Zero(2, chain.nq());
    two.positions.row(0) << 0, 0, 0, 1, 0, 0, 0, 0.0, 1.0;
    two.positions.row(1) << 1, 0, 0, 1, 0, 0, 0, 0.5, -1.0;
    two.velocities = MatX::Zero(2, chain.nv());
    const auto up = resample(two, chain, 100.0);
    REQUIRE(up.frames() == 11);
    for (int k = 0; k <= 10; ++k) {
      const double f = k / 10.0;
      CHECK(up.positions(k, 0) == doctest::Approx(f));
      CHECK(up.positions(k, 7) == doctest::Approx(0.5 * f));
      CHECK(up.positions(k, 8) == doctest::Approx(1.0 - 2.0 * f));
    }
    CHECK(max_abs(up.velocities.col(6).array() - 5.0) < 1e-9);
    CHECK(max_abs(up.velocities.col(7).array() + 20.0) < 1e-9);
  }
}

TEST_CASE("save then load is the identity") {
  const auto model = humanoid();
  auto traj = generate_motion(model, MotionKind::JumpingJack, {.duration_s = 2.0});
  traj.style = "ballet";
  traj.source = TrajectorySource::Synthesized;
  traj.label = "jj_roundtrip";
  const fs::path path = scratch("jj_roundtrip.csv");
  save_trajectory(traj, model, path);
  CHECK(fs::exists(sidecar_path(path)));
  const auto back = load_trajectory(path, model);
  CHECK(back.frames() == traj.frames());
  CHECK(back.rate_hz == traj.rate_hz);
  CHECK(back.t0 == traj.t0);
  CHECK(back.style == "ballet");
  CHECK(back.source == TrajectorySource::Synthesized);
  CHECK(back.label == "jj_roundtrip");
  CHECK(back.model == model.name());
  CHECK(max_abs(back.positions - traj.positions) <= 1e-12);
  CHECK(max_abs(back.velocities - traj.velocities) <= 1e-12);
}

TEST_CASE("low-pass option") {
  const auto pendulum = parse_model(pendulum_json(1.0, 1.0));
  const double rate = 100.0;
  MatX x(400, 1);
  for (int k = 0; k < 400; ++k) x(k, 0) = std::sin(2 * M_PI * 0.5 * k / rate) + 0.2 * std::sin(2 * M_PI * 30 * k / rate);
  const MatX y = lowpass(x, rate, 3.0);
  double hf_in = 0.0, hf_out = 0.0;
  for (int k = 100; k < 300; ++k) {
    hf_in += std::abs(x(k, 0) - std::sin(2 * M_PI * 0.5 * k / rate));
    hf_out += std::abs(y(k, 0) - std::sin(2 * M_PI * 0.5 * k / rate));
  }
  CHECK(hf_out < 0.25 * hf_in);
  (void)pendulum;
}
