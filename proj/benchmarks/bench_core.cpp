#include <random>

#include <benchmark/benchmark.h>

#include "synsculpt/corpus.hpp"
#include "synsculpt/dynamics.hpp"
#include "synsculpt/segmenter.hpp"
#include "synsculpt/synergy.hpp"
#include "synsculpt/synth.hpp"

using namespace synsculpt;

namespace {

const KinematicModel& humanoid() {
  static const KinematicModel m = load_model(std::string(SYNSCULPT_BENCH_DATA_DIR) + "/models/humanoid.json");
  return m;
}

const JointTrajectory& squat() {
  static const JointTrajectory t = generate_motion(humanoid(), MotionKind::Squat);
  return t;
}

const Synergy& squat_synergy() {
  static const Synergy s = extract(squat(), {squat().label, 0, squat().frames()}, humanoid(), {.k = 3});
  return s;
}

std::pair<VecX, VecX> random_state() {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VecX q = neutral_configuration(humanoid());
  for (int i = 7; i < q.size(); ++i) q[i] = u(rng);
  VecX v(humanoid().nv());
  for (auto& x : v) x = u(rng);
  return {q, v};
}

void BM_MassMatrix(benchmark::State& state) {
  const auto [q, v] = random_state();
  for (auto _ : state) benchmark::DoNotOptimize(mass_matrix(humanoid(), q));
}
BENCHMARK(BM_MassMatrix);

void BM_InverseDynamics(benchmark::State& state) {
  const auto [q, v] = random_state();
  const VecX a = v.reverse();
  for (auto _ : state) benchmark::DoNotOptimize(inverse_dynamics(humanoid(), q, v, a));
}
BENCHMARK(BM_InverseDynamics);

void BM_Segment(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(segment(squat(), humanoid()));
}
BENCHMARK(BM_Segment)->Unit(benchmark::kMillisecond);

void BM_Extract(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(extract(squat(), {squat().label, 0, squat().frames()}, humanoid(), {.k = 3}));
}
BENCHMARK(BM_Extract)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const auto& s = squat_synergy();
  const SynthesisRequest req{CoefficientSchedule::stored(3), s.duration_s, 100.0, {}};
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(humanoid(), s, req));
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMillisecond);

void BM_ProjectExternal(benchmark::State& state) {
  const auto noisy = inject_velocity_noise(humanoid(), squat());
  const auto& s = squat_synergy();
  for (auto _ : state) benchmark::DoNotOptimize(project_external(humanoid(), noisy, s.basis));
}
BENCHMARK(BM_ProjectExternal)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
