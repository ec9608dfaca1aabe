#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "synsculpt/kinematics.hpp"
#include "synsculpt/synergy.hpp"
#include "synsculpt/trajectory.hpp"

namespace synsculpt {

enum class CoeffMode { Constant, Stored, Curve };

struct CoefficientChannel {
  CoeffMode mode = CoeffMode::Constant;
  double value = 0.0;                            // Constant
  std::vector<std::pair<double, double>> knots;  // Curve: (t [s], a), piecewise linear, clamped
};

// Per-component coefficient source a_i(t).
struct CoefficientSchedule {
  std::vector<CoefficientChannel> channels;

  static CoefficientSchedule constant(const VecX& values);
  static CoefficientSchedule stored(int k);
  static CoefficientSchedule zero(int k) { return constant(VecX::Zero(k)); }

  int size() const { return static_cast<int>(channels.size()); }
  // Stored series are interpolated at the synergy's own rate and clamped
  // outside [0, duration].
  VecX evaluate(const Synergy& synergy, double t) const;
};

struct SynthesisRequest {
  CoefficientSchedule coefficients;
  double duration_s = 1.0;
  double rate_hz = 100.0;
  std::optional<VecX> q0;  // defaults to the synergy's reference pose
};

// v̂(t) = S a(t); q̂ = q0 ⊕ ∫v̂ by explicit Euler at the output rate.
JointTrajectory reconstruct(const KinematicModel& model, const Synergy& synergy, const SynthesisRequest& request);

enum class Transition { None, LinearBlend };

// `transition` governs the seam INTO this step (ignored on the first step).
struct SequenceStep {
  std::shared_ptr<const Synergy> synergy;
  SynthesisRequest request;
  Transition transition = Transition::None;
  double blend_window_s = 0.0;
};

struct SequencePlan {
  std::vector<SequenceStep> steps;
  double rate_hz = 100.0;  // overrides each step's request rate
};

struct SequenceResult {
  JointTrajectory trajectory;
  std::vector<int> seams;  // first frame of each step after the first
};

// Steps are chained so each starts at the previous step's final
// configuration. Linear blends cross-fade velocities over a window centred on
// the seam before the whole sequence is integrated.
SequenceResult sequence(const KinematicModel& model, const SequencePlan& plan);

struct MonteCarloOptions {
  std::optional<double> alpha;  // half-width of U(−α, α); defaults to σ_1
  int samples = 100;
  double duration_s = 5.0;
  double rate_hz = 100.0;
  std::uint64_t seed = 0;
};

struct MonteCarloResult {
  double alpha = 0.0;
  MatX coefficients;  // samples × k
  std::vector<JointTrajectory> trajectories;
};

MonteCarloResult monte_carlo(const KinematicModel& model, const Synergy& synergy, const MonteCarloOptions& options);

// Per frame: v̂ = S Sᵀ N_t v_ext with N_t = I − J̄_t J_t evaluated at the
// projected configuration, integrated from the external trajectory's first
// configuration. No torso task means N_t = I.
JointTrajectory project_external(const KinematicModel& model, const JointTrajectory& external, const MatX& basis,
                                 const std::optional<TaskSpec>& torso_task = upper_torso_orientation());

// Velocity sum of two equally sampled trajectories, re-integrated from the
// first one's initial configuration.
JointTrajectory compose_whole_body(const KinematicModel& model, const JointTrajectory& projected,
                                   const JointTrajectory& torso);

}  // namespace synsculpt
