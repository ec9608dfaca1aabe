#include "synsculpt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "synsculpt/dynamics.hpp"

namespace synsculpt {

CoefficientSchedule CoefficientSchedule::constant(const VecX& values) {
  CoefficientSchedule s;
  for (Eigen::Index i = 0; i < values.size(); ++i) s.channels.push_back({CoeffMode::Constant, values[i], {}});
  return s;
}

CoefficientSchedule CoefficientSchedule::stored(int k) {
  CoefficientSchedule s;
  s.channels.assign(k, CoefficientChannel{CoeffMode::Stored, 0.0, {}});
  return s;
}

namespace {

double stored_value(const Synergy& synergy, int i, double t) {
  const MatX& a = synergy.coefficients;
  if (a.cols() == 0) throw ValidationError("synergy has no stored coefficient series");
  const double u = std::max(0.0, t * synergy.rate_hz);
  const auto last = static_cast<double>(a.cols() - 1);
  if (u >= last) return a(i, a.cols() - 1);
  const auto j = static_cast<Eigen::Index>(std::floor(u));
  const double f = u - static_cast<double>(j);
  return f == 0.0 ? a(i, j) : (1.0 - f) * a(i, j) + f * a(i, j + 1);
}

double curve_value(const std::vector<std::pair<double, double>>& knots, double t) {
  if (knots.empty()) throw ValidationError("coefficient curve has no knots");
  if (t <= knots.front().first) return knots.front().second;
  if (t >= knots.back().first) return knots.back().second;
  const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double x, const auto& knot) { return x < knot.first; });
  const auto lo = hi - 1;
  const double f = (t - lo->first) / (hi->first - lo->first);
  return (1.0 - f) * lo->second + f * hi->second;
}

int frame_count(double duration_s, double rate_hz) {
  return static_cast<int>(std::floor(duration_s * rate_hz + 1e-9)) + 1;
}

void check_request(const Synergy& synergy, const SynthesisRequest& request, double rate_hz) {
  if (!(request.duration_s > 0.0)) throw ValidationError("synthesis duration must be positive");
  if (!(rate_hz > 0.0)) throw ValidationError("synthesis rate must be positive");
  if (request.coefficients.size() != synergy.components())
    throw ValidationError("coefficient schedule has " + std::to_string(request.coefficients.size()) +
                          " channels, synergy has " + std::to_string(synergy.components()) + " components");
  for (const auto& ch : request.coefficients.channels) {
    if (ch.mode != CoeffMode::Curve) continue;
    if (ch.knots.empty()) throw ValidationError("coefficient curve has no knots");
    for (std::size_t i = 1; i < ch.knots.size(); ++i)
      if (!(ch.knots[i].first > ch.knots[i - 1].first))
        throw ValidationError("coefficient curve knots must have increasing times");
  }
}

MatX velocity_series(const Synergy& synergy, const CoefficientSchedule& schedule, int frames, double rate_hz) {
  MatX V(frames, synergy.basis.rows());
  for (int j = 0; j < frames; ++j) V.row(j) = (synergy.basis * schedule.evaluate(synergy, j / rate_hz)).transpose();
  return V;
}

}  // namespace

VecX CoefficientSchedule::evaluate(const Synergy& synergy, double t) const {
  VecX a(size());
  for (int i = 0; i < size(); ++i) {
    const auto& ch = channels[i];
    switch (ch.mode) {
      case CoeffMode::Constant: a[i] = ch.value; break;
      case CoeffMode::Stored: a[i] = stored_value(synergy, i, t); break;
      case CoeffMode::Curve: a[i] = curve_value(ch.knots, t); break;
    }
  }
  return a;
}

JointTrajectory reconstruct(const KinematicModel& model, const Synergy& synergy, const SynthesisRequest& request) {
  check_request(synergy, request, request.rate_hz);
  if (synergy.basis.rows() != model.nv())
    throw ModelMismatchError("synergy basis has " + std::to_string(synergy.basis.rows()) + " rows, model has " +
                             std::to_string(model.nv()) + " DoFs");
  const int frames = frame_count(request.duration_s, request.rate_hz);
  const MatX V = velocity_series(synergy, request.coefficients, frames, request.rate_hz);
  JointTrajectory out = trajectory_from_velocities(model, request.q0.value_or(synergy.q0), V, request.rate_hz,
                                                   TrajectorySource::Synthesized);
  out.label = synergy.source.empty() ? "synth" : synergy.source + "+synth";
  return out;
}

SequenceResult sequence(const KinematicModel& model, const SequencePlan& plan) {
  if (plan.steps.empty()) throw ValidationError("sequence plan has no steps");
  const double rate = plan.rate_hz;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    if (!step.synergy) throw ValidationError("sequence step " + std::to_string(i) + " has no synergy");
    if (step.synergy->basis.rows() != model.nv())
      throw ModelMismatchError("sequence step " + std::to_string(i) + " synergy does not match model");
    check_request(*step.synergy, step.request, rate);
    if (i > 0 && step.transition == Transition::LinearBlend) {
      const double limit = std::min(plan.steps[i - 1].request.duration_s, step.request.duration_s);
      if (!(step.blend_window_s > 0.0) || !(step.blend_window_s < limit))
        throw BlendWindowError("blend window " + std::to_string(step.blend_window_s) + " s at step " +
                               std::to_string(i) + " must be positive and shorter than " + std::to_string(limit) +
                               " s (adjacent step durations)");
    }
  }

  std::vector<int> counts, starts;
  int total = 0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const int n = frame_count(plan.steps[i].request.duration_s, rate);
    counts.push_back(n);
    starts.push_back(i == 0 ? 0 : total - 1);
    total = i == 0 ? n : total + n - 1;
  }

  // Each step owns its frames except the last, which is the next step's first.
  MatX V(total, model.nv());
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    const MatX part = velocity_series(*step.synergy, step.request.coefficients, counts[i], rate);
    const int owned = i + 1 < plan.steps.size() ? counts[i] - 1 : counts[i];
    V.middleRows(starts[i], owned) = part.topRows(owned);
  }

  for (std::size_t i = 1; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    if (step.transition != Transition::LinearBlend) continue;
    const auto& prev = plan.steps[i - 1];
    const double window = step.blend_window_s;
    const int seam = starts[i];
    const int half = static_cast<int>(std::ceil(0.5 * window * rate));
    for (int j = std::max(0, seam - half); j <= std::min(total - 1, seam + half); ++j) {
      const double offset = (j - seam) / rate;  // time relative to the seam
      if (std::abs(offset) >= 0.5 * window) continue;
      const double lambda = (offset + 0.5 * window) / window;
      const VecX before = prev.synergy->basis *
                          prev.request.coefficients.evaluate(*prev.synergy, (j - starts[i - 1]) / rate);
      const VecX after = step.synergy->basis * step.request.coefficients.evaluate(*step.synergy, offset);
      V.row(j) = ((1.0 - lambda) * before + lambda * after).transpose();
    }
  }

  const auto& first = plan.steps.front();
  SequenceResult result;
  result.trajectory = trajectory_from_velocities(model, first.request.q0.value_or(first.synergy->q0), V, rate,
                                                 TrajectorySource::Synthesized);
  result.trajectory.label = "sequence";
  result.seams.assign(starts.begin() + 1, starts.end());
  return result;
}

MonteCarloResult monte_carlo(const KinematicModel& model, const Synergy& synergy, const MonteCarloOptions& options) {
  const int k = synergy.components();
  if (k < 1) throw ValidationError("synergy has no components");
  const double alpha = options.alpha.value_or(synergy.sigma[0]);
  if (!(alpha > 0.0)) throw ValidationError("Monte Carlo alpha must be positive");
  if (options.samples < 1) throw ValidationError("Monte Carlo sample count must be at least 1");

  // Open interval (−α, α) from 53-bit draws; avoids implementation-defined
  // std::uniform_real_distribution so seeds reproduce across toolchains.
  std::mt19937_64 rng(options.seed);
  const auto draw = [&]() {
    for (;;) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u > 0.0) return -alpha + 2.0 * alpha * u;
    }
  };

  MonteCarloResult result;
  result.alpha = alpha;
  result.coefficients.resize(options.samples, k);
  result.trajectories.reserve(options.samples);
  for (int n = 0; n < options.samples; ++n) {
    VecX a(k);
    for (int i = 0; i < k; ++i) a[i] = draw();
    result.coefficients.row(n) = a.transpose();
    SynthesisRequest request{CoefficientSchedule::constant(a), options.duration_s, options.rate_hz, std::nullopt};
    JointTrajectory traj = reconstruct(model, synergy, request);
    traj.label = "mc" + std::to_string(n);
    result.trajectories.push_back(std::move(traj));
  }
  return result;
}

JointTrajectory project_external(const KinematicModel& model, const JointTrajectory& external, const MatX& basis,
                                 const std::optional<TaskSpec>& torso_task) {
  validate(external, model);
  if (basis.rows() != model.nv())
    throw ModelMismatchError("basis has " + std::to_string(basis.rows()) + " rows, model has " +
                             std::to_string(model.nv()) + " DoFs");
  if (torso_task) model.resolve_frame(torso_task->frame);

  const MatX projector = basis * basis.transpose();
  const int frames = external.frames();
  const double dt = external.dt();
  MatX V(frames, model.nv());
  MatX P(frames, model.nq());
  VecX q = external.q(0);
  for (int j = 0; j < frames; ++j) {
    P.row(j) = q.transpose();
    VecX v = external.v(j);
    if (torso_task) {
      const MatX J = task_jacobian(model, q, *torso_task);
      TaskInverse inv;
      try {
        inv = dyn_consistent_inverse(mass_matrix(model, q), J);
      } catch (const RankDeficiencyError& e) {
        throw RankDeficiencyError(std::string(e.what()) + " at frame " + std::to_string(j));
      }
      v = nullspace(J, inv.jbar) * v;
    }
    v = projector * v;
    V.row(j) = v.transpose();
    if (j + 1 < frames) q = integrate(model, q, v, dt);
  }

  JointTrajectory out = external;
  out.positions = std::move(P);
  out.velocities = std::move(V);
  out.source = TrajectorySource::Synthesized;
  out.label = external.label + "+projected";
  return out;
}

JointTrajectory compose_whole_body(const KinematicModel& model, const JointTrajectory& projected,
                                   const JointTrajectory& torso) {
  validate(projected, model);
  validate(torso, model);
  if (projected.frames() != torso.frames())
    throw ValidationError("length mismatch: " + std::to_string(projected.frames()) + " vs " +
                          std::to_string(torso.frames()) + " frames");
  if (std::abs(projected.rate_hz - torso.rate_hz) > 1e-12 * projected.rate_hz)
    throw ValidationError("rate mismatch: " + std::to_string(projected.rate_hz) + " vs " + std::to_string(torso.rate_hz) +
                          " Hz");
  JointTrajectory out = trajectory_from_velocities(model, projected.q(0), projected.velocities + torso.velocities,
                                                   projected.rate_hz, TrajectorySource::Synthesized);
  out.t0 = projected.t0;
  out.style = projected.style;
  out.label = projected.label + "+torso";
  return out;
}

}  // namespace synsculpt
