#pragma once

#include "synsculpt/model.hpp"

namespace synsculpt {

// Joint-space mass matrix A(q) by the composite-rigid-body algorithm.
MatX mass_matrix(const KinematicModel& model, const VecX& q);

// Coriolis/centrifugal term b(q, v): recursive Newton-Euler with zero
// acceleration and gravity switched off.
VecX bias_forces(const KinematicModel& model, const VecX& q, const VecX& v);

// Gravity term g(q): recursive Newton-Euler at rest under the model gravity.
VecX gravity_vector(const KinematicModel& model, const VecX& q);

// Γ = A a + b + g, evaluated directly by recursive Newton-Euler.
VecX inverse_dynamics(const KinematicModel& model, const VecX& q, const VecX& v, const VecX& a);

// p = A v.
VecX momentum(const KinematicModel& model, const VecX& q, const VecX& v);
double kinetic_energy(const KinematicModel& model, const VecX& q, const VecX& v);

struct TaskInverse {
  MatX lambda;  // task-space inertia (J A⁻¹ Jᵀ)⁻¹, m×m
  MatX jbar;    // dynamically consistent inverse A⁻¹ Jᵀ Λ, n×m
};

// Relative singular-value threshold below which a task Jacobian is treated as
// rank deficient.
inline constexpr double kRankTolerance = 1e-8;

// Throws RankDeficiencyError when σ_min(J) < kRankTolerance·σ_max(J). A task
// with zero rows yields empty Λ and J̄.
TaskInverse dyn_consistent_inverse(const MatX& A, const MatX& J);

// N = I − J̄ J.
MatX nullspace(const MatX& J, const MatX& jbar);

}  // namespace synsculpt
