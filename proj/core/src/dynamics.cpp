#include "synsculpt/dynamics.hpp"

#include "spatial.hpp"

namespace synsculpt {

using detail::TreeState;

MatX mass_matrix(const KinematicModel& model, const VecX& q) {
  const TreeState st = detail::compute_tree(model, q);
  const auto& bodies = model.bodies();

  std::vector<Mat6> composite = st.inertia;
  for (std::size_t i = bodies.size(); i-- > 1;) composite[bodies[i].parent] += composite[i];

  MatX A = MatX::Zero(model.nv(), model.nv());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Body& b = bodies[i];
    if (b.dofs() == 0) continue;
    const MatX F = composite[i] * st.S[i];
    A.block(b.v_index, b.v_index, b.dofs(), b.dofs()) = st.S[i].transpose() * F;
    for (int j = b.parent; j >= 0; j = bodies[j].parent) {
      const Body& a = bodies[j];
      if (a.dofs() == 0) continue;
      const MatX block = st.S[j].transpose() * F;
      A.block(a.v_index, b.v_index, a.dofs(), b.dofs()) = block;
      A.block(b.v_index, a.v_index, b.dofs(), a.dofs()) = block.transpose();
    }
  }
  return A;
}

namespace {

VecX rnea(const KinematicModel& model, const VecX& q, const VecX& v, const VecX& a, bool with_gravity) {
  check_velocity(model, v);
  check_velocity(model, a);
  const TreeState st = detail::compute_tree(model, q);
  const auto& bodies = model.bodies();
  const std::size_t n = bodies.size();

  std::vector<Vec6> vel(n), acc(n), force(n);
  Vec6 gravity_acc = Vec6::Zero();
  if (with_gravity) gravity_acc.tail<3>() = -model.gravity();

  for (std::size_t i = 0; i < n; ++i) {
    const Body& b = bodies[i];
    const int d = b.dofs();
    const VecX qd = v.segment(b.v_index, d);
    const VecX qdd = a.segment(b.v_index, d);
    if (b.parent < 0) {
      vel[i] = st.S[i] * qd;
      acc[i] = st.S[i] * qdd + gravity_acc;
      if (b.joint == JointType::Free6) {
        // Derivative of the base subspace: only p moves, giving (0, ṗ × ω).
        acc[i].tail<3>() += qd.tail<3>().cross(qd.head<3>());
      }
    } else {
      const Vec6 joint_vel = st.S[i] * qd;
      vel[i] = vel[b.parent] + joint_vel;
      acc[i] = acc[b.parent] + st.S[i] * qdd + detail::cross_motion(vel[i], joint_vel);
    }
    force[i] = st.inertia[i] * acc[i] + detail::cross_force(vel[i], st.inertia[i] * vel[i]);
  }

  VecX tau = VecX::Zero(model.nv());
  for (std::size_t i = n; i-- > 0;) {
    const Body& b = bodies[i];
    if (b.dofs() > 0) tau.segment(b.v_index, b.dofs()) = st.S[i].transpose() * force[i];
    if (b.parent >= 0) force[b.parent] += force[i];
  }
  return tau;
}

}  // namespace

VecX bias_forces(const KinematicModel& model, const VecX& q, const VecX& v) {
  return rnea(model, q, v, VecX::Zero(model.nv()), false);
}

VecX gravity_vector(const KinematicModel& model, const VecX& q) {
  const VecX zero = VecX::Zero(model.nv());
  return rnea(model, q, zero, zero, true);
}

VecX inverse_dynamics(const KinematicModel& model, const VecX& q, const VecX& v, const VecX& a) {
  return rnea(model, q, v, a, true);
}

VecX momentum(const KinematicModel& model, const VecX& q, const VecX& v) {
  check_velocity(model, v);
  return mass_matrix(model, q) * v;
}

double kinetic_energy(const KinematicModel& model, const VecX& q, const VecX& v) {
  return 0.5 * v.dot(momentum(model, q, v));
}

TaskInverse dyn_consistent_inverse(const MatX& A, const MatX& J) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || J.cols() != n)
    throw ValidationError("dimension mismatch: A is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                          ", J has " + std::to_string(J.cols()) + " columns");
  const Eigen::Index m = J.rows();
  if (m == 0) return TaskInverse{MatX(0, 0), MatX(n, 0)};
  if (m > n) throw RankDeficiencyError("rank-deficient task Jacobian: more rows than DoFs");

  const Eigen::JacobiSVD<MatX> svd(J);
  const auto& sv = svd.singularValues();
  if (!(sv.maxCoeff() > 0.0) || sv.minCoeff() < kRankTolerance * sv.maxCoeff())
    throw RankDeficiencyError("rank-deficient task Jacobian (sigma_min/sigma_max = " +
                              std::to_string(sv.maxCoeff() > 0 ? sv.minCoeff() / sv.maxCoeff() : 0.0) + ")");

  const Eigen::LLT<MatX> A_llt(A);
  if (A_llt.info() != Eigen::Success) throw ValidationError("mass matrix is not positive definite");
  const MatX Ainv_Jt = A_llt.solve(J.transpose());
  const MatX inv_lambda = J * Ainv_Jt;
  MatX lambda = inv_lambda.llt().solve(MatX::Identity(m, m));
  lambda = 0.5 * (lambda + lambda.transpose()).eval();
  return TaskInverse{lambda, Ainv_Jt * lambda};
}

MatX nullspace(const MatX& J, const MatX& jbar) {
  const Eigen::Index n = J.cols();
  if (J.rows() == 0) return MatX::Identity(n, n);
  return MatX::Identity(n, n) - jbar * J;
}

}  // namespace synsculpt
