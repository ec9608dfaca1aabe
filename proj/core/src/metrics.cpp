#include "synsculpt/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "synsculpt/dynamics.hpp"
#include "synsculpt/kinematics.hpp"

namespace synsculpt {

Energetics energetics(const JointTrajectory& traj, const KinematicModel& model, double eval_rate_hz) {
  const JointTrajectory r = resample(traj, model, eval_rate_hz);
  Energetics e;
  const int frames = r.frames();
  if (frames < 2) return e;
  VecX p_prev = momentum(model, r.q(0), r.v(0));
  double ke_prev = 0.5 * r.v(0).dot(p_prev);
  double sum_dp = 0.0, sum_dke = 0.0;
  for (int k = 1; k < frames; ++k) {
    const VecX v = r.v(k);
    VecX p = momentum(model, r.q(k), v);
    const double ke = 0.5 * v.dot(p);
    sum_dp += (p - p_prev).norm();
    sum_dke += std::abs(ke - ke_prev);
    p_prev = std::move(p);
    ke_prev = ke;
  }
  e.mean_dp = sum_dp / (frames - 1);
  e.mean_dke = sum_dke / (frames - 1);
  return e;
}

Power mechanical_power(const JointTrajectory& traj, const KinematicModel& model) {
  validate(traj, model);
  if (traj.frames() < 3) throw ValidationError("mechanical power needs at least 3 frames");
  const MatX acc = differentiate_signal(traj.velocities, traj.rate_hz);
  const int first = model.base_dofs();
  double total = 0.0;
  for (int k = 0; k < traj.frames(); ++k) {
    const VecX v = traj.v(k);
    const VecX tau = inverse_dynamics(model, traj.q(k), v, acc.row(k).transpose());
    total += (tau.tail(model.nv() - first).array() * v.tail(model.nv() - first).array()).abs().sum();
  }
  Power p;
  p.mean_w = total / traj.frames();
  p.w_per_kg = p.mean_w / model.total_mass();
  return p;
}

double foot_sliding_ratio(const JointTrajectory& traj, const KinematicModel& model, const FootSlideOptions& options) {
  validate(traj, model);
  std::vector<TaskSpec> feet;
  for (const auto& name : options.feet) {
    model.resolve_frame(name);
    feet.push_back(TaskSpec{name, TaskKind::Position3, Vec3::Zero()});
  }
  long contact = 0, sliding = 0;
  for (int k = 0; k < traj.frames(); ++k) {
    const VecX q = traj.q(k);
    const VecX v = traj.v(k);
    for (const auto& foot : feet) {
      if (task_point(model, q, foot).z() >= options.h_contact) continue;
      ++contact;
      const Vec3 vel = task_jacobian(model, q, foot) * v;
      if (vel.head<2>().norm() > options.v_slide) ++sliding;
    }
  }
  return contact == 0 ? 0.0 : static_cast<double>(sliding) / static_cast<double>(contact);
}

MetricsReport evaluate(const JointTrajectory& traj, const KinematicModel& model, const MetricsOptions& options) {
  MetricsReport r;
  r.label = traj.label;
  r.rate_hz = options.eval_rate_hz;
  const Energetics e = energetics(traj, model, options.eval_rate_hz);
  r.mean_dp = e.mean_dp;
  r.mean_dke = e.mean_dke;
  if (traj.frames() >= 3) {
    const Power p = mechanical_power(traj, model);
    r.mean_power_w = p.mean_w;
    r.power_w_per_kg = p.w_per_kg;
  }
  FootSlideOptions feet;
  if (options.foot_slide) {
    feet = *options.foot_slide;
  } else {
    std::erase_if(feet.feet, [&](const std::string& f) { return !model.find_frame(f) && !model.find_body(f); });
  }
  r.foot_slide_ratio = feet.feet.empty() ? 0.0 : foot_sliding_ratio(traj, model, feet);
  return r;
}

std::string reports_to_csv(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << "label,mean_dP,mean_dKE_J,mean_power_W,power_W_per_kg,foot_slide_ratio,rate_hz\n" << std::setprecision(10);
  for (const auto& r : reports)
    out << r.label << ',' << r.mean_dp << ',' << r.mean_dke << ',' << r.mean_power_w << ',' << r.power_w_per_kg << ','
        << r.foot_slide_ratio << ',' << r.rate_hz << '\n';
  return out.str();
}

namespace {

std::optional<double> ratio(double value, double baseline) {
  if (baseline == 0.0) return std::nullopt;
  return value / baseline;
}

}  // namespace

Comparison compare(std::span<const MetricsReport> reports, std::size_t baseline) {
  if (reports.empty()) return {};
  if (baseline >= reports.size()) throw ValidationError("baseline index out of range");
  const MetricsReport& b = reports[baseline];
  Comparison c;
  c.baseline = b.label;
  for (const auto& r : reports) {
    c.rows.push_back(ComparisonRow{r.label, r, ratio(r.mean_dp, b.mean_dp), ratio(r.mean_dke, b.mean_dke),
                                   ratio(r.mean_power_w, b.mean_power_w),
                                   ratio(r.foot_slide_ratio, b.foot_slide_ratio)});
  }
  return c;
}

std::string comparison_to_csv(const Comparison& comparison) {
  std::ostringstream out;
  out << "label,mean_dP,mean_dKE_J,mean_power_W,power_W_per_kg,foot_slide_ratio,rate_hz,"
         "ratio_dP,ratio_dKE,ratio_power,ratio_foot_slide\n"
      << std::setprecision(10);
  const auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    std::ostringstream s;
    s << std::setprecision(10) << *v;
    return s.str();
  };
  for (const auto& row : comparison.rows) {
    const MetricsReport& r = row.report;
    out << r.label << ',' << r.mean_dp << ',' << r.mean_dke << ',' << r.mean_power_w << ',' << r.power_w_per_kg << ','
        << r.foot_slide_ratio << ',' << r.rate_hz << ',' << cell(row.dp_ratio) << ',' << cell(row.dke_ratio) << ','
        << cell(row.power_ratio) << ',' << cell(row.slide_ratio) << '\n';
  }
  return out.str();
}

}  // namespace synsculpt
