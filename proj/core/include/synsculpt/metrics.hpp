#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synsculpt/model.hpp"
#include "synsculpt/trajectory.hpp"

namespace synsculpt {

struct Energetics {
  double mean_dp = 0.0;   // mean ‖p(t_k) − p(t_{k−1})‖
  double mean_dke = 0.0;  // mean |KE(t_k) − KE(t_{k−1})|, J
};

// Resamples to eval_rate_hz (no-op when already there) and averages the
// per-step momentum and kinetic-energy changes.
Energetics energetics(const JointTrajectory& traj, const KinematicModel& model, double eval_rate_hz = 1000.0);

struct Power {
  double mean_w = 0.0;
  double w_per_kg = 0.0;  // mean_w / total model mass
};

// Mean over frames of Σ_i |τ_i v_i| over actuated joints, with τ from inverse
// dynamics and accelerations from finite differences of the velocities. The
// floating base is unactuated and excluded.
Power mechanical_power(const JointTrajectory& traj, const KinematicModel& model);

struct FootSlideOptions {
  std::vector<std::string> feet{"left_foot", "right_foot"};
  double h_contact = 0.02;  // m, contact when frame height below this
  double v_slide = 0.05;    // m/s, sliding when horizontal speed above this
};

// Sliding contact frames / contact frames, pooled over feet; 0 without contact.
double foot_sliding_ratio(const JointTrajectory& traj, const KinematicModel& model, const FootSlideOptions& options = {});

struct MetricsReport {
  std::string label;
  double mean_dp = 0.0;
  double mean_dke = 0.0;
  double mean_power_w = 0.0;
  double power_w_per_kg = 0.0;
  double foot_slide_ratio = 0.0;
  double rate_hz = 1000.0;
};

struct MetricsOptions {
  double eval_rate_hz = 1000.0;
  // Foot frames default to left_foot/right_foot when the model has them.
  std::optional<FootSlideOptions> foot_slide;
};

MetricsReport evaluate(const JointTrajectory& traj, const KinematicModel& model, const MetricsOptions& options = {});

// label,mean_dP,mean_dKE_J,mean_power_W,power_W_per_kg,foot_slide_ratio,rate_hz
std::string reports_to_csv(std::span<const MetricsReport> reports);

struct ComparisonRow {
  std::string label;
  MetricsReport report;
  // value / baseline value; nullopt when the baseline value is zero.
  std::optional<double> dp_ratio, dke_ratio, power_ratio, slide_ratio;
};

struct Comparison {
  std::string baseline;
  std::vector<ComparisonRow> rows;
};

Comparison compare(std::span<const MetricsReport> reports, std::size_t baseline = 0);

// Report columns plus ratio_* columns; a zero baseline prints "NA".
std::string comparison_to_csv(const Comparison& comparison);

}  // namespace synsculpt
