#include "synsculpt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace synsculpt {

std::string_view to_string(TrajectorySource source) {
  switch (source) {
    case TrajectorySource::Mocap: return "mocap";
    case TrajectorySource::Synthesized: return "synthesized";
    case TrajectorySource::External: return "external";
  }
  return "external";
}

std::optional<TrajectorySource> parse_source(std::string_view text) {
  if (text == "mocap") return TrajectorySource::Mocap;
  if (text == "synthesized") return TrajectorySource::Synthesized;
  if (text == "external") return TrajectorySource::External;
  return std::nullopt;
}

std::vector<double> JointTrajectory::timestamps() const {
  std::vector<double> t(frames());
  for (int k = 0; k < frames(); ++k) t[k] = time(k);
  return t;
}

void validate(const JointTrajectory& traj, const KinematicModel& model) {
  if (!(traj.rate_hz > 0.0) || !std::isfinite(traj.rate_hz)) throw ValidationError("sample rate must be positive");
  if (traj.frames() < 2) throw ValidationError("trajectory needs at least 2 frames");
  if (traj.positions.cols() != model.nq())
    throw ValidationError("dimension mismatch: positions have " + std::to_string(traj.positions.cols()) +
                          " columns, model '" + model.name() + "' expects " + std::to_string(model.nq()));
  if (traj.velocities.rows() != traj.positions.rows() || traj.velocities.cols() != model.nv())
    throw ValidationError("dimension mismatch: velocities must be " + std::to_string(traj.frames()) + "x" +
                          std::to_string(model.nv()));
  if (!traj.positions.allFinite() || !traj.velocities.allFinite())
    throw ValidationError("trajectory contains NaN or infinite values");
  if (!traj.model.empty() && traj.model != model.name())
    throw ModelMismatchError("trajectory references model '" + traj.model + "', loaded model is '" + model.name() + "'");
  if (model.floating_base()) {
    for (int k = 0; k < traj.frames(); ++k)
      if (std::abs(traj.positions.row(k).segment<4>(3).norm() - 1.0) > 1e-6)
        throw ValidationError("base quaternion not unit norm at frame " + std::to_string(k));
  }
}

std::vector<std::string> csv_columns(const KinematicModel& model, bool with_velocities) {
  std::vector<std::string> cols{"t"};
  const int joints = model.nv() - model.base_dofs();
  if (model.floating_base())
    for (const char* c : {"base_px", "base_py", "base_pz", "base_qw", "base_qx", "base_qy", "base_qz"}) cols.emplace_back(c);
  for (int j = 0; j < joints; ++j) cols.push_back("joint_" + std::to_string(j));
  if (with_velocities) {
    if (model.floating_base())
      for (const char* c : {"v_base_wx", "v_base_wy", "v_base_wz", "v_base_vx", "v_base_vy", "v_base_vz"})
        cols.emplace_back(c);
    for (int j = 0; j < joints; ++j) cols.push_back("v_joint_" + std::to_string(j));
  }
  return cols;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, int row) {
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    throw ValidationError("row " + std::to_string(row) + ": '" + cell + "' is not a number");
  if (std::isnan(value)) throw ValidationError("NaN value at row " + std::to_string(row));
  if (!std::isfinite(value)) throw ValidationError("infinite value at row " + std::to_string(row));
  return value;
}

Sidecar read_sidecar(const std::filesystem::path& path) {
  Sidecar sc;
  std::ifstream in(path);
  if (!in) return sc;
  try {
    const auto j = nlohmann::json::parse(in);
    sc.model = j.value("model", std::string());
    if (j.contains("rate_hz") && !j.at("rate_hz").is_null()) sc.rate_hz = j.at("rate_hz").get<double>();
    sc.style = j.value("style", std::string());
    if (j.contains("source") && j.at("source").is_string()) {
      sc.source = parse_source(j.at("source").get<std::string>());
      if (!sc.source) throw ValidationError("sidecar: unknown source '" + j.at("source").get<std::string>() + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("sidecar '" + path.string() + "': " + e.what());
  }
  return sc;
}

MatX two_frame_velocities(const KinematicModel& model, const MatX& positions, double rate_hz) {
  MatX v(positions.rows(), model.nv());
  if (positions.rows() == 1) return MatX::Zero(1, model.nv());
  const VecX d = difference(model, positions.row(0).transpose(), positions.row(1).transpose()) * rate_hz;
  v.row(0) = d.transpose();
  v.row(1) = d.transpose();
  return v;
}

}  // namespace

JointTrajectory read_trajectory_csv(std::istream& in, const KinematicModel& model, const Sidecar& sidecar,
                                    const LoadOptions& options) {
  if (!sidecar.model.empty() && sidecar.model != model.name())
    throw ModelMismatchError("trajectory references model '" + sidecar.model + "', loaded model is '" +
                             model.name() + "'");

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trajectory file is empty");
  const auto header = split(line);
  const auto pos_cols = csv_columns(model, false);
  const auto all_cols = csv_columns(model, true);
  bool with_vel = false;
  if (header == all_cols) {
    with_vel = true;
  } else if (header != pos_cols) {
    throw ValidationError("dimension mismatch: header has " + std::to_string(header.size()) + " columns, model '" +
                          model.name() + "' expects " + std::to_string(pos_cols.size()) + " or " +
                          std::to_string(all_cols.size()) + " (" + pos_cols.front() + "," + pos_cols[1] + ",...)");
  }

  std::vector<double> t;
  std::vector<std::vector<double>> rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ValidationError("dimension mismatch at row " + std::to_string(row) + ": " + std::to_string(cells.size()) +
                            " values, expected " + std::to_string(header.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) values[c] = parse_number(cells[c], row);
    t.push_back(values[0]);
    rows.push_back(std::move(values));
  }
  const int frames = static_cast<int>(rows.size());
  if (frames < 2) throw ValidationError("trajectory needs at least 2 frames, found " + std::to_string(frames));

  for (int k = 1; k < frames; ++k)
    if (!(t[k] > t[k - 1])) throw ValidationError("timestamps not strictly increasing at row " + std::to_string(k + 2));
  const double dt = sidecar.rate_hz ? 1.0 / *sidecar.rate_hz : (t.back() - t.front()) / (frames - 1);
  for (int k = 1; k < frames; ++k)
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-9)
      throw ValidationError("non-uniform sampling at row " + std::to_string(k + 2) + " (dt " +
                            std::to_string(t[k] - t[k - 1]) + " vs " + std::to_string(dt) + ")");

  MatX positions(frames, model.nq());
  std::optional<MatX> velocities;
  if (with_vel) velocities = MatX(frames, model.nv());
  for (int k = 0; k < frames; ++k) {
    for (int c = 0; c < model.nq(); ++c) positions(k, c) = rows[k][1 + c];
    if (with_vel)
      for (int c = 0; c < model.nv(); ++c) (*velocities)(k, c) = rows[k][1 + model.nq() + c];
  }
  JointTrajectory traj = assemble_trajectory(model, std::move(positions), std::move(velocities),
                                             sidecar.rate_hz ? *sidecar.rate_hz : 1.0 / dt, t.front(), options);
  traj.style = sidecar.style;
  traj.source = sidecar.source;
  return traj;
}

JointTrajectory assemble_trajectory(const KinematicModel& model, MatX positions, std::optional<MatX> velocities,
                                    double rate_hz, double t0, const LoadOptions& options) {
  JointTrajectory traj;
  traj.model = model.name();
  traj.rate_hz = rate_hz;
  traj.t0 = t0;
  traj.positions = std::move(positions);
  const int frames = traj.frames();
  if (traj.positions.cols() != model.nq())
    throw ValidationError("dimension mismatch: positions have " + std::to_string(traj.positions.cols()) +
                          " columns, model '" + model.name() + "' has nq=" + std::to_string(model.nq()));
  if (frames < 2) throw ValidationError("trajectory needs at least 2 frames, found " + std::to_string(frames));
  if (!traj.positions.allFinite()) throw ValidationError("trajectory contains NaN or infinite values");

  if (model.floating_base()) {
    for (int k = 0; k < frames; ++k) {
      auto quat = traj.positions.row(k).segment<4>(3);
      const double n = quat.norm();
      if (std::abs(n - 1.0) > 1e-3)
        throw ValidationError("base quaternion norm " + std::to_string(n) + " at row " + std::to_string(k + 2) +
                              " is too far from 1");
      quat /= n;
    }
  }

  if (velocities) {
    traj.velocities = std::move(*velocities);
  } else {
    if (!(rate_hz > 0.0)) throw ValidationError("sample rate must be positive");
    traj.velocities = frames >= 3 ? differentiate(model, traj.positions, rate_hz)
                                  : two_frame_velocities(model, traj.positions, rate_hz);
  }
  if (options.lowpass_cutoff_hz) traj.velocities = lowpass(traj.velocities, traj.rate_hz, *options.lowpass_cutoff_hz);

  validate(traj, model);
  return traj;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  return p.replace_extension(".json");
}

JointTrajectory load_trajectory(const std::filesystem::path& csv_path, const KinematicModel& model,
                                const LoadOptions& options) {
  std::ifstream in(csv_path);
  if (!in) throw ValidationError("file not found: '" + csv_path.string() + "'");
  JointTrajectory traj = read_trajectory_csv(in, model, read_sidecar(sidecar_path(csv_path)), options);
  traj.label = csv_path.stem().string();
  return traj;
}

void write_trajectory_csv(std::ostream& out, const JointTrajectory& traj, const KinematicModel& model) {
  validate(traj, model);
  const auto cols = csv_columns(model, true);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  out << std::setprecision(17);
  for (int k = 0; k < traj.frames(); ++k) {
    out << traj.time(k);
    for (int c = 0; c < model.nq(); ++c) out << ',' << traj.positions(k, c);
    for (int c = 0; c < model.nv(); ++c) out << ',' << traj.velocities(k, c);
    out << '\n';
  }
}

void save_trajectory(const JointTrajectory& traj, const KinematicModel& model, const std::filesystem::path& csv_path) {
  {
    std::ofstream out(csv_path);
    if (!out) throw ValidationError("cannot write '" + csv_path.string() + "'");
    write_trajectory_csv(out, traj, model);
  }
  nlohmann::json sc;
  sc["model"] = model.name();
  sc["rate_hz"] = traj.rate_hz;
  sc["style"] = traj.style;
  sc["source"] = traj.source ? nlohmann::json(std::string(to_string(*traj.source))) : nlohmann::json();
  std::ofstream out(sidecar_path(csv_path));
  out << sc.dump(2) << '\n';
}

MatX differentiate(const KinematicModel& model, const MatX& positions, double rate_hz) {
  const Eigen::Index frames = positions.rows();
  if (frames < 3) throw ValidationError("differentiate needs at least 3 frames, got " + std::to_string(frames));
  const auto row = [&](Eigen::Index k) -> VecX { return positions.row(k).transpose(); };
  const auto d = [&](Eigen::Index a, Eigen::Index b) { return difference(model, row(a), row(b)); };

  MatX v(frames, model.nv());
  const double half_rate = 0.5 * rate_hz;
  v.row(0) = ((4.0 * d(0, 1) - d(0, 2)) * half_rate).transpose();
  for (Eigen::Index k = 1; k + 1 < frames; ++k) v.row(k) = (d(k - 1, k + 1) * half_rate).transpose();
  const Eigen::Index e = frames - 1;
  v.row(e) = ((d(e, e - 2) - 4.0 * d(e, e - 1)) * half_rate).transpose();
  return v;
}

MatX differentiate_signal(const MatX& x, double rate_hz) {
  const Eigen::Index frames = x.rows();
  if (frames < 3) throw ValidationError("differentiate needs at least 3 frames, got " + std::to_string(frames));
  MatX d(frames, x.cols());
  const double half_rate = 0.5 * rate_hz;
  d.row(0) = (-3.0 * x.row(0) + 4.0 * x.row(1) - x.row(2)) * half_rate;
  for (Eigen::Index k = 1; k + 1 < frames; ++k) d.row(k) = (x.row(k + 1) - x.row(k - 1)) * half_rate;
  const Eigen::Index e = frames - 1;
  d.row(e) = (3.0 * x.row(e) - 4.0 * x.row(e - 1) + x.row(e - 2)) * half_rate;
  return d;
}

MatX lowpass(const MatX& x, double rate_hz, double cutoff_hz) {
  if (!(cutoff_hz > 0.0)) throw ValidationError("low-pass cutoff must be positive");
  const double dt = 1.0 / rate_hz;
  const double rc = 1.0 / (2.0 * M_PI * cutoff_hz);
  const double alpha = dt / (rc + dt);
  MatX y = x;
  for (Eigen::Index k = 1; k < y.rows(); ++k) y.row(k) = y.row(k - 1) + alpha * (x.row(k) - y.row(k - 1));
  for (Eigen::Index k = y.rows() - 1; k-- > 0;) y.row(k) = y.row(k + 1) + alpha * (y.row(k) - y.row(k + 1));
  return y;
}

JointTrajectory resample(const JointTrajectory& traj, const KinematicModel& model, double new_rate_hz) {
  if (!(new_rate_hz > 0.0)) throw ValidationError("resample rate must be positive");
  validate(traj, model);
  if (std::abs(new_rate_hz - traj.rate_hz) <= 1e-12 * traj.rate_hz) return traj;

  const int src_frames = traj.frames();
  const int frames = static_cast<int>(std::floor(traj.duration() * new_rate_hz + 1e-9)) + 1;
  JointTrajectory out = traj;
  out.rate_hz = new_rate_hz;
  out.positions.resize(frames, model.nq());

  for (int k = 0; k < frames; ++k) {
    const double u = k * traj.rate_hz / new_rate_hz;
    int i = static_cast<int>(std::floor(u + 1e-9));
    double f = u - i;
    if (i >= src_frames - 1) {
      i = src_frames - 1;
      f = 0.0;
    }
    f = std::clamp(f, 0.0, 1.0);
    if (f < 1e-12) {
      out.positions.row(k) = traj.positions.row(i);
      continue;
    }
    out.positions.row(k) = (1.0 - f) * traj.positions.row(i) + f * traj.positions.row(i + 1);
    if (model.floating_base()) {
      const Eigen::Quaterniond a(traj.positions(i, 3), traj.positions(i, 4), traj.positions(i, 5), traj.positions(i, 6));
      const Eigen::Quaterniond b(traj.positions(i + 1, 3), traj.positions(i + 1, 4), traj.positions(i + 1, 5),
                                 traj.positions(i + 1, 6));
      const Eigen::Quaterniond s = a.slerp(f, b).normalized();
      out.positions.row(k).segment<4>(3) << s.w(), s.x(), s.y(), s.z();
    }
  }
  out.velocities = frames >= 3 ? differentiate(model, out.positions, new_rate_hz)
                               : two_frame_velocities(model, out.positions, new_rate_hz);
  return out;
}

JointTrajectory trajectory_from_velocities(const KinematicModel& model, const VecX& q0, const MatX& velocities,
                                           double rate_hz, std::optional<TrajectorySource> source) {
  check_configuration(model, q0, 1e-6);
  if (velocities.cols() != model.nv())
    throw ValidationError("dimension mismatch: velocities have " + std::to_string(velocities.cols()) + " columns");
  JointTrajectory traj;
  traj.model = model.name();
  traj.rate_hz = rate_hz;
  traj.positions = integrate_path(model, q0, velocities, 1.0 / rate_hz);
  traj.velocities = velocities;
  traj.source = source;
  return traj;
}

}  // namespace synsculpt
