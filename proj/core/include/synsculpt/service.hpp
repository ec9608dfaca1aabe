#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "synsculpt/model.hpp"
#include "synsculpt/synergy.hpp"
#include "synsculpt/synth.hpp"

namespace synsculpt {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// Resolves a plan step's library reference (an id for the service, a file
// path for the CLI) and optional version to an immutable snapshot.
using LibraryResolver =
    std::function<std::shared_ptr<const SynergyLibrary>(const std::string& library, std::optional<int> version)>;

// {rate_hz, steps:[{library, version?, label, coeffs:{mode, values}, duration_s,
//   transition:{kind: "none"|"linear_blend", window_s}}]}
SequencePlan parse_sequence_plan(std::string_view json_text, const LibraryResolver& resolve);

// {mode: "const", values: [k]} | {mode: "const"} (time-mean of the stored
// series) | {mode: "stored"} | {mode: "curve", values: [[[t, a], ...] × k]}
CoefficientSchedule parse_coefficients(std::string_view json_text, const Synergy& synergy);

// Trajectory as JSON. With `with_frames`, adds a per-sample "frames" array
// holding t, q, v and the world position of every body (for thin clients).
std::string trajectory_to_json(const JointTrajectory& traj, const KinematicModel& model, bool with_frames = false);
// {rate_hz, t0?, label?, style?, source?, positions: [[nq]...], velocities?: [[nv]...]}
JointTrajectory trajectory_from_json(std::string_view json_text, const KinematicModel& model);

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Request router behind the HTTP server. One model per instance; libraries
// are versioned immutable snapshots, trajectories are cached by id. Safe to
// call concurrently.
class Service {
 public:
  // Libraries found as *.json in `library_dir` are loaded at start-up
  // (id = file stem); uploads and builds are written back there.
  explicit Service(KinematicModel model, std::optional<std::filesystem::path> library_dir = std::nullopt);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(std::string_view method, std::string_view target, std::string_view body);

  const KinematicModel& model() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct ServeOptions {
  std::string host = "0.0.0.0";
  int port = 8080;           // 0 picks a free port
  std::string cors_origin;   // empty: no CORS headers
};

// Thin cpp-httplib front end for a Service.
class HttpServer {
 public:
  HttpServer(Service& service, ServeOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds the socket; returns the bound port.
  int bind();
  // Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synsculpt
