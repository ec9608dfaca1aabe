#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synsculpt/model.hpp"
#include "synsculpt/segmenter.hpp"
#include "synsculpt/trajectory.hpp"

namespace synsculpt {

// A reference pose plus an orthonormal joint-velocity basis for one segment.
struct Synergy {
  VecX q0;                 // first configuration of the segment
  MatX basis;              // nv × k, orthonormal columns, largest-|entry| positive
  VecX sigma;              // k singular values, descending
  VecX variance_fraction;  // σ_i² / Σ_j σ_j² over all nv components
  double total_variance = 0.0;
  MatX coefficients;       // k × T_seg, a_i(t) = basis_iᵀ v(t); may be empty
  double duration_s = 0.0; // (T_seg − 1) / rate
  double rate_hz = 100.0;  // sample rate of the coefficient series
  std::string source;      // trajectory label
  int start = 0;
  int end = 0;

  int components() const { return static_cast<int>(basis.cols()); }
  // Time-mean of each coefficient series: the default constant coefficients.
  VecX mean_coefficients() const;
};

struct ExtractOptions {
  int k = 3;
  // When false the six floating-base rows are left out of the decomposition
  // (their basis rows are zero).
  bool include_base = true;
};

// Uncentered PCA (SVD) of the segment's velocity matrix.
Synergy extract(const JointTrajectory& traj, const MotionSegment& segment, const KinematicModel& model,
                const ExtractOptions& options = {});

// Cumulative variance fraction of the first k components.
double variance_explained(const Synergy& synergy, int k);

struct LibraryEntry {
  Synergy synergy;
  std::string style;
  std::string label;
};

struct SynergyLibrary {
  std::string name;
  std::string model;
  std::vector<LibraryEntry> entries;
  std::string created;        // free-form provenance, e.g. the build command
  int skipped_segments = 0;   // segments too short or with zero energy

  const LibraryEntry* find(std::string_view label) const;
  const LibraryEntry& at(std::string_view label) const;  // throws NotFoundError
};

// One synergy per extractable segment of each trajectory, tagged with the
// trajectory's style. Labels are "<trajectory label>/<segment index>".
SynergyLibrary build_library(std::span<const JointTrajectory> trajectories, const KinematicModel& model,
                             const SegmentOptions& segment_options = {}, const ExtractOptions& extract_options = {},
                             std::string name = "library");

std::string library_to_json(const SynergyLibrary& library, bool include_coefficients = true);
SynergyLibrary library_from_json(std::string_view text);
void save_library(const SynergyLibrary& library, const std::filesystem::path& path);
SynergyLibrary load_library(const std::filesystem::path& path);

// Throws ModelMismatchError unless the library was built for `model`.
void check_library_model(const SynergyLibrary& library, const KinematicModel& model);

}  // namespace synsculpt
