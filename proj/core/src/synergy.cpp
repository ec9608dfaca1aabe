#include "synsculpt/synergy.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/SVD>

#include "json.hpp"

namespace synsculpt {

using nlohmann::json;

VecX Synergy::mean_coefficients() const {
  if (coefficients.cols() == 0) return VecX::Zero(components());
  return coefficients.rowwise().mean();
}

Synergy extract(const JointTrajectory& traj, const MotionSegment& segment, const KinematicModel& model,
                const ExtractOptions& options) {
  const int nv = model.nv();
  const int skip = options.include_base ? 0 : model.base_dofs();
  const int dims = nv - skip;
  if (options.k < 1 || options.k > dims)
    throw ValidationError("component count k=" + std::to_string(options.k) + " outside [1, " + std::to_string(dims) + "]");
  if (segment.start < 0 || segment.end > traj.frames() || segment.start >= segment.end)
    throw ValidationError("segment [" + std::to_string(segment.start) + ", " + std::to_string(segment.end) +
                          ") outside trajectory of " + std::to_string(traj.frames()) + " frames");
  if (segment.length() < options.k + 1)
    throw DegenerateSegmentError("segment has " + std::to_string(segment.length()) + " frames; k=" +
                                 std::to_string(options.k) + " needs at least " + std::to_string(options.k + 1));

  const MatX V = traj.velocities.middleRows(segment.start, segment.length()).transpose();  // nv × T
  const MatX data = V.bottomRows(dims);
  const double total = data.squaredNorm();
  if (!(total > 0.0)) throw DegenerateSegmentError("zero-energy segment");

  const Eigen::BDCSVD<MatX> svd(data, Eigen::ComputeThinU);
  const int k = options.k;

  Synergy s;
  s.basis = MatX::Zero(nv, k);
  s.basis.bottomRows(dims) = svd.matrixU().leftCols(k);
  for (int i = 0; i < k; ++i) {
    Eigen::Index at = 0;
    s.basis.col(i).cwiseAbs().maxCoeff(&at);
    if (s.basis(at, i) < 0.0) s.basis.col(i) *= -1.0;
  }
  s.sigma = svd.singularValues().head(k);
  s.variance_fraction = s.sigma.array().square() / total;
  s.total_variance = total;
  s.coefficients = s.basis.transpose() * V;
  s.q0 = traj.q(segment.start);
  s.rate_hz = traj.rate_hz;
  s.duration_s = (segment.length() - 1) / traj.rate_hz;
  s.source = traj.label;
  s.start = segment.start;
  s.end = segment.end;
  return s;
}

double variance_explained(const Synergy& synergy, int k) {
  if (k < 0 || k > synergy.components())
    throw ValidationError("k'=" + std::to_string(k) + " exceeds stored component count " +
                          std::to_string(synergy.components()));
  return synergy.variance_fraction.head(k).sum();
}

const LibraryEntry* SynergyLibrary::find(std::string_view label) const {
  for (const auto& e : entries)
    if (e.label == label) return &e;
  return nullptr;
}

const LibraryEntry& SynergyLibrary::at(std::string_view label) const {
  if (const auto* e = find(label)) return *e;
  throw NotFoundError("library '" + name + "' has no entry '" + std::string(label) + "'");
}

SynergyLibrary build_library(std::span<const JointTrajectory> trajectories, const KinematicModel& model,
                             const SegmentOptions& segment_options, const ExtractOptions& extract_options,
                             std::string name) {
  SynergyLibrary lib;
  lib.name = std::move(name);
  lib.model = model.name();
  std::set<std::string> labels;
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    const JointTrajectory& traj = trajectories[t];
    if (!traj.model.empty() && traj.model != model.name())
      throw ModelMismatchError("trajectory '" + traj.label + "' references model '" + traj.model + "', library model is '" +
                               model.name() + "'");
    const std::string base = traj.label.empty() ? "traj" + std::to_string(t) : traj.label;
    const auto segments = segment(traj, model, segment_options);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      Synergy syn;
      try {
        syn = extract(traj, segments[i], model, extract_options);
      } catch (const DegenerateSegmentError&) {
        ++lib.skipped_segments;
        continue;
      }
      std::string label = base + "/" + std::to_string(i);
      while (labels.count(label)) label += "'";
      labels.insert(label);
      lib.entries.push_back(LibraryEntry{std::move(syn), traj.style, std::move(label)});
    }
  }
  return lib;
}

namespace {

json matrix_rows(const MatX& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_array(const VecX& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

VecX read_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VecX>(values.data(), static_cast<Eigen::Index>(values.size()));
}

MatX read_matrix(const json& j, Eigen::Index cols_if_empty = 0) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  MatX m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw ValidationError("ragged matrix in library file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

std::string library_to_json(const SynergyLibrary& library, bool include_coefficients) {
  json j;
  j["name"] = library.name;
  j["model"] = library.model;
  j["created"] = library.created;
  j["skipped_segments"] = library.skipped_segments;
  json entries = json::array();
  for (const auto& e : library.entries) {
    const Synergy& s = e.synergy;
    json je;
    je["style"] = e.style;
    je["label"] = e.label;
    je["q0"] = vector_array(s.q0);
    je["S"] = matrix_rows(s.basis);
    je["sigma"] = vector_array(s.sigma);
    je["var_frac"] = vector_array(s.variance_fraction);
    je["total_variance"] = s.total_variance;
    je["duration_s"] = s.duration_s;
    je["rate_hz"] = s.rate_hz;
    je["source"] = {{"trajectory", s.source}, {"start", s.start}, {"end", s.end}};
    if (include_coefficients && s.coefficients.size() > 0) je["coeff_series"] = matrix_rows(s.coefficients);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j.dump();
}

SynergyLibrary library_from_json(std::string_view text) {
  SynergyLibrary lib;
  try {
    const json j = json::parse(text);
    lib.name = j.at("name").get<std::string>();
    lib.model = j.at("model").get<std::string>();
    lib.created = j.value("created", std::string());
    lib.skipped_segments = j.value("skipped_segments", 0);
    std::set<std::string> labels;
    for (const auto& je : j.at("entries")) {
      LibraryEntry e;
      e.style = je.value("style", std::string());
      e.label = je.at("label").get<std::string>();
      if (!labels.insert(e.label).second) throw ValidationError("duplicate library label '" + e.label + "'");
      Synergy& s = e.synergy;
      s.q0 = read_vector(je.at("q0"));
      s.basis = read_matrix(je.at("S"));
      s.sigma = read_vector(je.at("sigma"));
      s.variance_fraction = read_vector(je.at("var_frac"));
      const int k = s.components();
      if (s.sigma.size() != k || s.variance_fraction.size() != k)
        throw ValidationError("entry '" + e.label + "': sigma/var_frac length differs from basis columns");
      s.total_variance = je.value("total_variance", 0.0);
      s.duration_s = je.at("duration_s").get<double>();
      s.rate_hz = je.value("rate_hz", 100.0);
      if (je.contains("source")) {
        const auto& src = je.at("source");
        s.source = src.value("trajectory", std::string());
        s.start = src.value("start", 0);
        s.end = src.value("end", 0);
      }
      if (je.contains("coeff_series")) {
        s.coefficients = read_matrix(je.at("coeff_series"));
        if (s.coefficients.rows() != k)
          throw ValidationError("entry '" + e.label + "': coeff_series must have one row per component");
      } else {
        s.coefficients = MatX(k, 0);
      }
      lib.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("library schema violation: ") + e.what());
  }
  return lib;
}

void save_library(const SynergyLibrary& library, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << library_to_json(library) << '\n';
}

SynergyLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file not found: '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return library_from_json(ss.str());
}

void check_library_model(const SynergyLibrary& library, const KinematicModel& model) {
  if (library.model != model.name())
    throw ModelMismatchError("library '" + library.name + "' was built for model '" + library.model +
                             "', loaded model is '" + model.name() + "'");
  for (const auto& e : library.entries) {
    if (e.synergy.basis.rows() != model.nv() || e.synergy.q0.size() != model.nq())
      throw ModelMismatchError("library entry '" + e.label + "' has dimensions incompatible with model '" +
                               model.name() + "'");
  }
}

}  // namespace synsculpt
