// synsculpt: command-line front end for ingest / segment / extract / synth /
// sequence / metrics / project / serve, plus corpus generation.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "synsculpt/corpus.hpp"
#include "synsculpt/metrics.hpp"
#include "synsculpt/segmenter.hpp"
#include "synsculpt/service.hpp"
#include "synsculpt/synergy.hpp"
#include "synsculpt/synth.hpp"

namespace fs = std::filesystem;
using namespace synsculpt;

namespace {

#ifndef SYNSCULPT_DEFAULT_MODEL
#define SYNSCULPT_DEFAULT_MODEL "humanoid.json"
#endif

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file not found: '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes to `path`, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("'" + item + "' is not a number");
    }
  }
  return out;
}

std::string describe(const JointTrajectory& t) {
  std::ostringstream s;
  s << "{\"label\":\"" << t.label << "\",\"model\":\"" << t.model << "\",\"frames\":" << t.frames()
    << ",\"rate_hz\":" << t.rate_hz << ",\"duration_s\":" << t.duration() << ",\"style\":\"" << t.style
    << "\",\"source\":\"" << (t.source ? std::string(to_string(*t.source)) : "") << "\"}\n";
  return s.str();
}

struct Common {
  std::string model_path = SYNSCULPT_DEFAULT_MODEL;
  void add(CLI::App* app) {
    app->add_option("--model", model_path, "Model JSON")->envname("SYNSCULPT_MODEL")->capture_default_str();
  }
  KinematicModel load() const { return load_model(model_path); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synergy-based whole-body motion tools"};
  app.require_subcommand(1);
  Common common;

  // generate ---------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "Write the synthetic prototype corpus (CSV + sidecar)");
  common.add(gen);
  std::vector<std::string> gen_motions;
  std::string gen_dir = "corpus";
  CorpusOptions gen_opts;
  std::optional<std::uint64_t> gen_noise_seed;
  gen->add_option("--motion", gen_motions, "squat, step_in_place, jumping_jack, walk_in_circle (default: all)");
  gen->add_option("--out-dir", gen_dir, "Output directory")->capture_default_str();
  gen->add_option("--duration", gen_opts.duration_s, "Seconds")->capture_default_str();
  gen->add_option("--rate", gen_opts.rate_hz, "Hz")->capture_default_str();
  gen->add_option("--amplitude", gen_opts.amplitude)->capture_default_str();
  gen->add_option("--tempo", gen_opts.tempo)->capture_default_str();
  gen->add_option("--noise-seed", gen_noise_seed, "Also inject band-limited velocity noise (10-40 Hz, 10% RMS)");

  // ingest -----------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Validate a trajectory CSV, optionally filter/resample and re-save");
  common.add(ingest);
  std::string ingest_in, ingest_out;
  std::optional<double> ingest_lowpass, ingest_rate;
  ingest->add_option("input", ingest_in, "Trajectory CSV")->required();
  ingest->add_option("--out", ingest_out, "Write the validated trajectory (CSV with velocities + sidecar)");
  ingest->add_option("--lowpass", ingest_lowpass, "Zero-phase velocity low-pass cutoff, Hz");
  ingest->add_option("--resample", ingest_rate, "Output rate, Hz");

  // segment ----------------------------------------------------------------
  auto* seg = app.add_subcommand("segment", "Split a trajectory at momentum discontinuities");
  common.add(seg);
  std::string seg_in, seg_out;
  SegmentOptions seg_opts;
  seg->add_option("input", seg_in, "Trajectory CSV")->required();
  seg->add_option("--threshold", seg_opts.threshold, "Momentum-change threshold")->capture_default_str();
  seg->add_option("--min-duration", seg_opts.min_duration, "Refractory window, s")->capture_default_str();
  seg->add_option("--out", seg_out, "CSV output (default stdout)");

  // extract ----------------------------------------------------------------
  auto* ext = app.add_subcommand("extract", "Build a synergy library from trajectories");
  common.add(ext);
  std::vector<std::string> ext_in;
  std::string ext_out, ext_name = "library", ext_style;
  SegmentOptions ext_seg;
  ExtractOptions ext_opts;
  bool exclude_base = false;
  ext->add_option("inputs", ext_in, "Trajectory CSVs")->required();
  ext->add_option("--k", ext_opts.k, "Components per synergy")->capture_default_str();
  ext->add_flag("--exclude-base", exclude_base, "Leave the floating-base rows out of the PCA");
  ext->add_option("--threshold", ext_seg.threshold)->capture_default_str();
  ext->add_option("--min-duration", ext_seg.min_duration)->capture_default_str();
  ext->add_option("--name", ext_name)->capture_default_str();
  ext->add_option("--style", ext_style, "Override the style tag of every input");
  ext->add_option("--out", ext_out, "Library JSON")->required();

  // synth ------------------------------------------------------------------
  auto* syn = app.add_subcommand("synth", "Reconstruct a trajectory from one library entry");
  common.add(syn);
  std::string syn_lib, syn_label, syn_out, syn_mode = "const", syn_values, syn_coeffs_json;
  std::optional<double> syn_duration;
  double syn_rate = 100.0;
  syn->add_option("--library", syn_lib)->required();
  syn->add_option("--label", syn_label, "Entry label (default: first entry)");
  syn->add_option("--mode", syn_mode, "const | stored")->capture_default_str();
  syn->add_option("--values", syn_values, "Comma-separated constants (const mode; default: time-mean)");
  syn->add_option("--coeffs", syn_coeffs_json, "Coefficient schedule as JSON (overrides --mode/--values)");
  syn->add_option("--duration", syn_duration, "Seconds (default: source segment duration)");
  syn->add_option("--rate", syn_rate)->capture_default_str();
  syn->add_option("--out", syn_out, "Trajectory CSV")->required();

  // sequence ---------------------------------------------------------------
  auto* seq = app.add_subcommand("sequence", "Render a sequence plan");
  common.add(seq);
  std::string seq_plan, seq_out;
  seq->add_option("plan", seq_plan, "Plan JSON; library paths are relative to it")->required();
  seq->add_option("--out", seq_out, "Trajectory CSV")->required();

  // metrics ----------------------------------------------------------------
  auto* met = app.add_subcommand("metrics", "Energetics, power and foot sliding, compared against a baseline");
  common.add(met);
  std::vector<std::string> met_in;
  std::string met_out;
  std::size_t met_baseline = 0;
  MetricsOptions met_opts;
  FootSlideOptions foot;
  met->add_option("inputs", met_in, "Trajectory CSVs")->required();
  met->add_option("--baseline", met_baseline, "Index of the baseline input")->capture_default_str();
  met->add_option("--eval-rate", met_opts.eval_rate_hz, "Hz")->capture_default_str();
  met->add_option("--h-contact", foot.h_contact, "m")->capture_default_str();
  met->add_option("--v-slide", foot.v_slide, "m/s")->capture_default_str();
  met->add_option("--out", met_out, "CSV output (default stdout)");

  // project ----------------------------------------------------------------
  auto* proj = app.add_subcommand("project", "Project an external trajectory onto a synergy basis");
  common.add(proj);
  std::string proj_in, proj_lib, proj_label, proj_out, torso_frame = "upper_torso", torso_kind = "orientation3";
  bool no_torso = false;
  proj->add_option("input", proj_in, "External trajectory CSV")->required();
  proj->add_option("--library", proj_lib)->required();
  proj->add_option("--label", proj_label, "Entry label (default: first entry)");
  proj->add_option("--torso-frame", torso_frame)->capture_default_str();
  proj->add_option("--torso-kind", torso_kind, "pose6 | orientation3 | position3")->capture_default_str();
  proj->add_flag("--no-torso", no_torso, "Skip the torso nullspace (N = I)");
  proj->add_option("--out", proj_out, "Trajectory CSV")->required();

  // serve ------------------------------------------------------------------
  auto* srv = app.add_subcommand("serve", "HTTP API for the editor");
  common.add(srv);
  ServeOptions serve_opts;
  std::string library_dir;
  srv->add_option("--host", serve_opts.host)->envname("SYNSCULPT_HOST")->capture_default_str();
  srv->add_option("--port", serve_opts.port)->envname("SYNSCULPT_PORT")->capture_default_str();
  srv->add_option("--library-dir", library_dir, "Library store")->envname("SYNSCULPT_LIBRARY_DIR");
  srv->add_option("--cors-origin", serve_opts.cors_origin)->envname("SYNSCULPT_CORS_ORIGIN");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto pick = [](const SynergyLibrary& lib, const std::string& label) -> const LibraryEntry& {
      if (!label.empty()) return lib.at(label);
      if (lib.entries.empty()) throw NotFoundError("library '" + lib.name + "' is empty");
      return lib.entries.front();
    };

    if (*gen) {
      const auto model = common.load();
      fs::create_directories(gen_dir);
      std::vector<MotionKind> kinds;
      for (const auto& m : gen_motions) {
        const auto k = parse_motion_kind(m);
        if (!k) throw ValidationError("unknown motion '" + m + "'");
        kinds.push_back(*k);
      }
      if (kinds.empty()) kinds.assign(std::begin(kAllMotions), std::end(kAllMotions));
      for (auto kind : kinds) {
        auto traj = generate_motion(model, kind, gen_opts);
        std::string name(to_string(kind));
        if (gen_noise_seed) {
          traj = inject_velocity_noise(model, traj, {.seed = *gen_noise_seed});
          name += "_noisy";
        }
        const fs::path path = fs::path(gen_dir) / (name + ".csv");
        save_trajectory(traj, model, path);
        std::cout << path.string() << '\n';
      }
    } else if (*ingest) {
      const auto model = common.load();
      auto traj = load_trajectory(ingest_in, model, {ingest_lowpass});
      if (ingest_rate) traj = resample(traj, model, *ingest_rate);
      if (!ingest_out.empty()) save_trajectory(traj, model, ingest_out);
      std::cout << describe(traj);
    } else if (*seg) {
      const auto model = common.load();
      emit(seg_out, segments_to_csv(segment(load_trajectory(seg_in, model), model, seg_opts)));
    } else if (*ext) {
      const auto model = common.load();
      ext_opts.include_base = !exclude_base;
      std::vector<JointTrajectory> trajs;
      for (const auto& p : ext_in) {
        trajs.push_back(load_trajectory(p, model));
        if (!ext_style.empty()) trajs.back().style = ext_style;
      }
      auto lib = build_library(trajs, model, ext_seg, ext_opts, ext_name);
      std::ostringstream created;
      created << "extract k=" << ext_opts.k << " threshold=" << ext_seg.threshold
              << " min_duration=" << ext_seg.min_duration << (exclude_base ? " exclude_base" : "");
      lib.created = created.str();
      save_library(lib, ext_out);
      std::cout << "{\"entries\":" << lib.entries.size() << ",\"skipped_segments\":" << lib.skipped_segments
                << ",\"out\":\"" << ext_out << "\"}\n";
    } else if (*syn) {
      const auto model = common.load();
      const auto lib = load_library(syn_lib);
      check_library_model(lib, model);
      const Synergy& s = pick(lib, syn_label).synergy;
      SynthesisRequest req;
      if (!syn_coeffs_json.empty()) {
        req.coefficients = parse_coefficients(syn_coeffs_json, s);
      } else if (syn_mode == "stored") {
        req.coefficients = CoefficientSchedule::stored(s.components());
      } else if (syn_mode == "const") {
        if (syn_values.empty()) {
          req.coefficients = CoefficientSchedule::constant(s.mean_coefficients());
        } else {
          const auto v = parse_list(syn_values);
          if (static_cast<int>(v.size()) != s.components())
            throw ValidationError("--values needs " + std::to_string(s.components()) + " numbers");
          req.coefficients = CoefficientSchedule::constant(Eigen::Map<const VecX>(v.data(), v.size()));
        }
      } else {
        throw ValidationError("unknown --mode '" + syn_mode + "' (const or stored; use --coeffs for curves)");
      }
      req.duration_s = syn_duration.value_or(s.duration_s);
      req.rate_hz = syn_rate;
      save_trajectory(reconstruct(model, s, req), model, syn_out);
    } else if (*seq) {
      const auto model = common.load();
      const fs::path base = fs::path(seq_plan).parent_path();
      std::map<std::string, std::shared_ptr<const SynergyLibrary>> cache;
      const auto resolve = [&](const std::string& ref, std::optional<int>) {
        auto& slot = cache[ref];
        if (!slot) {
          const fs::path p = fs::path(ref).is_absolute() ? fs::path(ref) : base / ref;
          auto lib = load_library(p);
          check_library_model(lib, model);
          slot = std::make_shared<const SynergyLibrary>(std::move(lib));
        }
        return slot;
      };
      const auto result = sequence(model, parse_sequence_plan(read_file(seq_plan), resolve));
      save_trajectory(result.trajectory, model, seq_out);
    } else if (*met) {
      const auto model = common.load();
      std::vector<MetricsReport> reports;
      for (const auto& p : met_in) {
        MetricsOptions o = met_opts;
        FootSlideOptions f = foot;
        std::erase_if(f.feet, [&](const std::string& n) { return !model.find_frame(n) && !model.find_body(n); });
        if (!f.feet.empty()) o.foot_slide = f;
        reports.push_back(evaluate(load_trajectory(p, model), model, o));
      }
      emit(met_out, comparison_to_csv(compare(reports, met_baseline)));
    } else if (*proj) {
      const auto model = common.load();
      const auto lib = load_library(proj_lib);
      check_library_model(lib, model);
      const Synergy& s = pick(lib, proj_label).synergy;
      std::optional<TaskSpec> torso;
      if (!no_torso) torso = TaskSpec{torso_frame, parse_task_kind(torso_kind), Vec3::Zero()};
      const auto external = load_trajectory(proj_in, model);
      save_trajectory(project_external(model, external, s.basis, torso), model, proj_out);
    } else if (*srv) {
      Service service(common.load(), library_dir.empty() ? std::nullopt : std::optional<fs::path>(library_dir));
      HttpServer server(service, serve_opts);
      const int port = server.bind();
      std::cerr << "listening on " << serve_opts.host << ':' << port << '\n';
      server.listen();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
