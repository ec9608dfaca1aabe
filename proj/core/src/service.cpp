#include "synsculpt/service.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "httplib.h"
#include "json_codec.hpp"
#include "synsculpt/metrics.hpp"
#include "synsculpt/segmenter.hpp"

namespace synsculpt {

using detail::field;
using detail::field_or;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Payload plus its content hash. nlohmann objects are key-sorted, so dump()
// is canonical.
HttpResponse ok(json payload, int status = 200) {
  payload["hash"] = hex64(fnv1a64(payload.dump()));
  return {status, payload.dump()};
}

HttpResponse failure(int status, std::string_view kind, std::string_view message) {
  return {status, json{{"error", message}, {"kind", kind}}.dump()};
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  std::size_t i = 0;
  while (i < query.size()) {
    std::size_t amp = query.find('&', i);
    if (amp == std::string_view::npos) amp = query.size();
    const std::string_view item = query.substr(i, amp - i);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      out.emplace(std::string(item), "");
    else
      out.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    i = amp + 1;
  }
  return out;
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  return detail::parse_text(body, "request body");
}

class MethodNotAllowed : public Error {
 public:
  using Error::Error;
};

}  // namespace

struct Service::State {
  KinematicModel model;
  std::optional<std::filesystem::path> library_dir;
  json model_info;

  mutable std::shared_mutex mutex;
  std::map<std::string, std::shared_ptr<const JointTrajectory>> trajectories;
  std::map<std::string, std::vector<std::shared_ptr<const SynergyLibrary>>> libraries;
  int next_trajectory = 1;
  int next_library = 1;

  std::shared_ptr<const JointTrajectory> trajectory(const std::string& id) const {
    std::shared_lock lock(mutex);
    const auto it = trajectories.find(id);
    if (it == trajectories.end()) throw NotFoundError("unknown trajectory id '" + id + "'");
    return it->second;
  }

  std::pair<std::shared_ptr<const SynergyLibrary>, int> library(const std::string& id, std::optional<int> version) const {
    std::shared_lock lock(mutex);
    const auto it = libraries.find(id);
    if (it == libraries.end()) throw NotFoundError("unknown library id '" + id + "'");
    const int latest = static_cast<int>(it->second.size());
    const int v = version.value_or(latest);
    if (v < 1 || v > latest)
      throw NotFoundError("library '" + id + "' has no version " + std::to_string(v) + " (latest " +
                          std::to_string(latest) + ")");
    return {it->second[v - 1], v};
  }

  // Accepts a stored trajectory id or an inline trajectory object.
  std::shared_ptr<const JointTrajectory> trajectory_ref(const json& j) const {
    if (j.is_string()) return trajectory(j.get<std::string>());
    return std::make_shared<const JointTrajectory>(detail::trajectory_from(j, model));
  }

  std::pair<std::string, int> publish(std::optional<std::string> id, SynergyLibrary lib) {
    if (lib.model != model.name())
      throw ModelMismatchError("library '" + lib.name + "' was built for model '" + lib.model + "', server model is '" +
                               model.name() + "'");
    auto snapshot = std::make_shared<const SynergyLibrary>(std::move(lib));
    std::unique_lock lock(mutex);
    const std::string key = id ? *id : "lib" + std::to_string(next_library++);
    auto& versions = libraries[key];
    versions.push_back(snapshot);
    const int version = static_cast<int>(versions.size());
    if (library_dir) save_library(*snapshot, *library_dir / (key + ".json"));
    return {key, version};
  }

  json library_summary(const std::string& id, int version, const SynergyLibrary& lib) const {
    json entries = json::array();
    for (const auto& e : lib.entries)
      entries.push_back({{"label", e.label},
                         {"style", e.style},
                         {"k", e.synergy.components()},
                         {"sigma", detail::vector_json(e.synergy.sigma)},
                         {"var_frac", detail::vector_json(e.synergy.variance_fraction)},
                         {"duration_s", e.synergy.duration_s}});
    return {{"id", id},
            {"version", version},
            {"name", lib.name},
            {"model", lib.model},
            {"skipped_segments", lib.skipped_segments},
            {"entries", std::move(entries)}};
  }

  json synthesized(const JointTrajectory& traj, bool with_frames) const {
    return {{"trajectory", detail::trajectory_json(traj, model, with_frames)},
            {"metrics", detail::report_json(evaluate(traj, model))}};
  }

  // --- endpoints -----------------------------------------------------------

  HttpResponse get_model() const { return ok(model_info); }

  HttpResponse post_trajectory(const json& body) {
    JointTrajectory traj;
    if (body.contains("csv")) {
      Sidecar sc;
      if (body.contains("sidecar") && body.at("sidecar").is_object()) {
        const json& s = body.at("sidecar");
        sc.model = field_or<std::string>(s, "model", "");
        if (s.contains("rate_hz") && !s.at("rate_hz").is_null()) sc.rate_hz = field<double>(s, "rate_hz");
        sc.style = field_or<std::string>(s, "style", "");
        if (s.contains("source") && !s.at("source").is_null()) {
          sc.source = parse_source(field<std::string>(s, "source"));
          if (!sc.source) throw ValidationError("sidecar: unknown source");
        }
      }
      std::istringstream in(field<std::string>(body, "csv"));
      traj = read_trajectory_csv(in, model, sc);
      traj.label = field_or<std::string>(body, "label", "");
    } else {
      traj = detail::trajectory_from(body, model);
    }
    auto snapshot = std::make_shared<const JointTrajectory>(std::move(traj));
    std::string id;
    {
      std::unique_lock lock(mutex);
      id = "t" + std::to_string(next_trajectory++);
      trajectories.emplace(id, snapshot);
    }
    return ok({{"id", id},
               {"label", snapshot->label},
               {"frames", snapshot->frames()},
               {"rate_hz", snapshot->rate_hz},
               {"duration_s", snapshot->duration()},
               {"content", hex64(fnv1a64(detail::trajectory_json(*snapshot, model, false).dump()))}},
              201);
  }

  HttpResponse get_trajectory(const std::string& id) const {
    return ok({{"id", id}, {"trajectory", detail::trajectory_json(*trajectory(id), model, false)}});
  }

  HttpResponse post_segment(const std::string& id, const json& body) const {
    const auto traj = trajectory(id);
    SegmentOptions opts;
    opts.threshold = field_or<double>(body, "threshold", opts.threshold);
    opts.min_duration = field_or<double>(body, "min_duration", opts.min_duration);
    const auto segs = segment(*traj, model, opts);
    json out = json::array();
    for (const auto& s : segs)
      out.push_back({{"start", s.start}, {"end", s.end}, {"start_s", s.start_s}, {"end_s", s.end_s}, {"peak_dP", s.peak_dp}});
    return ok({{"trajectory", id}, {"segments", std::move(out)}, {"csv", segments_to_csv(segs)}});
  }

  HttpResponse post_library(const json& body) {
    std::optional<std::string> id;
    if (body.contains("id") && !body.at("id").is_null()) id = field<std::string>(body, "id");
    SynergyLibrary lib;
    if (body.contains("library")) {
      lib = library_from_json(body.at("library").dump());
    } else if (body.contains("build")) {
      const json& b = body.at("build");
      if (!b.contains("trajectories") || !b.at("trajectories").is_array() || b.at("trajectories").empty())
        throw ValidationError("build needs a non-empty 'trajectories' array");
      std::vector<JointTrajectory> trajs;
      for (const json& ref : b.at("trajectories")) {
        JointTrajectory t = *trajectory_ref(ref);
        if (t.label.empty() && ref.is_string()) t.label = ref.get<std::string>();
        trajs.push_back(std::move(t));
      }
      SegmentOptions so;
      so.threshold = field_or<double>(b, "threshold", so.threshold);
      so.min_duration = field_or<double>(b, "min_duration", so.min_duration);
      ExtractOptions eo;
      eo.k = field_or<int>(b, "k", eo.k);
      eo.include_base = field_or<bool>(b, "include_base", eo.include_base);
      lib = build_library(trajs, model, so, eo, field_or<std::string>(b, "name", id.value_or("library")));
      lib.created = "service build";
    } else {
      throw ValidationError("POST /libraries needs either 'library' (upload) or 'build'");
    }
    const auto [key, version] = publish(id, std::move(lib));
    const auto [snapshot, v] = library(key, version);
    return ok(library_summary(key, v, *snapshot), 201);
  }

  HttpResponse list_libraries() const {
    std::shared_lock lock(mutex);
    json out = json::array();
    for (const auto& [id, versions] : libraries)
      out.push_back({{"id", id}, {"latest_version", versions.size()}, {"entries", versions.back()->entries.size()}});
    return ok({{"libraries", std::move(out)}});
  }

  HttpResponse get_library(const std::string& id, const std::map<std::string, std::string>& query) const {
    std::optional<int> version;
    if (const auto it = query.find("version"); it != query.end()) {
      try {
        version = std::stoi(it->second);
      } catch (const std::exception&) {
        throw ValidationError("version must be an integer");
      }
    }
    const auto [lib, v] = library(id, version);
    json payload = json::parse(library_to_json(*lib));
    return ok({{"id", id}, {"version", v}, {"library", std::move(payload)}});
  }

  const LibraryEntry& entry(const json& body, std::shared_ptr<const SynergyLibrary>& keep, int& version) const {
    std::optional<int> requested;
    if (body.contains("version") && !body.at("version").is_null()) requested = field<int>(body, "version");
    auto [lib, v] = library(field<std::string>(body, "library"), requested);
    keep = lib;
    version = v;
    return keep->at(field<std::string>(body, "label"));
  }

  HttpResponse post_synthesize(const json& body) const {
    std::shared_ptr<const SynergyLibrary> lib;
    int version = 0;
    const Synergy& syn = entry(body, lib, version).synergy;
    SynthesisRequest req;
    req.coefficients = detail::coefficients_from(body.value("coeffs", json::object()), syn);
    req.duration_s = field_or<double>(body, "duration_s", syn.duration_s);
    req.rate_hz = field_or<double>(body, "rate_hz", 100.0);
    if (body.contains("q0") && !body.at("q0").is_null()) {
      req.q0 = detail::vector_from(body.at("q0"), "q0", model.nq());
      check_configuration(model, *req.q0, 1e-6);
    }
    const JointTrajectory traj = reconstruct(model, syn, req);
    json out = synthesized(traj, field_or<bool>(body, "with_frames", true));
    out["library"] = {{"id", body.at("library")}, {"version", version}, {"label", body.at("label")}};
    return ok(std::move(out));
  }

  HttpResponse post_sequence(const json& body) const {
    const SequencePlan plan = detail::plan_from(body, [this](const std::string& id, std::optional<int> version) {
      return library(id, version).first;
    });
    const SequenceResult result = sequence(model, plan);
    json out = synthesized(result.trajectory, field_or<bool>(body, "with_frames", true));
    out["seams"] = result.seams;
    return ok(std::move(out));
  }

  HttpResponse post_metrics(const json& body) const {
    if (!body.contains("trajectories") || !body.at("trajectories").is_array() || body.at("trajectories").empty())
      throw ValidationError("metrics needs a non-empty 'trajectories' array");
    MetricsOptions opts;
    opts.eval_rate_hz = field_or<double>(body, "eval_rate_hz", opts.eval_rate_hz);
    std::vector<MetricsReport> reports;
    for (const json& ref : body.at("trajectories")) {
      const auto traj = trajectory_ref(ref);
      MetricsReport r = evaluate(*traj, model, opts);
      if (r.label.empty() && ref.is_string()) r.label = ref.get<std::string>();
      reports.push_back(std::move(r));
    }
    const auto baseline = field_or<std::size_t>(body, "baseline", 0);
    const Comparison c = compare(reports, baseline);
    json rs = json::array();
    for (const auto& r : reports) rs.push_back(detail::report_json(r));
    return ok({{"reports", std::move(rs)}, {"comparison", detail::comparison_json(c)}, {"csv", comparison_to_csv(c)}});
  }

  HttpResponse post_project(const json& body) const {
    if (!body.contains("trajectory")) throw ValidationError("missing field 'trajectory'");
    const auto ext = trajectory_ref(body.at("trajectory"));
    MatX basis;
    const json b = body.value("basis", json("identity"));
    if (b.is_string() && b.get<std::string>() == "identity") {
      basis = MatX::Identity(model.nv(), model.nv());
    } else if (b.is_array()) {
      if (b.empty() || !b[0].is_array()) throw ValidationError("'basis' must be an nv×k array of rows");
      basis = detail::matrix_from(b, "basis", static_cast<Eigen::Index>(b[0].size()));
    } else if (b.is_object()) {
      std::shared_ptr<const SynergyLibrary> lib;
      int version = 0;
      basis = entry(b, lib, version).synergy.basis;
    } else {
      throw ValidationError("'basis' must be \"identity\", a matrix, or {library, label}");
    }
    std::optional<TaskSpec> torso = upper_torso_orientation();
    if (body.contains("torso_task")) {
      const json& t = body.at("torso_task");
      torso = t.is_null() ? std::nullopt : std::optional<TaskSpec>(detail::task_from(t));
    }
    const JointTrajectory out = project_external(model, *ext, basis, torso);
    json payload = synthesized(out, field_or<bool>(body, "with_frames", false));
    payload["input_metrics"] = detail::report_json(evaluate(*ext, model));
    return ok(std::move(payload));
  }

  HttpResponse route(std::string_view method, std::string_view target, std::string_view body) {
    const std::size_t qmark = target.find('?');
    const auto parts = split_path(target.substr(0, qmark));
    const auto query = parse_query(qmark == std::string_view::npos ? std::string_view() : target.substr(qmark + 1));
    const bool get = method == "GET";
    const bool post = method == "POST";
    const auto need = [&](bool allowed) {
      if (!allowed) throw MethodNotAllowed(std::string(method) + " not allowed on " + std::string(target));
    };
    const std::size_t n = parts.size();
    if (n >= 1) {
      const std::string& head = parts[0];
      if (head == "model" && n == 1) return need(get), get_model();
      if (head == "trajectories") {
        if (n == 1) return need(post), post_trajectory(parse_body(body));
        if (n == 2) return need(get), get_trajectory(parts[1]);
        if (n == 3 && parts[2] == "segment") return need(post), post_segment(parts[1], parse_body(body));
      }
      if (head == "libraries") {
        if (n == 1) return post ? post_library(parse_body(body)) : (need(get), list_libraries());
        if (n == 2) return need(get), get_library(parts[1], query);
      }
      if (n == 1 && head == "synthesize") return need(post), post_synthesize(parse_body(body));
      if (n == 1 && head == "sequence") return need(post), post_sequence(parse_body(body));
      if (n == 1 && head == "metrics") return need(post), post_metrics(parse_body(body));
      if (n == 1 && head == "project") return need(post), post_project(parse_body(body));
    }
    throw NotFoundError("no route for " + std::string(method) + " " + std::string(target));
  }
};

Service::Service(KinematicModel model, std::optional<std::filesystem::path> library_dir)
    : state_(std::make_unique<State>()) {
  state_->model = std::move(model);
  state_->library_dir = std::move(library_dir);

  const KinematicModel& m = state_->model;
  json bodies = json::array();
  for (const auto& b : m.bodies())
    bodies.push_back({{"name", b.name},
                      {"parent", b.parent < 0 ? json() : json(m.bodies()[b.parent].name)},
                      {"joint", std::string(to_string(b.joint))},
                      {"q_index", b.q_index},
                      {"v_index", b.v_index}});
  json frames = json::array();
  for (const auto& f : m.frames()) frames.push_back({{"name", f.name}, {"body", m.bodies()[f.body].name}});
  state_->model_info = {{"name", m.name()},
                        {"nq", m.nq()},
                        {"nv", m.nv()},
                        {"floating_base", m.floating_base()},
                        {"total_mass", m.total_mass()},
                        {"bodies", std::move(bodies)},
                        {"frames", std::move(frames)},
                        {"document", json::parse(m.document())}};

  if (state_->library_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(*state_->library_dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(*state_->library_dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      SynergyLibrary lib = load_library(f);
      if (lib.model != m.name()) continue;  // other models share the directory
      state_->libraries[f.stem().string()].push_back(std::make_shared<const SynergyLibrary>(std::move(lib)));
    }
  }
}

Service::~Service() = default;

const KinematicModel& Service::model() const { return state_->model; }

HttpResponse Service::handle(std::string_view method, std::string_view target, std::string_view body) {
  try {
    return state_->route(method, target, body);
  } catch (const BlendWindowError& e) {
    return failure(422, "blend_window", e.what());
  } catch (const RankDeficiencyError& e) {
    return failure(422, "rank_deficiency", e.what());
  } catch (const DegenerateSegmentError& e) {
    return failure(422, "degenerate_segment", e.what());
  } catch (const ModelMismatchError& e) {
    return failure(409, "model_mismatch", e.what());
  } catch (const NotFoundError& e) {
    return failure(404, "not_found", e.what());
  } catch (const MethodNotAllowed& e) {
    return failure(405, "method_not_allowed", e.what());
  } catch (const Error& e) {
    return failure(400, "validation", e.what());
  } catch (const json::exception& e) {
    return failure(400, "validation", e.what());
  } catch (const std::exception& e) {
    return failure(500, "internal", e.what());
  }
}

// --- HTTP front end ----------------------------------------------------------

struct HttpServer::Impl {
  Impl(Service& s, ServeOptions o) : service(s), options(std::move(o)) {}
  Service& service;
  ServeOptions options;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, ServeOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& srv = impl_->server;
  const std::string origin = impl_->options.cors_origin;
  const auto cors = [origin](httplib::Response& res) {
    if (origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  };
  const auto dispatch = [this, cors](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = impl_->service.handle(req.method, req.target, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    cors(res);
  };
  srv.Get(".*", dispatch);
  srv.Post(".*", dispatch);
  srv.Options(".*", [cors](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    cors(res);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    o.port = impl_->server.bind_to_any_port(o.host);
  } else if (!impl_->server.bind_to_port(o.host, o.port)) {
    o.port = -1;
  }
  if (o.port <= 0) throw Error("cannot bind " + o.host);
  return o.port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace synsculpt
