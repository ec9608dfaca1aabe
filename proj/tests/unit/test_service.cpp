#include <chrono>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "synsculpt/corpus.hpp"
#include "synsculpt/service.hpp"
#include "test_support.hpp"
// After Eigen: <resolv.h> defines a _res macro that clashes with Eigen internals.
#include "httplib.h"

using namespace synsculpt;
using namespace synsculpt::test;
using nlohmann::json;

namespace {

json call(Service& svc, const char* method, const std::string& target, const json& body = nullptr, int expect = 200) {
  const auto r = svc.handle(method, target, body.is_null() ? std::string() : body.dump());
  const json j = json::parse(r.body);
  CHECK_MESSAGE(r.status == expect, method << " " << target << " -> " << r.status << " " << r.body.substr(0, 300));
  return j;
}

json trajectory_body(const JointTrajectory& t) {
  return json::parse(trajectory_to_json(t, humanoid()));
}

MatX rows(const json& j) {
  MatX m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r)
    for (std::size_t c = 0; c < j[r].size(); ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

}  // namespace

TEST_CASE("model endpoint") {
  Service svc(humanoid());
  const json m = call(svc, "GET", "/model");
  CHECK(m["nv"] == 25);
  CHECK(m["nq"] == 26);
  CHECK(m["name"] == "humanoid19");
  CHECK(m["bodies"].size() == 20);
  CHECK(m.contains("hash"));
  CHECK(svc.handle("GET", "/model", "").body == svc.handle("GET", "/model", "").body);
  call(svc, "POST", "/model", json::object(), 405);
  call(svc, "GET", "/nowhere", nullptr, 404);
}

TEST_CASE("trajectory ingestion and segmentation") {
  const auto model = humanoid();
  Service svc(model);
  const auto squat = generate_motion(model, MotionKind::Squat, {.duration_s = 3.0});

  const json created = call(svc, "POST", "/trajectories", trajectory_body(squat), 201);
  CHECK(created["frames"] == 300);
  const std::string id = created["id"];
  const json got = call(svc, "GET", "/trajectories/" + id);
  CHECK(max_abs(rows(got["trajectory"]["positions"]) - squat.positions) <= 1e-12);

  const json segs = call(svc, "POST", "/trajectories/" + id + "/segment", json{{"threshold", 0.75}});
  const auto direct = segment(squat, model, {.threshold = 0.75});
  REQUIRE(segs["segments"].size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) CHECK(segs["segments"][i]["start"] == direct[i].start);
  CHECK(segs["csv"].get<std::string>().rfind("start_s,end_s,peak_dP\n", 0) == 0);

  SUBCASE("csv upload") {
    std::string csv;
    for (const auto& c : csv_columns(model, false)) csv += (csv.empty() ? "" : ",") + c;
    csv += "\n";
    for (int k = 0; k < 3; ++k) {
      csv += std::to_string(k * 0.01);
      for (int c = 0; c < model.nq(); ++c) csv += "," + std::to_string(squat.positions(k, c));
      csv += "\n";
    }
    const json r = call(svc, "POST", "/trajectories", json{{"csv", csv}, {"sidecar", {{"rate_hz", 100}}}}, 201);
    CHECK(r["frames"] == 3);
  }
  SUBCASE("errors") {
    call(svc, "POST", "/trajectories/t999/segment", json::object(), 404);
    json bad = trajectory_body(squat);
    bad["positions"][3][0] = "x";
    call(svc, "POST", "/trajectories", bad, 400);
    json other = trajectory_body(squat);
    other["model"] = "robot";
    call(svc, "POST", "/trajectories", other, 409);
    const auto r = svc.handle("POST", "/trajectories", "{not json");
    CHECK(r.status == 400);
  }
}

TEST_CASE("libraries, synthesis and snapshots") {
  const auto model = humanoid();
  Service svc(model);
  const auto smooth = generate_motion(model, MotionKind::JumpingJack, {.duration_s = 2.0});
  auto source = trajectory_from_velocities(model, smooth.q(0), smooth.velocities, smooth.rate_hz);
  source.label = "jj";
  const std::string tid = call(svc, "POST", "/trajectories", trajectory_body(source), 201)["id"];

  const json built = call(svc, "POST", "/libraries",
                          json{{"id", "dance"},
                               {"build", {{"trajectories", {tid}}, {"threshold", 1e9}, {"k", model.nv()}}}},
                          201);
  CHECK(built["version"] == 1);
  REQUIRE(built["entries"].size() == 1);
  const std::string label = built["entries"][0]["label"];
  CHECK(label == "jj/0");

  const json lib = call(svc, "GET", "/libraries/dance");
  CHECK(lib["library"]["entries"].size() == 1);
  call(svc, "GET", "/libraries/nope", nullptr, 404);
  call(svc, "GET", "/libraries/dance?version=7", nullptr, 404);

  const json request{{"library", "dance"},
                     {"label", label},
                     {"coeffs", {{"mode", "stored"}}},
                     {"duration_s", source.duration()},
                     {"rate_hz", 100.0}};
  const json synth = call(svc, "POST", "/synthesize", request);
  const MatX P = rows(synth["trajectory"]["positions"]);
  CHECK(max_abs(P - source.positions) < 1e-3);
  CHECK(synth["trajectory"]["frames"].size() == static_cast<std::size_t>(source.frames()));
  CHECK(synth["trajectory"]["frames"][0]["body_positions"].size() == model.bodies().size());
  CHECK(synth["metrics"]["mean_dP"].get<double>() > 0.0);

  SUBCASE("server result equals the direct library call") {
    const auto direct_lib = build_library(std::vector<JointTrajectory>{source}, model, {.threshold = 1e9},
                                          {.k = model.nv()});
    const auto direct = reconstruct(model, direct_lib.entries[0].synergy,
                                    {CoefficientSchedule::stored(model.nv()), source.duration(), 100.0, {}});
    CHECK(max_abs(P - direct.positions) == 0.0);
  }
  SUBCASE("hash is deterministic and survives a change-and-revert") {
    json zero = request;
    zero["coeffs"] = {{"mode", "const"}, {"values", std::vector<double>(model.nv(), 0.0)}};
    const std::string h0 = call(svc, "POST", "/synthesize", zero)["hash"];
    json changed = zero;
    changed["coeffs"]["values"][0] = 0.5;
    const std::string h1 = call(svc, "POST", "/synthesize", changed)["hash"];
    CHECK(h0 != h1);
    CHECK(call(svc, "POST", "/synthesize", zero)["hash"] == h0);
    // a ≡ 0 holds the reference pose.
    const MatX Z = rows(call(svc, "POST", "/synthesize", zero)["trajectory"]["positions"]);
    for (int k = 0; k < Z.rows(); ++k) CHECK(max_abs(Z.row(k) - source.positions.row(0)) == 0.0);
  }
  SUBCASE("earlier versions are unaffected by later uploads") {
    json upload = lib["library"];
    upload["entries"][0]["S"][0][0] = 0.123;
    const json v2 = call(svc, "POST", "/libraries", json{{"id", "dance"}, {"library", upload}}, 201);
    CHECK(v2["version"] == 2);
    json pinned = request;
    pinned["version"] = 1;
    const json again = call(svc, "POST", "/synthesize", pinned);
    CHECK(again["trajectory"]["positions"] == synth["trajectory"]["positions"]);
    const json latest = call(svc, "POST", "/synthesize", request);
    CHECK(latest["library"]["version"] == 2);
    CHECK(latest["trajectory"]["positions"] != synth["trajectory"]["positions"]);
  }
  SUBCASE("model mismatch on upload") {
    json upload = lib["library"];
    upload["model"] = "robot";
    call(svc, "POST", "/libraries", json{{"library", upload}}, 409);
  }
  SUBCASE("sequence") {
    const json plan{{"rate_hz", 100.0},
                    {"steps",
                     {{{"library", "dance"}, {"label", label}, {"coeffs", {{"mode", "stored"}}}, {"duration_s", 1.0}},
                      {{"library", "dance"},
                       {"label", label},
                       {"coeffs", {{"mode", "const"}}},
                       {"duration_s", 1.0},
                       {"transition", {{"kind", "linear_blend"}, {"window_s", 0.2}}}}}}};
    const json seq = call(svc, "POST", "/sequence", plan);
    CHECK(seq["seams"] == json::array({100}));
    CHECK(seq["trajectory"]["positions"].size() == 201);
    json bad = plan;
    bad["steps"][1]["transition"]["window_s"] = 5.0;
    call(svc, "POST", "/sequence", bad, 422);
    bad = plan;
    bad["steps"][1]["label"] = "missing";
    call(svc, "POST", "/sequence", bad, 404);
  }
  SUBCASE("metrics") {
    const json m = call(svc, "POST", "/metrics", json{{"trajectories", {tid, tid}}});
    CHECK(m["reports"].size() == 2);
    CHECK(m["comparison"]["rows"][1]["ratio_dP"] == 1.0);
    CHECK(m["csv"].get<std::string>().find("ratio_dP") != std::string::npos);
  }
  SUBCASE("projection") {
    const json identity = call(svc, "POST", "/project",
                               json{{"trajectory", tid}, {"basis", "identity"}, {"torso_task", nullptr}});
    CHECK(max_abs(rows(identity["trajectory"]["velocities"]) - source.velocities) < 1e-12);
    const json projected =
        call(svc, "POST", "/project", json{{"trajectory", tid}, {"basis", {{"library", "dance"}, {"label", label}}}});
    CHECK(projected.contains("input_metrics"));
  }
}

TEST_CASE("rank deficiency surfaces as 422") {
  const auto arm = parse_model(planar_arm_json(0.4, 0.3));
  Service svc(arm);
  const json traj{{"rate_hz", 100.0}, {"positions", {{0.1, 0.2}, {0.1, 0.2}, {0.1, 0.2}}}};
  const json r = call(svc, "POST", "/project",
                      json{{"trajectory", traj}, {"basis", "identity"}, {"torso_task", {{"frame", "tip"}, {"kind", "pose6"}}}},
                      422);
  CHECK(r["error"].get<std::string>().find("at frame 0") != std::string::npos);
}

TEST_CASE("library directory persistence") {
  const auto model = humanoid();
  const auto dir = std::filesystem::temp_directory_path() / "synsculpt_service_libs";
  std::filesystem::remove_all(dir);
  {
    Service svc(model, dir);
    const auto t = generate_motion(model, MotionKind::StepInPlace, {.duration_s = 2.0});
    const std::string tid = call(svc, "POST", "/trajectories", trajectory_body(t), 201)["id"];
    call(svc, "POST", "/libraries", json{{"id", "steps"}, {"build", {{"trajectories", {tid}}}}}, 201);
  }
  Service reloaded(model, dir);
  const json lib = call(reloaded, "GET", "/libraries/steps");
  CHECK(lib["version"] == 1);
  CHECK(!lib["library"]["entries"].empty());
}

TEST_CASE("parse_sequence_plan with a resolver") {
  const auto model = humanoid();
  const auto t = generate_motion(model, MotionKind::Squat, {.duration_s = 2.0});
  auto lib = std::make_shared<const SynergyLibrary>(
      build_library(std::vector<JointTrajectory>{t}, model, {.threshold = 1e9}));
  const auto resolve = [&](const std::string& name, std::optional<int>) {
    if (name != "squats") throw NotFoundError("no library " + name);
    return lib;
  };
  const auto plan = parse_sequence_plan(
      R"({"rate_hz": 50, "steps": [{"library": "squats", "label": "squat/0", "coeffs": {"mode": "const", "values": [1, 0, 0]}, "duration_s": 0.5}]})",
      resolve);
  REQUIRE(plan.steps.size() == 1);
  CHECK(plan.rate_hz == 50.0);
  CHECK(plan.steps[0].request.coefficients.channels[0].value == 1.0);
  CHECK_THROWS_AS(parse_sequence_plan(R"({"steps": [{"library": "x", "label": "y"}]})", resolve), NotFoundError);
  CHECK_THROWS_AS(parse_sequence_plan("[", resolve), ValidationError);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("HTTP round trip") {
  Service svc(humanoid());
  HttpServer server(svc, {.host = "127.0.0.1", .port = 0, .cors_origin = "http://localhost:5173"});
  const int port = server.bind();
  std::thread thread([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int attempt = 0; attempt < 100 && !res; ++attempt) {
    res = client.Get("/model");
    if (!res) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  CHECK(json::parse(res->body)["nv"] == 25);
  const auto missing = client.Get("/libraries/none");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  const auto bad = client.Post("/synthesize", "{}", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  server.stop();
  thread.join();
}
