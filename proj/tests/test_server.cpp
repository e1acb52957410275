#include <doctest.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "flowscope/error.hpp"
#include "flowscope/server.hpp"

using namespace flowscope;
using namespace flowscope::testing;
using nlohmann::json;

namespace {

std::shared_ptr<const Snapshot> fixture_snapshot() {
  Fixture all;
  for (const auto& f : {keyboard_drag_fixture(), previous_destinations_fixture(), parked_typing_fixture()}) {
    all.events.insert(all.events.end(), f.events.begin(), f.events.end());
    all.glances.insert(all.glances.end(), f.glances.begin(), f.glances.end());
    all.driving.insert(all.driving.end(), f.driving.begin(), f.driving.end());
  }
  return std::make_shared<const Snapshot>(all.store(), std::vector<TaskDefinition>{navigation_task()});
}

}  // namespace

TEST_SUITE("server") {
  TEST_CASE("routes return the view JSON bodies") {
    const auto snap = fixture_snapshot();
    const auto& t = snap->task("navigation");

    auto r = server::handle_get(*snap, "/tasks", {});
    CHECK(r.status == 200);
    CHECK(r.content_type == "application/json");
    CHECK(r.body == views::tasks_json(*snap));

    r = server::handle_get(*snap, "/tasks/navigation/sankey", {{"p_min", "0.005"}});
    CHECK(r.status == 200);
    CHECK(r.body == views::task_view_json(t, {0.005}));

    r = server::handle_get(*snap, "/tasks/navigation/flows", {{"metric", "interaction_count"}});
    CHECK(r.status == 200);
    CHECK(r.body == views::flow_view_json(t, snap->store(), views::parse_flow_view_request({{"metric", "interaction_count"}})));

    r = server::handle_get(*snap, "/tasks/navigation/flows/F1/sequences", {});
    CHECK(r.status == 200);
    CHECK(r.body == views::flow_sequences_json(t, "F1"));

    const auto id = t.sequences.front().sequence_id;
    r = server::handle_get(*snap, "/sequences/" + id + "/timeline", {{"pad_ms", "0"}});
    CHECK(r.status == 200);
    CHECK(r.body == views::timeline_json(*snap, id, views::parse_timeline_request({{"pad_ms", "0"}})));
    CHECK(server::handle_get(*snap, "/sequences/" + id + "/timeline/", {{"pad_ms", "0"}}).body == r.body);
  }

  TEST_CASE("unknown ids and routes are 404") {
    const auto snap = fixture_snapshot();
    for (const std::string path : {"/sequences/unknown/timeline", "/tasks/nope/sankey", "/tasks/navigation/flows/F9/sequences",
                                   "/tasks/navigation/other", "/tasks/navigation", "/sequences"}) {
      const auto r = server::handle_get(*snap, path, {});
      CHECK_MESSAGE(r.status == 404, path);
      CHECK(json::parse(r.body)["status"] == 404);
    }
  }

  TEST_CASE("bad parameters are 400") {
    const auto snap = fixture_snapshot();
    CHECK(server::handle_get(*snap, "/tasks/navigation/sankey", {{"p_min", "2"}}).status == 400);
    CHECK(server::handle_get(*snap, "/tasks/navigation/sankey", {{"p_min", "x"}}).status == 400);
    CHECK(server::handle_get(*snap, "/tasks/navigation/flows", {{"metric", "nope"}}).status == 400);
    CHECK(server::handle_get(*snap, "/tasks", {{"debug", "1"}}).status == 400);
    const auto r = server::handle_get(*snap, "/sequences/navigation-000001/timeline", {{"pad_ms", "-5"}});
    CHECK(r.status == 400);
    CHECK(json::parse(r.body)["error"].get<std::string>().find("pad_ms") != std::string::npos);
  }

  TEST_CASE("identical requests give identical bodies") {
    const auto snap = fixture_snapshot();
    const auto a = server::handle_get(*snap, "/tasks/navigation/flows", {{"grid", "32"}});
    const auto b = server::handle_get(*snap, "/tasks/navigation/flows", {{"grid", "32"}});
    CHECK(a.body == b.body);
  }

  TEST_CASE("bind addresses") {
    auto a = server::parse_bind_address("0.0.0.0:9000");
    CHECK(a.host == "0.0.0.0");
    CHECK(a.port == 9000);
    a = server::parse_bind_address(":81");
    CHECK(a.host == "127.0.0.1");
    CHECK(a.port == 81);
    CHECK_THROWS_AS(server::parse_bind_address("localhost"), ConfigError);
    CHECK_THROWS_AS(server::parse_bind_address("h:70000"), ConfigError);
    CHECK_THROWS_AS(server::parse_bind_address("h:12x"), ConfigError);

    ::setenv("FLOWSCOPE_BIND", "127.0.0.2:7001", 1);
    CHECK(server::resolve_bind_address("127.0.0.1:8080").port == 7001);
    ::unsetenv("FLOWSCOPE_BIND");
    CHECK(server::resolve_bind_address("127.0.0.1:8080").port == 8080);
  }

  TEST_CASE("snapshot holder swaps atomically and keeps old readers alive") {
    auto first = fixture_snapshot();
    server::SnapshotHolder holder(first);
    const auto held = holder.get();
    holder.replace(std::make_shared<const Snapshot>(SessionStore{}, std::vector<TaskDefinition>{navigation_task()}));
    CHECK(held->store().size() == 3);
    CHECK(holder.get()->store().size() == 0);
  }

  TEST_CASE("live server over HTTP") {
    const auto snap = fixture_snapshot();
    server::ApiServer srv(snap);
    const int port = srv.bind({"127.0.0.1", 0});
    REQUIRE(port > 0);
    std::thread loop([&] { srv.listen(); });
    srv.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/tasks");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == views::tasks_json(*snap));
    CHECK(res->get_header_value("Content-Type") == "application/json");

    res = client.Get("/tasks/navigation/sankey?p_min=0.2");
    REQUIRE(res);
    CHECK(res->body == views::task_view_json(snap->task("navigation"), {0.2}));

    res = client.Get("/sequences/unknown/timeline");
    REQUIRE(res);
    CHECK(res->status == 404);

    res = client.Get("/tasks/navigation/sankey?p_min=0.1&p_min=0.2");
    REQUIRE(res);
    CHECK(res->status == 400);

    srv.reload(std::make_shared<const Snapshot>(SessionStore{}, std::vector<TaskDefinition>{navigation_task()}));
    res = client.Get("/tasks");
    REQUIRE(res);
    CHECK(json::parse(res->body)["session_count"] == 0);

    srv.stop();
    loop.join();
  }

  TEST_CASE("static directory must exist") {
    server::ServerOptions opts;
    opts.static_dir = "/nonexistent/flowscope/assets";
    CHECK_THROWS_AS(server::ApiServer(fixture_snapshot(), opts), NotFoundError);
  }
}
