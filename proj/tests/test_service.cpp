#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <thread>

#include "flatsel/service.hpp"
#include "flatsel/shapes.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

using namespace flatsel;
using nlohmann::json;

namespace {

std::string obj_text(const TriMesh& m) {
    std::ostringstream out;
    write_obj(out, m);
    return out.str();
}

std::string open_cylinder() { return obj_text(cylinder(32, 10, 1.0, 2.0, false).mesh()); }

json without_timing(json j) {
    j.erase("timing");
    return j;
}

std::string select_body(const std::string& id, int seed, const std::string& selector = "greedy") {
    return json{{"mesh_id", id}, {"seed_face", seed}, {"selector", selector}}.dump();
}

}  // namespace

TEST_CASE("upload and fetch") {
    MeshService s;
    auto up = s.upload(open_cylinder());
    REQUIRE(up.status == 200);
    CHECK(up.body["n_faces"] == 640);
    const std::string id = up.body["mesh_id"];
    CHECK(s.upload(open_cylinder()).body["mesh_id"] == id);  // keyed by content
    CHECK(s.size() == 1);

    auto got = s.get_mesh(id);
    REQUIRE(got.status == 200);
    CHECK(got.body["faces"].size() == 3 * 640);
    CHECK(got.body["vertices"].size() == 3 * 352);
    CHECK(s.get_mesh("0123").status == 404);
    CHECK(s.health().body["meshes"] == 1);
}

TEST_CASE("upload limits and bad input") {
    ApiLimits lim;
    lim.max_faces = 100;
    lim.max_upload_bytes = 1 << 20;
    MeshService s(lim);
    CHECK(s.upload(open_cylinder()).status == 413);
    CHECK(s.upload(std::string((1 << 20) + 1, ' ')).status == 413);
    CHECK(s.upload("v 0 0 0\nf 1 2 3\n").status == 422);
    CHECK(s.upload("").status == 422);
    CHECK(s.size() == 0);
}

TEST_CASE("select on a stored cylinder") {
    MeshService s;
    const std::string id = s.upload(open_cylinder()).body["mesh_id"];
    auto r = s.select(select_body(id, 42));
    REQUIRE(r.status == 200);
    const auto faces = r.body["patch_faces"].get<std::vector<int>>();
    CHECK(r.body["N"].get<int>() > 0);
    CHECK(std::find(faces.begin(), faces.end(), 42) != faces.end());
    CHECK(r.body["N"] == faces.size());
    CHECK(r.body["weights"].size() == 640);
    CHECK(r.body["per_face_DI"].size() == faces.size());
    CHECK(r.body["uv"]["faces"].size() == faces.size());
    CHECK(r.body["config"]["selector"] == "greedy");
    CHECK(r.body["timing"]["seg_time"].get<double>() >= 0.0);
    CHECK(r.body["is_disk"] == true);

    for (const char* sel : {"logmap", "dcharts", "optimized"}) {
        auto q = s.select(select_body(id, 42, sel));
        CHECK(q.status == 200);
        CHECK(q.body["timing"].contains("seg_time"));
    }
}

TEST_CASE("select errors") {
    MeshService s;
    const std::string id = s.upload(open_cylinder()).body["mesh_id"];
    CHECK(s.select(select_body(id, 640)).status == 422);
    CHECK(s.select(select_body(id, -1)).status == 422);
    CHECK(s.select(select_body(id, 1, "magic")).status == 422);
    CHECK(s.select(select_body("ffff", 1)).status == 404);
    CHECK(s.select("{not json").status == 422);
    CHECK(s.select(R"({"seed_face": 1})").status == 422);
    CHECK(s.select(json{{"mesh_id", id}, {"seed_face", "1"}}.dump()).status == 422);
    CHECK(s.select(json{{"mesh_id", id}, {"seed_face", 1}, {"config", {{"bogus", 1}}}}.dump()).status == 422);
    CHECK(s.select(json{{"mesh_id", id}, {"seed_face", 1}, {"lambda", 0}}.dump()).status == 422);
    auto e = s.select(select_body(id, 640));
    CHECK(e.body["error"].get<std::string>().find("out of range") != std::string::npos);
}

TEST_CASE("config overrides are echoed") {
    MeshService s;
    const std::string id = s.upload(open_cylinder()).body["mesh_id"];
    auto r = s.select(
        json{{"mesh_id", id}, {"seed_face", 3}, {"selector", "logmap"}, {"config", {{"lambda", 0.02}}}}.dump());
    REQUIRE(r.status == 200);
    CHECK(r.body["config"]["lambda"] == 0.02);
}

TEST_CASE("identical and concurrent requests agree") {
    MeshService s;
    const std::string id = s.upload(open_cylinder()).body["mesh_id"];
    const std::string body = select_body(id, 100);
    const json first = without_timing(s.select(body).body);
    CHECK(without_timing(s.select(body).body).dump() == first.dump());

    std::vector<std::string> out(4);
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] { out[i] = without_timing(s.select(body).body).dump(); });
    for (auto& t : ts) t.join();
    for (const auto& o : out) CHECK(o == first.dump());
}

TEST_CASE("bind address from the environment") {
    ::unsetenv("FLATSEL_BIND");
    CHECK(bind_address_from_env() == std::pair<std::string, int>{"127.0.0.1", 8080});
    ::setenv("FLATSEL_BIND", "0.0.0.0:9123", 1);
    CHECK(bind_address_from_env() == std::pair<std::string, int>{"0.0.0.0", 9123});
    ::setenv("FLATSEL_BIND", ":81", 1);
    CHECK(bind_address_from_env() == std::pair<std::string, int>{"127.0.0.1", 81});
    ::setenv("FLATSEL_BIND", "host:x", 1);
    CHECK_THROWS(bind_address_from_env());
    ::unsetenv("FLATSEL_BIND");
}

TEST_CASE("HTTP round trip") {
    MeshService s;
    HttpServer server(s);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.run(); });
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(30, 0);

    auto h = cli.Get("/v1/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(json::parse(h->body)["status"] == "ok");

    auto up = cli.Post("/v1/meshes", open_cylinder(), "text/plain");
    REQUIRE(up);
    REQUIRE(up->status == 200);
    const std::string id = json::parse(up->body)["mesh_id"];

    auto g = cli.Get("/v1/meshes/" + id);
    REQUIRE(g);
    CHECK(g->status == 200);
    CHECK(cli.Get("/v1/meshes/abc")->status == 404);

    auto r1 = cli.Post("/v1/select", select_body(id, 42), "application/json");
    auto r2 = cli.Post("/v1/select", select_body(id, 42), "application/json");
    REQUIRE(r1);
    REQUIRE(r2);
    CHECK(r1->status == 200);
    CHECK(without_timing(json::parse(r1->body)) == without_timing(json::parse(r2->body)));
    CHECK(cli.Post("/v1/select", select_body(id, 9999), "application/json")->status == 422);

    auto nf = cli.Get("/v2/health");
    REQUIRE(nf);
    CHECK(nf->status == 404);
    CHECK(json::parse(nf->body).contains("error"));

    server.stop();
    t.join();
}
