#include "flatsel/service.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "flatsel/config.hpp"

namespace flatsel {

using nlohmann::json;

SelectOutcome run_select(const TriMesh& mesh, const SelectRequest& req) {
    if (req.seed_face < 0 || req.seed_face >= mesh.num_faces())
        throw RequestError("seed face " + std::to_string(req.seed_face) + " out of range [0, " +
                           std::to_string(mesh.num_faces()) + ")");
    if (!(req.lambda > 0)) throw RequestError("lambda must be positive");
    SelectorConfig cfg;
    try {
        apply_overrides(cfg, req.selector, req.overrides);
    } catch (const std::invalid_argument& e) {
        throw RequestError(e.what());
    }
    SelectOutcome out;
    out.request = req;
    out.config = selector_config_json(req.selector, cfg);
    out.selection = run_selector(mesh, req.seed_face, req.selector, cfg);
    FinalizeOptions fo;
    fo.smooth = req.postprocess;
    fo.lambda = req.lambda;
    out.final = finalize_patch(mesh, out.selection.weights, req.seed_face, fo);
    out.final.report.seg_time = out.selection.seg_time;
    return out;
}

json report_json(const DistortionReport& r) {
    return {{"faces", r.faces},
            {"per_face_arap", r.per_face_arap},
            {"per_face_DI", r.per_face_DI},
            {"per_face_DC", r.per_face_DC},
            {"flagged", std::vector<int>(r.flagged.begin(), r.flagged.end())},
            {"lambda", r.lambda},
            {"percent_DI", r.percent_DI},
            {"N", r.n_faces},
            {"max_DI", r.max_DI()},
            {"flips_corrected", r.flips_corrected},
            {"seg_time", r.seg_time},
            {"uv_time", r.uv_time}};
}

json patch_json(const SelectOutcome& out) {
    const Patch& p = out.final.patch;
    return {{"seed", p.seed},
            {"faces", p.faces},
            {"is_disk", p.is_disk},
            {"seam_cuts", p.seam_cuts},
            {"selector", selector_name(out.request.selector)},
            {"config", out.config},
            {"config_hash", config_hash(out.config)},
            {"postprocess", out.request.postprocess}};
}

void write_uv_obj(std::ostream& out, const TriMesh& mesh, const Patch& patch, const UVMap& uv) {
    char buf[96];
    for (int v = 0; v < patch.num_vertices(); ++v) {
        const Vec3& x = mesh.vertex(patch.vertex_origin[v]);
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", x.x(), x.y(), x.z());
        out << buf;
    }
    for (int v = 0; v < patch.num_vertices(); ++v) {
        std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", uv.uv(v, 0), uv.uv(v, 1));
        out << buf;
    }
    for (const auto& c : patch.corners)
        out << "f " << c[0] + 1 << '/' << c[0] + 1 << ' ' << c[1] + 1 << '/' << c[1] + 1 << ' ' << c[2] + 1 << '/'
            << c[2] + 1 << "\n";
}

std::string mesh_id(const TriMesh& mesh) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mesh.content_hash()));
    return buf;
}

namespace {

ApiResponse fail(int status, const std::string& msg) { return {status, json{{"error", msg}}}; }

}  // namespace

ApiResponse MeshService::health() const {
    return {200, json{{"status", "ok"}, {"api", "v1"}, {"meshes", size()}}};
}

std::shared_ptr<const TriMesh> MeshService::find(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = meshes_.find(id);
    return it == meshes_.end() ? nullptr : it->second;
}

std::size_t MeshService::size() const {
    std::shared_lock lock(mutex_);
    return meshes_.size();
}

ApiResponse MeshService::upload(const std::string& obj_text) {
    if (obj_text.size() > limits_.max_upload_bytes)
        return fail(413, "upload larger than " + std::to_string(limits_.max_upload_bytes) + " bytes");
    std::shared_ptr<const TriMesh> mesh;
    try {
        mesh = std::make_shared<const TriMesh>(parse_obj_string(obj_text));
    } catch (const std::exception& e) {
        return fail(422, std::string("invalid OBJ: ") + e.what());
    }
    if (mesh->num_faces() == 0) return fail(422, "mesh has no faces");
    if (mesh->num_faces() > limits_.max_faces)
        return fail(413, "mesh has " + std::to_string(mesh->num_faces()) + " faces, limit " +
                             std::to_string(limits_.max_faces));
    const std::string id = mesh_id(*mesh);
    {
        std::unique_lock lock(mutex_);
        meshes_.try_emplace(id, mesh);
    }
    return {200, json{{"mesh_id", id}, {"n_faces", mesh->num_faces()}, {"n_vertices", mesh->num_vertices()}}};
}

ApiResponse MeshService::get_mesh(const std::string& id) const {
    auto mesh = find(id);
    if (!mesh) return fail(404, "unknown mesh " + id);
    std::vector<double> v;
    v.reserve(3 * mesh->num_vertices());
    for (const Vec3& x : mesh->vertices()) v.insert(v.end(), {x.x(), x.y(), x.z()});
    std::vector<int> f;
    f.reserve(3 * mesh->num_faces());
    for (const auto& t : mesh->faces()) f.insert(f.end(), t.begin(), t.end());
    return {200, json{{"mesh_id", id},
                      {"n_faces", mesh->num_faces()},
                      {"n_vertices", mesh->num_vertices()},
                      {"vertices", v},
                      {"faces", f}}};
}

ApiResponse MeshService::select(const std::string& body) const {
    json j;
    try {
        j = json::parse(body);
    } catch (const std::exception& e) {
        return fail(422, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("mesh_id") || !j["mesh_id"].is_string())
        return fail(422, "mesh_id (string) is required");
    const std::string id = j["mesh_id"];
    auto mesh = find(id);
    if (!mesh) return fail(404, "unknown mesh " + id);

    SelectRequest req;
    try {
        if (!j.contains("seed_face") || !j["seed_face"].is_number_integer())
            throw RequestError("seed_face (integer) is required");
        req.seed_face = j["seed_face"].get<int>();
        const std::string name = j.value("selector", std::string("greedy"));
        auto kind = parse_selector(name);
        if (!kind) throw RequestError("unknown selector '" + name + "'");
        req.selector = *kind;
        if (j.contains("config")) req.overrides = j["config"];
        if (j.contains("postprocess")) {
            if (!j["postprocess"].is_boolean()) throw RequestError("postprocess must be a boolean");
            req.postprocess = j["postprocess"];
        }
        if (j.contains("lambda")) {
            if (!j["lambda"].is_number()) throw RequestError("lambda must be a number");
            req.lambda = j["lambda"];
        }
    } catch (const RequestError& e) {
        return fail(422, e.what());
    } catch (const json::exception& e) {
        return fail(422, e.what());
    }

    SelectOutcome out;
    try {
        out = run_select(*mesh, req);
    } catch (const RequestError& e) {
        return fail(422, e.what());
    } catch (const std::exception& e) {
        return fail(500, std::string("selection failed: ") + e.what());
    }

    const Patch& p = out.final.patch;
    const DistortionReport& r = out.final.report;
    std::vector<std::array<double, 2>> uv(p.num_vertices());
    for (int v = 0; v < p.num_vertices(); ++v) uv[v] = {out.final.uv.uv(v, 0), out.final.uv.uv(v, 1)};
    json res{{"mesh_id", id},
             {"seed_face", req.seed_face},
             {"selector", selector_name(req.selector)},
             {"config", out.config},
             {"config_hash", config_hash(out.config)},
             {"postprocess", req.postprocess},
             {"lambda", req.lambda},
             {"weights", out.selection.weights.values},
             {"patch_faces", p.faces},
             {"is_disk", p.is_disk},
             {"uv", {{"coords", uv}, {"faces", p.corners}, {"vertex_origin", p.vertex_origin}}},
             {"per_face_DI", r.per_face_DI},
             {"percent_DI", r.percent_DI},
             {"N", r.n_faces},
             {"max_DI", r.max_DI()},
             {"timing", {{"seg_time", r.seg_time}, {"uv_time", r.uv_time}}}};
    return {200, std::move(res)};
}

std::pair<std::string, int> bind_address_from_env() {
    std::string host = "127.0.0.1";
    int port = 8080;
    if (const char* env = std::getenv("FLATSEL_BIND"); env && *env) {
        std::string s = env;
        const auto colon = s.rfind(':');
        if (colon == std::string::npos) {
            host = s;
        } else {
            if (colon > 0) host = s.substr(0, colon);
            try {
                port = std::stoi(s.substr(colon + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("FLATSEL_BIND port is not a number: " + s);
            }
        }
    }
    return {host, port};
}

struct HttpServer::Impl {
    httplib::Server srv;
};

HttpServer::HttpServer(MeshService& service) : impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->srv;
    srv.set_payload_max_length((50u << 20) + 1);
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    srv.Get("/v1/health", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.health());
    });
    srv.Post("/v1/meshes", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.upload(req.body));
    });
    srv.Get(R"(/v1/meshes/([0-9A-Za-z]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.get_mesh(req.matches[1]));
    });
    srv.Post("/v1/select", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.select(req.body));
    });
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty())
            res.set_content(json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->srv.bind_to_any_port(host);
    return impl_->srv.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() { impl_->srv.listen_after_bind(); }

void HttpServer::stop() { impl_->srv.stop(); }

}  // namespace flatsel
