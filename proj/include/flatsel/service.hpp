// Selection pipeline shared by the command line and the HTTP service, plus
// the /v1 JSON API over an in-memory mesh cache.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "flatsel/postprocess.hpp"
#include "flatsel/selectors.hpp"

namespace flatsel {

// Bad request content: maps to 422.
struct RequestError : Error {
    using Error::Error;
};

struct SelectRequest {
    int seed_face = -1;
    SelectorKind selector = SelectorKind::greedy;
    nlohmann::json overrides;  // selector config overrides, may be null
    bool postprocess = true;   // graphcut smoothing before the floodfill
    double lambda = 0.05;
};

struct SelectOutcome {
    SelectRequest request;
    nlohmann::json config;  // the exact selector config used
    Selection selection;
    FinalizeResult final;
};

// Validates seed, selector config and lambda (RequestError), then
// select -> finalize_patch.
SelectOutcome run_select(const TriMesh& mesh, const SelectRequest& req);

nlohmann::json patch_json(const SelectOutcome& out);
nlohmann::json report_json(const DistortionReport& report);
// Patch with its duplicated seam vertices: v lines in 3D, vt lines in UV.
void write_uv_obj(std::ostream& out, const TriMesh& mesh, const Patch& patch, const UVMap& uv);

struct ApiLimits {
    std::size_t max_upload_bytes = 50u << 20;
    int max_faces = 200000;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

// Transport-free handlers; serve() wires them to HTTP.
class MeshService {
public:
    explicit MeshService(ApiLimits limits = {}) : limits_(limits) {}

    ApiResponse health() const;
    ApiResponse upload(const std::string& obj_text);
    ApiResponse get_mesh(const std::string& id) const;
    ApiResponse select(const std::string& json_body) const;

    std::shared_ptr<const TriMesh> find(const std::string& id) const;
    std::size_t size() const;

private:
    ApiLimits limits_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const TriMesh>> meshes_;
};

std::string mesh_id(const TriMesh& mesh);

// host:port from FLATSEL_BIND when set, otherwise 127.0.0.1:8080.
std::pair<std::string, int> bind_address_from_env();

// The /v1 routes over HTTP/1.1. Handlers run on the server's thread pool.
class HttpServer {
public:
    explicit HttpServer(MeshService& service);
    ~HttpServer();

    // Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    void run();   // blocks until stop()
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace flatsel
