// flatsel: select | param | eval | gen-dataset | serve
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatsel/config.hpp"
#include "flatsel/dataset.hpp"
#include "flatsel/eval.hpp"
#include "flatsel/service.hpp"

using namespace flatsel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSelectors{"optimized", "dcharts", "logmap", "greedy"};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

// --config takes inline JSON or a path to a JSON file.
json parse_config(const std::string& text) {
    if (text.empty()) return nullptr;
    if (text.front() == '{') return json::parse(text);
    return read_json_file(text);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void write_uv(const fs::path& p, const TriMesh& mesh, const Patch& patch, const UVMap& uv) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    write_uv_obj(out, mesh, patch, uv);
}

HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distortion-aware patch selection on triangle meshes"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t rng_seed = 0;
    app.add_option("--rng-seed", rng_seed, "Seed for every random choice")->capture_default_str();

    // select
    auto* sel = app.add_subcommand("select", "Grow a patch from a seed face and flatten it");
    std::string mesh_path, selector = "greedy", config_text, out_dir = ".";
    int seed = -1;
    double lambda = 0.05;
    bool no_post = false;
    sel->add_option("--mesh", mesh_path, "OBJ file")->required()->check(CLI::ExistingFile);
    sel->add_option("--seed", seed, "Seed face index")->required();
    sel->add_option("--selector", selector)->check(CLI::IsMember(kSelectors))->capture_default_str();
    sel->add_option("--config", config_text, "Selector overrides: inline JSON or a JSON file");
    sel->add_option("--lambda", lambda, "Distortion threshold for %D_I")->capture_default_str();
    sel->add_flag("--no-postprocess", no_post, "Skip graphcut smoothing");
    sel->add_option("--out", out_dir, "Output directory")->capture_default_str();

    // param
    auto* par = app.add_subcommand("param", "Flatten a given patch");
    std::string patch_path, uv_out = "out_uv.obj", report_out = "report.json";
    int refine_iters = 100;
    par->add_option("--mesh", mesh_path, "OBJ file")->required()->check(CLI::ExistingFile);
    par->add_option("--patch", patch_path, "patch.json with faces and seed")->required()->check(CLI::ExistingFile);
    par->add_option("--refine-iters", refine_iters)->check(CLI::NonNegativeNumber)->capture_default_str();
    par->add_option("--lambda", lambda)->capture_default_str();
    par->add_option("--uv-out", uv_out)->capture_default_str();
    par->add_option("--report-out", report_out)->capture_default_str();

    // eval
    auto* ev = app.add_subcommand("eval", "Benchmark selectors on a dataset");
    std::string dataset_dir, eval_out = "bench";
    std::vector<std::string> selectors;
    std::vector<double> lambdas{0.01, 0.025, 0.05, 0.1};
    int threads = 0;
    ev->add_option("--dataset", dataset_dir)->required()->check(CLI::ExistingDirectory);
    ev->add_option("--selectors", selectors, "Comma separated")->delimiter(',')->check(CLI::IsMember(kSelectors));
    ev->add_option("--lambdas", lambdas)->delimiter(',')->capture_default_str();
    ev->add_option("--threads", threads, "0: all cores")->check(CLI::NonNegativeNumber);
    ev->add_option("--out", eval_out)->capture_default_str();

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "Generate labelled near-developable shapes");
    std::string gen_out;
    int count = 10, max_primitives = 3, resolution = 8, max_seeds = 20;
    double threshold = 0.05, frac = 0.05;
    bool no_deform = false, no_augment = false;
    std::vector<std::string> kinds;
    gen->add_option("--out", gen_out)->required();
    gen->add_option("--count", count)->check(CLI::NonNegativeNumber)->capture_default_str();
    gen->add_option("--max-primitives", max_primitives)->check(CLI::Range(1, 5))->capture_default_str();
    gen->add_option("--resolution", resolution)->check(CLI::Range(1, 64))->capture_default_str();
    gen->add_option("--threshold", threshold)->capture_default_str();
    gen->add_option("--frac", frac)->capture_default_str();
    gen->add_option("--max-seeds", max_seeds)->capture_default_str();
    gen->add_option("--kinds", kinds, "Fixed primitive list")
        ->delimiter(',')
        ->check(CLI::IsMember({"cube", "cone", "cylinder", "sphere", "tetrahedron"}));
    gen->add_flag("--no-deform", no_deform);
    gen->add_flag("--no-augment", no_augment);

    // serve
    auto* srv = app.add_subcommand("serve", "Run the HTTP service");
    std::string host;
    int port = -1;
    srv->add_option("--host", host, "Overrides FLATSEL_BIND");
    srv->add_option("--port", port, "Overrides FLATSEL_BIND")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sel) {
            const TriMesh mesh = load_mesh(mesh_path);
            SelectRequest req;
            req.seed_face = seed;
            req.selector = *parse_selector(selector);
            req.overrides = parse_config(config_text);
            req.postprocess = !no_post;
            req.lambda = lambda;
            const SelectOutcome out = run_select(mesh, req);
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "patch.json", patch_json(out).dump(2) + "\n");
            write_uv(fs::path(out_dir) / "out_uv.obj", mesh, out.final.patch, out.final.uv);
            write_text(fs::path(out_dir) / "report.json", report_json(out.final.report).dump(2) + "\n");
            std::printf("N=%d %%D_I=%.3f max_DI=%.3g seg_time=%.3fs uv_time=%.3fs\n", out.final.report.n_faces,
                        out.final.report.percent_DI, out.final.report.max_DI(), out.final.report.seg_time,
                        out.final.report.uv_time);
        } else if (*par) {
            const TriMesh mesh = load_mesh(mesh_path);
            const json pj = read_json_file(patch_path);
            const auto faces = pj.at("faces").get<std::vector<int>>();
            if (faces.empty()) throw std::runtime_error("patch has no faces");
            for (int f : faces)
                if (f < 0 || f >= mesh.num_faces()) throw std::runtime_error("patch face out of range");
            const int s = pj.value("seed", faces.front());
            const Patch patch = make_patch(mesh, faces, s);
            Patch cut;
            const UVMap uv = flatten_patch(mesh, patch, cut, refine_iters);
            write_uv(uv_out, mesh, cut, uv);
            write_text(report_out, report_json(make_report(mesh, cut, uv, lambda)).dump(2) + "\n");
        } else if (*ev) {
            std::vector<SelectorKind> ks;
            for (const auto& s : selectors) ks.push_back(*parse_selector(s));
            BenchOptions bo;
            bo.lambdas = lambdas;
            bo.threads = threads;
            const BenchResult r = run_benchmark(dataset_dir, ks, bo);
            write_benchmark(eval_out, dataset_dir, ks, bo, r);
            for (const auto& f : r.failures)
                std::cerr << "skipped " << f.mesh << " seed " << f.seed_face << " " << f.selector << ": " << f.error
                          << "\n";
            std::printf("%zu records, %zu failures -> %s\n", r.records.size(), r.failures.size(), eval_out.c_str());
        } else if (*gen) {
            GenerateOptions o;
            o.deform = !no_deform;
            o.augment = !no_augment;
            o.resolution = resolution;
            for (const auto& k : kinds) o.kinds.push_back(*parse_primitive(k));
            const DatasetManifest m =
                generate_dataset(gen_out, rng_seed, count, max_primitives, o, threshold, frac, max_seeds);
            std::printf("%zu shapes -> %s\n", m.shapes.size(), gen_out.c_str());
        } else if (*srv) {
            auto [h, p] = bind_address_from_env();
            if (!host.empty()) h = host;
            if (port >= 0) p = port;
            MeshService service;
            HttpServer server(service);
            const int bound = server.bind(h, p);
            if (bound < 0) throw std::runtime_error("cannot bind " + h + ":" + std::to_string(p));
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::printf("listening on http://%s:%d/v1\n", h.c_str(), bound);
            std::fflush(stdout);
            server.run();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
