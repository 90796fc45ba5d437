// Acceptance suite: one PASS/FAIL line per criterion with the measured
// values, detail lines indented below it. Exit status is non-zero when a
// criterion fails in a part not listed with --known-failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/SVD>
#include <json.hpp>

#include "flatsel/dataset.hpp"
#include "flatsel/distortion.hpp"
#include "flatsel/losses.hpp"
#include "flatsel/param.hpp"
#include "flatsel/postprocess.hpp"
#include "flatsel/selectors.hpp"
#include "flatsel/service.hpp"
#include "flatsel/shapes.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

using namespace flatsel;
using nlohmann::json;

namespace {

struct Outcome {
    std::string summary;
    std::vector<std::string> details;
    std::vector<std::string> failing;  // parts that missed the bar; empty = pass
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> bfs_ball(const TriMesh& m, int seed, int target) {
    std::vector<char> in(m.num_faces(), 0);
    std::vector<int> queue{seed};
    in[seed] = 1;
    for (std::size_t h = 0; h < queue.size() && static_cast<int>(queue.size()) < target; ++h)
        for (int g : m.neighbors(queue[h]))
            if (!in[g] && static_cast<int>(queue.size()) < target) {
                in[g] = 1;
                queue.push_back(g);
            }
    return queue;
}

// ---------------------------------------------------------------------------

Outcome indicator_equivalence() {
    Outcome out;
    const std::vector<std::pair<std::string, Primitive>> meshes{
        {"hemisphere", hemisphere(6, 16)},    {"capped cylinder", cylinder(16, 6)}, {"torus", torus(24, 12)},
        {"icosphere", icosphere(2)},          {"cube", cube(4)},                    {"cone", cone(12, 4)},
        {"three-sided cube", three_sided_cube(4)}};
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double worst = 0.0;
    int monotone = 0;
    for (const auto& [name, prim] : meshes) {
        const TriMesh m = prim.mesh();
        const int seed = m.num_faces() / 3;
        Patch p;
        for (double frac = 0.4; frac > 0.01; frac *= 0.8) {
            const auto ball = bfs_ball(m, seed, static_cast<int>(frac * m.num_faces()));
            p = make_patch(m, ball, seed);
            if (p.is_disk) break;
        }
        if (!p.is_disk) {
            out.failing.push_back(name);
            out.details.push_back(name + ": no disk ball found");
            continue;
        }
        const Pins local = farthest_vertex_pair(m, p);
        const Pins global{p.vertex_origin[local[0]], p.vertex_origin[local[1]]};
        const UVMap lm = lscm(m, p, local);
        const UVMap wm = wlscm(m, WeightField::indicator(m.num_faces(), p.faces), global);
        double err = 0.0;
        for (int v = 0; v < p.num_vertices(); ++v)
            err = std::max(err, (lm.uv.row(v) - wm.uv.row(p.vertex_origin[v])).norm());
        worst = std::max(worst, err);

        std::vector<double> disp;
        for (double d : deltas) {
            WeightField w = WeightField::constant(m.num_faces(), d);
            for (int f : p.faces) w[f] = 1.0;
            const UVMap dm = wlscm(m, w, global);
            double x = 0.0;
            for (int v = 0; v < p.num_vertices(); ++v)
                x = std::max(x, (dm.uv.row(p.vertex_origin[v]) - wm.uv.row(p.vertex_origin[v])).norm());
            disp.push_back(x);
        }
        const bool shrinks = disp[0] > disp[1] && disp[1] > disp[2];
        monotone += shrinks;
        if (!(err < 1e-8) || !shrinks) out.failing.push_back(name);
        out.details.push_back(fmt("%s: %d of %d faces, max vertex error %.2e, displacement %.2e > %.2e > %.2e%s",
                                  name.c_str(), p.num_faces(), m.num_faces(), err, disp[0], disp[1], disp[2],
                                  shrinks ? "" : "  NOT SHRINKING"));
    }
    out.summary = fmt("%zu meshes, max vertex error %.2e (< 1e-8), displacement shrinking on %d/%zu", meshes.size(),
                      worst, monotone, meshes.size());
    return out;
}

Outcome gradient_suite() {
    Outcome out;
    const std::vector<std::pair<std::string, Primitive>> meshes{
        {"hemisphere(2,6)", hemisphere(2, 6)},
        {"hemisphere(3,8)", hemisphere(3, 8)},
        {"open cone(6,2)", cone(6, 2, 1.0, 1.0, false)},
        {"cone(6,2)", cone(6, 2)},
        {"cube(1)", cube(1)},
        {"cube(2)", cube(2)},
        {"tetrahedron(1)", tetrahedron(1)},
        {"tetrahedron(2)", tetrahedron(2)},
        {"plane(4,3)", plane_grid(4, 3)},
        {"open cylinder(6,2)", cylinder(6, 2, 1.0, 2.0, false)},
        {"cylinder(6,2)", cylinder(6, 2)},
        {"icosphere(0)", icosphere(0)},
        {"three-sided cube(2)", three_sided_cube(2)},
        {"torus(6,4)", torus(6, 4)},
    };
    LossConfig cfg;
    cfg.gamma = 0.05;
    const double h = 1e-5;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.55, 0.95);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int checked = 0;
    for (const auto& [name, prim] : meshes) {
        const TriMesh m = prim.mesh();
        if (m.num_faces() > 50) {
            out.failing.push_back(name);
            out.details.push_back(name + ": more than 50 faces");
            continue;
        }
        WeightField w(std::vector<double>(m.num_faces()));
        for (auto& x : w.values) x = u(rng);
        const auto g = grad_weights(m, w, 0, cfg);
        double mesh_worst = 0.0;
        int mesh_checked = 0;
        for (int f = 0; f < m.num_faces(); ++f) {
            if (std::abs(g.grad[f]) <= 1e-8) continue;
            WeightField a = w, b = w;
            a[f] += h;
            b[f] -= h;
            const double fd = (total_loss(m, a, 0, cfg).total - total_loss(m, b, 0, cfg).total) / (2 * h);
            mesh_worst = std::max(mesh_worst, std::abs(fd - g.grad[f]) / std::abs(g.grad[f]));
            ++mesh_checked;
        }
        worst = std::max(worst, mesh_worst);
        checked += mesh_checked;
        if (!(mesh_worst < 1e-4)) out.failing.push_back(name);
        out.details.push_back(fmt("%s: %d faces, %d components checked, max relative error %.2e", name.c_str(),
                                  m.num_faces(), mesh_checked, mesh_worst));
    }
    const double t = seconds_since(t0);
    if (!(t < 60.0)) out.failing.push_back("runtime");
    out.summary = fmt("%zu meshes, %d components, max relative error %.2e (< 1e-4), %.2f s (< 60 s)", meshes.size(),
                      checked, worst, t);
    return out;
}

Outcome loss_point_values() {
    Outcome out;
    LossConfig cfg;
    cfg.alpha = 5.0;
    const TriMesh grid = plane_grid(2, 2).mesh();
    const double th = threshold_loss(grid, std::vector<double>(grid.num_faces(), cfg.gamma), whole_mesh_patch(grid), cfg);
    const double th_err = std::abs(th - (1.0 - std::exp(-1.0)));

    // two triangles meeting at a right angle along one edge
    const TriMesh hinge = TriMesh::build({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2}, {1, 0, 3}});
    cfg.omega = 0.1;
    const double sm = smooth_loss(hinge, WeightField({1.0, 0.0}), cfg);
    const double sm_err = std::abs(sm - (-0.1 * std::log(0.5)));

    if (!(th_err <= 1e-12)) out.failing.push_back("threshold");
    if (!(sm_err <= 1e-12)) out.failing.push_back("smooth");
    out.summary = fmt("threshold %.17g (err %.1e), smooth %.17g (err %.1e), tolerance 1e-12", th, th_err, sm, sm_err);
    return out;
}

Outcome developable_recovery() {
    Outcome out;
    const Primitive prim = cylinder(48, 20, 1.0, 2.0, false);
    const TriMesh m = prim.mesh();
    int side_total = 0, cap_total = 0;
    for (int l : prim.labels) (l == 0 ? side_total : cap_total)++;
    const int seed = m.num_faces() / 2 + 7;
    SelectorConfig cfg;
    cfg.dcharts = DChartsConfig::proxy_biased();
    std::vector<std::string> parts;
    for (SelectorKind k : {SelectorKind::greedy, SelectorKind::dcharts, SelectorKind::optimized}) {
        const std::string name = selector_name(k);
        const Selection sel = run_selector(m, seed, k, cfg);
        const FinalizeResult fin = finalize_patch(m, sel.weights, seed);
        int side = 0, caps = 0;
        for (int f : fin.patch.faces) (prim.labels[f] == 0 ? side : caps)++;
        const double side_pct = 100.0 * side / side_total;
        const double cap_pct = cap_total ? 100.0 * caps / cap_total : 0.0;
        const double max_di = fin.report.max_DI();
        const bool ok = side_pct >= 95.0 && cap_pct <= 1.0 && max_di < 0.05;
        if (!ok) out.failing.push_back(name);
        parts.push_back(fmt("%s side %.1f%%", name.c_str(), side_pct));
        out.details.push_back(fmt("%s: side %d/%d (%.1f%%, >= 95%%), caps %d/%d, max D_I %.2e (< 0.05)", name.c_str(),
                                  side, side_total, side_pct, caps, cap_total, max_di));
    }
    out.summary = fmt("open cylinder, %d faces: ", m.num_faces());
    for (std::size_t i = 0; i < parts.size(); ++i) out.summary += (i ? ", " : "") + parts[i];
    return out;
}

Outcome graphcut_optimality() {
    Outcome out;
    const std::vector<std::pair<std::string, Primitive>> meshes{
        {"cube(1)", cube(1)},           {"tetrahedron(1)", tetrahedron(1)}, {"tetrahedron(2)", tetrahedron(2)},
        {"plane(4,2)", plane_grid(4, 2)}, {"hemisphere(2,4)", hemisphere(2, 4)}, {"open cone(5,1)", cone(5, 1, 1.0, 1.0, false)}};
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    int cases = 0, exact = 0;
    double worst = 0.0;
    for (const auto& [name, prim] : meshes) {
        const TriMesh m = prim.mesh();
        const int n = m.num_faces();
        if (n > 16) {
            out.failing.push_back(name);
            continue;
        }
        int mesh_exact = 0, mesh_cases = 0;
        for (Unary kind : {Unary::log_prob, Unary::linear})
            for (int trial = 0; trial < 5; ++trial) {
                WeightField w{std::vector<double>(n)};
                for (auto& x : w.values) x = u(rng);
                GraphcutOptions opts;
                opts.unary = kind;
                const WeightField cut = graphcut_smooth(m, w, opts);
                std::vector<char> l(n);
                for (int f = 0; f < n; ++f) l[f] = cut[f] > 0.5;
                const double e = graphcut_energy(m, w, l, opts);
                double best = std::numeric_limits<double>::infinity();
                for (long mask = 0; mask < (1L << n); ++mask) {
                    for (int f = 0; f < n; ++f) l[f] = (mask >> f) & 1;
                    best = std::min(best, graphcut_energy(m, w, l, opts));
                }
                worst = std::max(worst, std::abs(e - best));
                mesh_exact += e == best;
                ++mesh_cases;
            }
        cases += mesh_cases;
        exact += mesh_exact;
        if (mesh_exact != mesh_cases) out.failing.push_back(name);
        out.details.push_back(fmt("%s: %d faces, %d/%d exact", name.c_str(), n, mesh_exact, mesh_cases));
    }
    out.summary = fmt("%d labellings on %zu meshes, %d equal the exhaustive minimum exactly, max gap %.1e", cases,
                      meshes.size(), exact, worst);
    return out;
}

Outcome isometric_refiner() {
    Outcome out;
    auto check_trace = [&](const std::string& name, const TriMesh& m) {
        const Patch p = cut_to_disk(m, whole_mesh_patch(m));
        const UVMap r = isometric_refine(m, p, lscm(m, p), 100, 0.0);
        int rises = 0;
        double worst_rise = 0.0;
        for (std::size_t i = 1; i < r.energy_trace.size(); ++i)
            if (r.energy_trace[i] > r.energy_trace[i - 1]) {
                ++rises;
                worst_rise = std::max(worst_rise, r.energy_trace[i] - r.energy_trace[i - 1]);
            }
        if (rises) out.failing.push_back(name);
        out.details.push_back(fmt("%s: %d iterations, energy %.4e -> %.4e, %d increases (max %.1e)", name.c_str(),
                                  r.iterations, r.energy_trace.front(), r.energy_trace.back(), rises, worst_rise));
        return rises;
    };
    int rises = check_trace("hemisphere", hemisphere(8, 20).mesh());

    Primitive noisy = cylinder(32, 12, 1.0, 2.0, false);
    std::mt19937 rng(3);
    std::normal_distribution<double> n(0.0, 0.01);
    noisy.transform([&](const Vec3& x) { return Vec3(x + Vec3(n(rng), n(rng), n(rng))); });
    rises += check_trace("noisy cylinder", noisy.mesh());

    const TriMesh clean = cylinder(32, 12, 1.0, 2.0, false).mesh();
    const Patch p = cut_to_disk(clean, whole_mesh_patch(clean));
    const UVMap r = isometric_refine(clean, p, lscm(clean, p), 100, 0.0);
    const auto arap = arap_energy(clean, p, r.uv);
    const double max_arap = *std::max_element(arap.begin(), arap.end());
    if (!(max_arap <= 1e-8)) out.failing.push_back("cylinder side");
    out.details.push_back(fmt("cylinder side: %d iterations, max per-face D_arap %.2e", r.iterations, max_arap));
    out.summary = fmt("%d energy increases over 100 iterations, cylinder side max D_arap %.2e (<= 1e-8)", rises,
                      max_arap);
    return out;
}

struct DatasetFixture {
    std::filesystem::path dir;
    std::vector<LabeledShape> shapes;
};

Outcome pipeline_topology(const DatasetFixture& data) {
    Outcome out;
    std::vector<int> usable;
    for (int i = 0; i < static_cast<int>(data.shapes.size()); ++i)
        if (!data.shapes[i].seeds.empty()) usable.push_back(i);
    if (usable.empty()) {
        out.failing.push_back("dataset");
        out.summary = "generated dataset has no seeds";
        return out;
    }
    const std::vector<SelectorKind> kinds{SelectorKind::optimized, SelectorKind::dcharts, SelectorKind::logmap,
                                          SelectorKind::greedy};
    std::mt19937 rng(11);
    const int draws = 200;
    int ok = 0;
    std::vector<int> per_kind(kinds.size(), 0);
    for (int d = 0; d < draws; ++d) {
        const LabeledShape& s = data.shapes[usable[rng() % usable.size()]];
        const int seed = s.seeds[rng() % s.seeds.size()].face;
        const std::size_t k = rng() % kinds.size();
        ++per_kind[k];
        std::string why;
        try {
            const Selection sel = run_selector(s.mesh, seed, kinds[k]);
            const FinalizeResult fin = finalize_patch(s.mesh, sel.weights, seed);
            if (!fin.patch.is_disk || fin.patch.boundary_loops.size() != 1 || fin.patch.euler_characteristic() != 1)
                why = "not a disk";
            else if (!fin.patch.contains(seed))
                why = "seed missing";
        } catch (const std::exception& e) {
            why = std::string("threw: ") + e.what();
        }
        if (why.empty()) {
            ++ok;
        } else {
            out.failing.push_back(selector_name(kinds[k]));
            out.details.push_back(fmt("draw %d: seed %d, %s: %s", d, seed, selector_name(kinds[k]).c_str(), why.c_str()));
        }
    }
    out.summary = fmt("%d/%d draws disk with seed (%zu shapes; optimized %d, dcharts %d, logmap %d, greedy %d)", ok,
                      draws, usable.size(), per_kind[0], per_kind[1], per_kind[2], per_kind[3]);
    return out;
}

// Map and Jacobians computed here from scratch: pins on an edge of the
// middle face instead of the farthest pair, Jacobians from the 3D corners.
std::pair<double, double> independent_distortion(const TriMesh& m, const std::vector<int>& faces) {
    const Patch cut = cut_to_disk(m, make_patch(m, faces, faces[faces.size() / 2]));
    const auto& mid = cut.corners[cut.num_faces() / 2];
    const UVMap init = lscm(m, cut, Pins{mid[0], mid[1]});
    const UVMap r = isometric_refine(m, cut, init, 100, 1e-8);
    double di = 0.0, dc = 0.0;
    for (int i = 0; i < cut.num_faces(); ++i) {
        const auto& fv = m.face(cut.faces[i]);
        const Vec3 x0 = m.vertex(fv[0]), x1 = m.vertex(fv[1]), x2 = m.vertex(fv[2]);
        const Vec3 e1 = (x1 - x0).normalized();
        const Vec3 nrm = e1.cross(x2 - x0).normalized();
        const Vec3 e2 = nrm.cross(e1);
        Mat2 P, U;
        P << (x1 - x0).dot(e1), (x2 - x0).dot(e1), 0.0, (x2 - x0).dot(e2);
        const auto& c = cut.corners[i];
        U.col(0) = (r.uv.row(c[1]) - r.uv.row(c[0])).transpose();
        U.col(1) = (r.uv.row(c[2]) - r.uv.row(c[0])).transpose();
        const Eigen::Vector2d s = Eigen::JacobiSVD<Mat2>(U * P.inverse()).singularValues();
        di += std::pow(std::max(s[0], 1.0 / s[1]) - 1.0, 2);
        dc += std::pow(s[0] - s[1], 2);
    }
    return {di / cut.num_faces(), dc / cut.num_faces()};
}

Outcome dataset_consistency(const DatasetFixture& data) {
    Outcome out;
    int valid = 0, passed = 0;
    double worst_di = 0.0, worst_dc = 0.0;
    for (std::size_t i = 0; i < data.shapes.size(); ++i) {
        const LabeledShape& s = data.shapes[i];
        for (int id : s.valid_segments) {
            const Segment& seg = s.segments[id];
            ++valid;
            double di = std::numeric_limits<double>::infinity(), dc = di;
            try {
                std::tie(di, dc) = independent_distortion(s.mesh, seg.faces);
            } catch (const std::exception& e) {
                out.details.push_back(fmt("shape %zu segment %d threw: %s", i, id, e.what()));
            }
            worst_di = std::max(worst_di, di);
            worst_dc = std::max(worst_dc, dc);
            if (di <= 0.05 && dc <= 0.05) {
                ++passed;
            } else {
                out.failing.push_back(fmt("shape %zu segment %d", i, id));
                out.details.push_back(fmt("shape %zu segment %d: %zu faces, mean D_I %.4f, mean D_C %.4f (stored %.4f, %.4f)",
                                          i, id, seg.faces.size(), di, dc, seg.mean_DI, seg.mean_DC));
            }
        }
    }
    if (valid == 0) out.failing.push_back("dataset");
    out.summary = fmt("%d/%d valid segments re-verify, worst mean D_I %.4f, worst mean D_C %.4f (<= 0.05)", passed,
                      valid, worst_di, worst_dc);
    return out;
}

Outcome latency() {
    Outcome out;
    MeshService service;
    HttpServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    if (port <= 0) {
        out.failing.push_back("bind");
        out.summary = "could not bind a local port";
        return out;
    }
    std::thread thread([&] { server.run(); });
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(60, 0);

    const std::vector<std::pair<std::string, Primitive>> meshes{
        {"open cylinder", cylinder(100, 50, 1.0, 2.0, false)},
        {"capped cylinder", cylinder(80, 40)},
        {"torus", torus(100, 50)},
        {"hemisphere", hemisphere(50, 100)},
    };
    double worst = 0.0;
    std::string worst_what;
    for (const auto& [name, prim] : meshes) {
        const TriMesh m = prim.mesh();
        std::ostringstream obj;
        write_obj(obj, m);
        auto up = cli.Post("/v1/meshes", obj.str(), "text/plain");
        if (!up || up->status != 200) {
            out.failing.push_back(name);
            out.details.push_back(name + ": upload failed");
            continue;
        }
        const std::string id = json::parse(up->body).at("mesh_id");
        for (const std::string sel : {"greedy", "logmap"}) {
            double mesh_worst = 0.0;
            for (int seed : {0, m.num_faces() / 3, 2 * m.num_faces() / 3}) {
                const std::string body = json{{"mesh_id", id}, {"seed_face", seed}, {"selector", sel}}.dump();
                const auto t0 = std::chrono::steady_clock::now();
                auto r = cli.Post("/v1/select", body, "application/json");
                const double t = seconds_since(t0);
                if (!r || r->status != 200) {
                    out.failing.push_back(name + " " + sel);
                    out.details.push_back(fmt("%s %s seed %d: request failed", name.c_str(), sel.c_str(), seed));
                    continue;
                }
                mesh_worst = std::max(mesh_worst, t);
                if (t > worst) {
                    worst = t;
                    worst_what = fmt("%s %s seed %d", name.c_str(), sel.c_str(), seed);
                }
            }
            if (!(mesh_worst < 2.0)) out.failing.push_back(name + " " + sel);
            out.details.push_back(fmt("%s (%d faces) %s: slowest of 3 seeds %.3f s", name.c_str(), m.num_faces(),
                                      sel.c_str(), mesh_worst));
        }
    }
    server.stop();
    thread.join();
    out.summary = fmt("slowest /v1/select %.3f s (%s), target < 2 s%s", worst, worst_what.c_str(),
                      worst >= 5.0 ? ", HARD FAIL over 5 s" : "");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flatsel acceptance suite"};
    std::vector<std::string> known;
    int dataset_count = 6;
    std::uint64_t rng_seed = 2024;
    app.add_option("--known-failure", known, "criterion:part allowed to fail without failing the run");
    app.add_option("--dataset-count", dataset_count, "shapes in the generated dataset")->check(CLI::PositiveNumber);
    app.add_option("--rng-seed", rng_seed, "dataset rng seed");
    CLI11_PARSE(app, argc, argv);

    DatasetFixture data;
    data.dir = std::filesystem::temp_directory_path() / fmt("flatsel_acceptance_%llu", static_cast<unsigned long long>(rng_seed));
    std::filesystem::remove_all(data.dir);
    const DatasetManifest manifest = generate_dataset(data.dir, rng_seed, dataset_count);
    for (const auto& name : manifest.shapes) data.shapes.push_back(load_shape(data.dir / name));

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"indicator_equivalence", indicator_equivalence},
        {"gradient_suite", gradient_suite},
        {"loss_point_values", loss_point_values},
        {"developable_recovery", developable_recovery},
        {"graphcut_optimality", graphcut_optimality},
        {"isometric_refiner", isometric_refiner},
        {"pipeline_topology", [&] { return pipeline_topology(data); }},
        {"dataset_consistency", [&] { return dataset_consistency(data); }},
        {"latency", latency},
    };
    const std::set<std::string> allowed(known.begin(), known.end());
    int passed = 0, unexpected = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.summary = std::string("threw: ") + e.what();
            o.failing.push_back("exception");
        }
        std::vector<std::string> tolerated;
        for (const auto& part : o.failing) {
            if (allowed.count(name + ":" + part))
                tolerated.push_back(part);
            else
                ++unexpected;
        }
        passed += o.failing.empty();
        std::printf("%s %s: %s\n", o.failing.empty() ? "PASS" : "FAIL", name.c_str(), o.summary.c_str());
        for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
        for (const auto& t : tolerated) std::printf("    known failure: %s:%s\n", name.c_str(), t.c_str());
        std::fflush(stdout);
    }
    std::filesystem::remove_all(data.dir);
    std::printf("%d/%zu criteria pass, %d unexpected failure(s)\n", passed, criteria.size(), unexpected);
    return unexpected == 0 ? 0 : 1;
}
