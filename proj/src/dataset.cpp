#include "flatsel/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "flatsel/distortion.hpp"
#include "flatsel/param.hpp"
#include "flatsel/patch.hpp"
#include "flatsel/shapes.hpp"

namespace flatsel {

namespace {

using Rng = std::mt19937_64;
using json = nlohmann::json;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Primitive make_primitive(PrimitiveKind kind, int r) {
    switch (kind) {
        case PrimitiveKind::cube: return cube(r, 1.0);
        case PrimitiveKind::cone: return cone(4 * r, r, 1.0, 1.5, true);
        case PrimitiveKind::cylinder: return cylinder(4 * r, r, 1.0, 2.0, true);
        case PrimitiveKind::sphere: return icosphere(r >= 8 ? 3 : 2);
        case PrimitiveKind::tetrahedron: return tetrahedron(std::max(1, 3 * r / 2));
    }
    throw std::invalid_argument("unknown primitive");
}

// Centre on the bounding box and scale into the unit ball.
void normalize(Primitive& p) {
    Vec3 lo = p.vertices[0], hi = p.vertices[0];
    for (const Vec3& v : p.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const Vec3 c = 0.5 * (lo + hi);
    double r = 0.0;
    for (const Vec3& v : p.vertices) r = std::max(r, (v - c).norm());
    for (Vec3& v : p.vertices) v = (v - c) / r;
}

Vec3 random_axis(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 a(n(rng), n(rng), n(rng));
    return a.norm() < 1e-12 ? Vec3::UnitZ() : a.normalized();
}

// Analytic simple deforms about axis a: t along a, (p, q) across it.
// twist and bend use the angle, taper and stretch the factor.
void simple_deform(Primitive& prim, int method, double angle, double factor, const Vec3& a) {
    const Vec3 b = a.unitOrthogonal(), c = a.cross(b);
    prim.transform([&](const Vec3& x) {
        double t = x.dot(a), p = x.dot(b), q = x.dot(c);
        switch (method) {
            case 0: {  // twist: rotation about the axis proportional to t
                const double phi = angle * t, cs = std::cos(phi), sn = std::sin(phi);
                const double p2 = cs * p - sn * q;
                q = sn * p + cs * q;
                p = p2;
                break;
            }
            case 1: {  // bend: the axis is wrapped onto a circle of curvature `angle` in the (t, p) plane
                if (std::abs(angle) < 1e-9) break;
                const double R = 1.0 / angle, rr = R - p;
                const double t2 = rr * std::sin(angle * t);
                p = R - rr * std::cos(angle * t);
                t = t2;
                break;
            }
            case 2: {  // taper: cross-section scaled linearly along t
                const double s = std::max(0.2, 1.0 + factor * t);
                p *= s;
                q *= s;
                break;
            }
            default: {  // stretch: volume preserving
                const double s = 1.0 + factor;
                t *= s;
                p /= std::sqrt(s);
                q /= std::sqrt(s);
                break;
            }
        }
        return Vec3(t * a + p * b + q * c);
    });
}

// One third of the vertices slide along their normals by up to 5% of the
// local mean edge length, then one damped Laplacian pass.
void augment(Primitive& prim, Rng& rng) {
    const TriMesh m = prim.mesh();
    const int nv = m.num_vertices();
    std::vector<double> local(nv, 0.0);
    std::vector<int> degree(nv, 0);
    std::vector<std::vector<int>> adj(nv);
    for (const MeshEdge& e : m.edges()) {
        local[e.v0] += e.length;
        local[e.v1] += e.length;
        ++degree[e.v0];
        ++degree[e.v1];
        adj[e.v0].push_back(e.v1);
        adj[e.v1].push_back(e.v0);
    }
    std::vector<int> order(nv);
    for (int v = 0; v < nv; ++v) order[v] = v;
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(nv / 3);
    std::sort(order.begin(), order.end());
    for (int v : order) {
        if (degree[v] == 0) continue;
        const double h = local[v] / degree[v];
        prim.vertices[v] += uniform(rng, -0.05, 0.05) * h * m.vertex_normal(v);
    }
    std::vector<Vec3> next = prim.vertices;
    for (int v = 0; v < nv; ++v) {
        if (adj[v].empty()) continue;
        Vec3 avg = Vec3::Zero();
        for (int u : adj[v]) avg += prim.vertices[u];
        avg /= static_cast<double>(adj[v].size());
        next[v] = prim.vertices[v] + 0.5 * (avg - prim.vertices[v]);
    }
    prim.vertices = std::move(next);
}

struct Placed {
    Primitive prim;
    std::vector<int> piece_primitive;  // per combined piece label
    std::vector<int> piece_local;
};

// Returns nothing when some primitive cannot be placed in 100 attempts.
std::optional<Placed> place(const std::vector<PrimitiveKind>& kinds, Rng& rng, const GenerateOptions& opts) {
    Placed out;
    std::vector<Vec3> centres;
    const double spread = 1.2 * static_cast<double>(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        Primitive p = make_primitive(kinds[i], opts.resolution);
        normalize(p);
        if (opts.deform) {
            const int n = std::uniform_int_distribution<int>(3, 9)(rng);
            for (int d = 0; d < n; ++d) {
                const double angle = uniform(rng, -0.5, 0.5);
                const double factor = uniform(rng, -0.8, 0.8);
                const int method = std::uniform_int_distribution<int>(0, 3)(rng);
                simple_deform(p, method, angle, factor, random_axis(rng));
                normalize(p);
            }
        }
        Vec3 axis(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1));
        if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
        const Eigen::Matrix3d R =
            Eigen::AngleAxisd(uniform(rng, 0, 2 * std::numbers::pi), axis.normalized()).toRotationMatrix();
        p.transform([&](const Vec3& x) { return Vec3(R * x); });

        // bounding sphere after the rotation is still the unit ball
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            Vec3 c = i == 0 ? Vec3::Zero()
                            : Vec3(uniform(rng, -spread, spread), uniform(rng, -spread, spread),
                                   uniform(rng, -spread, spread));
            c += Vec3(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3));
            placed = std::all_of(centres.begin(), centres.end(), [&](const Vec3& o) {
                return (o - c).norm() > 2.0 + 0.05;
            });
            if (placed) {
                centres.push_back(c);
                p.transform([&](const Vec3& x) { return Vec3(x + c); });
            }
        }
        if (!placed) return std::nullopt;
        for (int s = 0; s < p.num_segments(); ++s) {
            out.piece_primitive.push_back(static_cast<int>(i));
            out.piece_local.push_back(s);
        }
        if (i == 0)
            out.prim = std::move(p);
        else
            out.prim.append(p);
    }
    return out;
}

// Splits every piece label into its edge-connected components.
void build_segments(LabeledShape& shape, const std::vector<int>& piece, const Placed& placed) {
    const TriMesh& m = shape.mesh;
    const int nf = m.num_faces();
    shape.labels.assign(nf, -1);
    shape.segments.clear();
    for (int f = 0; f < nf; ++f) {
        if (shape.labels[f] >= 0) continue;
        Segment seg;
        seg.piece = placed.piece_local[piece[f]];
        seg.primitive = placed.piece_primitive[piece[f]];
        seg.sphere = placed.prim.segment_is_sphere[piece[f]];
        const int id = static_cast<int>(shape.segments.size());
        std::vector<int> stack{f};
        shape.labels[f] = id;
        while (!stack.empty()) {
            const int g = stack.back();
            stack.pop_back();
            seg.faces.push_back(g);
            for (int k = 0; k < 3; ++k) {
                const int h = m.face_neighbor(g, k);
                if (h >= 0 && shape.labels[h] < 0 && piece[h] == piece[f]) {
                    shape.labels[h] = id;
                    stack.push_back(h);
                }
            }
        }
        std::sort(seg.faces.begin(), seg.faces.end());
        shape.segments.push_back(std::move(seg));
    }
}

json segment_json(const Segment& s) {
    return {{"primitive", s.primitive}, {"piece", s.piece},     {"sphere", s.sphere},
            {"faces", s.faces.size()},  {"filtered", s.filtered}, {"valid", s.valid},
            {"mean_DI", s.mean_DI},     {"mean_DC", s.mean_DC}};
}

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open " + p.string());
    return json::parse(in);
}

void write_json(const std::filesystem::path& p, const json& j) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << j.dump(1) << '\n';
}

}  // namespace

std::string primitive_name(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::cube: return "cube";
        case PrimitiveKind::cone: return "cone";
        case PrimitiveKind::cylinder: return "cylinder";
        case PrimitiveKind::sphere: return "sphere";
        case PrimitiveKind::tetrahedron: return "tetrahedron";
    }
    return "unknown";
}

std::optional<PrimitiveKind> parse_primitive(const std::string& name) {
    for (auto k : {PrimitiveKind::cube, PrimitiveKind::cone, PrimitiveKind::cylinder, PrimitiveKind::sphere,
                   PrimitiveKind::tetrahedron})
        if (primitive_name(k) == name) return k;
    return std::nullopt;
}

LabeledShape generate_shape(std::uint64_t rng_seed, int n_primitives, const GenerateOptions& opts) {
    if (opts.kinds.empty() && (n_primitives < 1 || n_primitives > 5))
        throw std::invalid_argument("n_primitives must lie in [1, 5]");
    if (opts.kinds.size() > 5) throw std::invalid_argument("at most 5 primitives");
    if (opts.resolution < 1) throw std::invalid_argument("resolution must be at least 1");

    Rng rng(splitmix(rng_seed));
    std::vector<PrimitiveKind> kinds = opts.kinds;
    if (kinds.empty()) {
        std::uniform_int_distribution<int> pick(0, 4);
        for (int i = 0; i < n_primitives; ++i) kinds.push_back(static_cast<PrimitiveKind>(pick(rng)));
    }

    std::optional<Placed> placed;
    while (!(placed = place(kinds, rng, opts))) kinds.pop_back();  // a single primitive always fits

    if (opts.augment) augment(placed->prim, rng);

    LabeledShape shape;
    shape.rng_seed = rng_seed;
    shape.primitives = kinds;
    shape.mesh = placed->prim.mesh();
    build_segments(shape, placed->prim.labels, *placed);
    return shape;
}

SegmentDistortion segment_distortion(const TriMesh& mesh, const std::vector<int>& faces, int refine_iters) {
    if (faces.empty()) throw std::invalid_argument("segment_distortion: empty segment");
    const Patch cut = cut_to_disk(mesh, make_patch(mesh, faces, faces.front()));
    const UVMap uv = isometric_refine(mesh, cut, lscm(mesh, cut), refine_iters, 1e-8);
    SegmentDistortion d;
    for (const Mat2& J : uv.jacobians) {
        const SingularValues s = singular_values(J);
        if (s.s2 <= 1e-12) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        const double di = std::max(s.s1, 1.0 / s.s2) - 1.0;
        d.mean_DI += di * di;
        d.mean_DC += (s.s1 - s.s2) * (s.s1 - s.s2);
    }
    d.mean_DI /= static_cast<double>(uv.jacobians.size());
    d.mean_DC /= static_cast<double>(uv.jacobians.size());
    return d;
}

LabeledShape filter_and_sample(LabeledShape shape, double threshold, double frac, int max_seeds) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    if (!(frac > 0.0 && frac <= 1.0)) throw std::invalid_argument("frac must lie in (0, 1]");
    if (max_seeds < 1) throw std::invalid_argument("max_seeds must be at least 1");
    shape.valid_segments.clear();
    shape.seeds.clear();
    for (int id = 0; id < static_cast<int>(shape.segments.size()); ++id) {
        Segment& seg = shape.segments[id];
        const SegmentDistortion d = segment_distortion(shape.mesh, seg.faces);
        seg.filtered = true;
        seg.mean_DI = d.mean_DI;
        seg.mean_DC = d.mean_DC;
        seg.valid = d.mean_DI <= threshold && d.mean_DC <= threshold;
        if (!seg.valid) continue;
        shape.valid_segments.push_back(id);
        if (seg.sphere) continue;

        const int n = static_cast<int>(seg.faces.size());
        const int k = std::min({max_seeds, n, std::max(1, static_cast<int>(std::lround(frac * n)))});
        Rng rng(splitmix(shape.rng_seed ^ splitmix(static_cast<std::uint64_t>(id) + 1)));
        std::vector<int> pool = seg.faces;
        for (int i = 0; i < k; ++i) {
            const int j = std::uniform_int_distribution<int>(i, n - 1)(rng);
            std::swap(pool[i], pool[j]);
        }
        std::sort(pool.begin(), pool.begin() + k);
        for (int i = 0; i < k; ++i) shape.seeds.push_back({pool[i], id});
    }
    return shape;
}

void save_shape(const std::filesystem::path& dir, const LabeledShape& shape) {
    std::filesystem::create_directories(dir);
    save_obj((dir / "mesh.obj").string(), shape.mesh);
    json segs = json::array();
    for (const Segment& s : shape.segments) segs.push_back(segment_json(s));
    json prims = json::array();
    for (auto k : shape.primitives) prims.push_back(primitive_name(k));
    write_json(dir / "labels.json", {{"rng_seed", shape.rng_seed},
                                     {"primitives", prims},
                                     {"labels", shape.labels},
                                     {"segments", segs},
                                     {"valid_segments", shape.valid_segments}});
    json seeds = json::array();
    for (const SeedFace& s : shape.seeds) seeds.push_back({{"face", s.face}, {"segment", s.segment}});
    write_json(dir / "seeds.json", {{"seeds", seeds}});
}

LabeledShape load_shape(const std::filesystem::path& dir) {
    LabeledShape shape;
    shape.mesh = load_mesh((dir / "mesh.obj").string());
    const json labels = read_json(dir / "labels.json");
    shape.rng_seed = labels.at("rng_seed").get<std::uint64_t>();
    for (const auto& name : labels.at("primitives")) {
        auto k = parse_primitive(name.get<std::string>());
        if (!k) throw Error("unknown primitive in " + dir.string());
        shape.primitives.push_back(*k);
    }
    shape.labels = labels.at("labels").get<std::vector<int>>();
    if (static_cast<int>(shape.labels.size()) != shape.mesh.num_faces())
        throw Error("labels.json does not match mesh.obj in " + dir.string());
    const auto& segs = labels.at("segments");
    shape.segments.resize(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        Segment& s = shape.segments[i];
        s.primitive = segs[i].at("primitive");
        s.piece = segs[i].at("piece");
        s.sphere = segs[i].at("sphere");
        s.filtered = segs[i].at("filtered");
        s.valid = segs[i].at("valid");
        s.mean_DI = segs[i].at("mean_DI");
        s.mean_DC = segs[i].at("mean_DC");
    }
    for (int f = 0; f < shape.mesh.num_faces(); ++f) {
        const int l = shape.labels[f];
        if (l < 0 || l >= static_cast<int>(shape.segments.size())) throw Error("face label out of range");
        shape.segments[l].faces.push_back(f);
    }
    shape.valid_segments = labels.at("valid_segments").get<std::vector<int>>();
    const json seeds = read_json(dir / "seeds.json");
    for (const auto& s : seeds.at("seeds"))
        shape.seeds.push_back({s.at("face").get<int>(), s.at("segment").get<int>()});
    return shape;
}

DatasetManifest generate_dataset(const std::filesystem::path& out_dir, std::uint64_t rng_seed, int count,
                                 int max_primitives, const GenerateOptions& opts, double threshold, double frac,
                                 int max_seeds) {
    if (count < 0) throw std::invalid_argument("count must be non-negative");
    if (max_primitives < 1 || max_primitives > 5) throw std::invalid_argument("max_primitives must lie in [1, 5]");
    DatasetManifest man;
    man.rng_seed = rng_seed;
    man.count = count;
    man.max_primitives = max_primitives;
    man.options = opts;
    man.threshold = threshold;
    man.frac = frac;
    man.max_seeds = max_seeds;
    for (int i = 0; i < count; ++i) {
        man.seeds.push_back(splitmix(rng_seed + static_cast<std::uint64_t>(i)));
        char name[32];
        std::snprintf(name, sizeof name, "shape_%04d", i);
        man.shapes.emplace_back(name);
    }
    std::filesystem::create_directories(out_dir);

    // shapes are independent; workers take the next index
    std::atomic<int> next{0};
    std::vector<std::string> errors(count);
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                const int n = 1 + static_cast<int>(man.seeds[i] % static_cast<std::uint64_t>(max_primitives));
                LabeledShape s = filter_and_sample(generate_shape(man.seeds[i], n, opts), threshold, frac, max_seeds);
                save_shape(out_dir / man.shapes[i], s);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), count));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (int i = 0; i < count; ++i)
        if (!errors[i].empty()) throw Error(man.shapes[i] + ": " + errors[i]);

    json kinds = json::array();
    for (auto k : opts.kinds) kinds.push_back(primitive_name(k));
    write_json(out_dir / "manifest.json", {{"rng_seed", rng_seed},
                                           {"count", count},
                                           {"max_primitives", max_primitives},
                                           {"deform", opts.deform},
                                           {"augment", opts.augment},
                                           {"resolution", opts.resolution},
                                           {"kinds", kinds},
                                           {"threshold", threshold},
                                           {"frac", frac},
                                           {"max_seeds", max_seeds},
                                           {"shapes", man.shapes},
                                           {"seeds", man.seeds}});
    return man;
}

DatasetManifest load_manifest(const std::filesystem::path& dir) {
    const json j = read_json(dir / "manifest.json");
    DatasetManifest man;
    man.rng_seed = j.at("rng_seed");
    man.count = j.at("count");
    man.max_primitives = j.at("max_primitives");
    man.options.deform = j.at("deform");
    man.options.augment = j.at("augment");
    man.options.resolution = j.at("resolution");
    for (const auto& k : j.at("kinds")) {
        auto kind = parse_primitive(k.get<std::string>());
        if (!kind) throw Error("unknown primitive in manifest");
        man.options.kinds.push_back(*kind);
    }
    man.threshold = j.at("threshold");
    man.frac = j.at("frac");
    man.max_seeds = j.at("max_seeds");
    man.shapes = j.at("shapes").get<std::vector<std::string>>();
    man.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    return man;
}

}  // namespace flatsel
