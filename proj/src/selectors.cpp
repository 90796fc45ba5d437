#include "flatsel/selectors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "conformal.hpp"
#include "flatsel/distortion.hpp"
#include "flatsel/postprocess.hpp"

namespace flatsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// eval-variant isometric distortion; folded or degenerate maps are infinite
double eval_DI(const Mat2& J) {
    if (!(J.determinant() > 0.0)) return kInf;
    const SingularValues s = singular_values(J);
    if (s.s2 <= 1e-12) return kInf;
    const double d = std::max(s.s1, 1.0 / s.s2) - 1.0;
    return d * d;
}

Selection from_faces(const TriMesh& mesh, std::vector<int> faces, int seed) {
    Selection out;
    std::sort(faces.begin(), faces.end());
    out.weights = WeightField::indicator(mesh.num_faces(), faces);
    out.patch = make_patch(mesh, std::move(faces), seed);
    return out;
}

void check_seed(const TriMesh& mesh, int seed) {
    if (seed < 0 || seed >= mesh.num_faces()) throw std::invalid_argument("seed face out of range");
}

// minimal rotation taking unit a onto unit b
Eigen::Matrix3d transport(const Vec3& a, const Vec3& b) {
    const Vec3 axis = a.cross(b);
    const double s = axis.norm(), c = a.dot(b);
    if (s < 1e-15) {
        if (c > 0.0) return Eigen::Matrix3d::Identity();
        // antipodal: half turn about any axis orthogonal to a
        Vec3 o = a.unitOrthogonal();
        return Eigen::AngleAxisd(std::numbers::pi, o).toRotationMatrix();
    }
    return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

}  // namespace

// ---- DCharts ------------------------------------------------------------------

void DChartsConfig::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("dcharts: alpha must be positive");
    if (!(beta >= 0.0) || !(gamma_s >= 0.0)) throw std::invalid_argument("dcharts: exponents must be non-negative");
    if (!(f_max > 0.0)) throw std::invalid_argument("dcharts: f_max must be positive");
    if (max_outer_iters < 1) throw std::invalid_argument("dcharts: max_outer_iters must be at least 1");
}

double fitting_error(const Proxy& proxy, const Vec3& normal) {
    const double d = normal.dot(proxy.axis) - std::cos(proxy.theta);
    return d * d;
}

Proxy fit_proxy(const TriMesh& mesh, std::span<const int> faces) {
    if (faces.empty()) throw std::invalid_argument("fit_proxy: no faces");
    double area = 0.0;
    Vec3 mean = Vec3::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int f : faces) {
        const double a = mesh.face_area(f);
        const Vec3& n = mesh.face_normal(f);
        area += a;
        mean += a * n;
        cov += a * n * n.transpose();
    }

    auto fit = [&](Vec3 axis) {
        double c = 0.0;
        for (int f : faces) c += mesh.face_area(f) * mesh.face_normal(f).dot(axis);
        c /= area;
        if (c < 0.0) {
            axis = -axis;
            c = -c;
        }
        Proxy p{axis, std::acos(std::min(c, 1.0))};
        double err = 0.0;
        for (int f : faces) err += mesh.face_area(f) * fitting_error(p, mesh.face_normal(f));
        return std::pair{p, err / area};
    };

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Vec3 least = eig.eigenvectors().col(0);
    Eigen::Index big;
    least.cwiseAbs().maxCoeff(&big);
    if (least[big] < 0.0) least = -least;
    const auto [pa, ea] = fit(least);
    if (mean.norm() < 1e-15) return pa;
    const auto [pb, eb] = fit(mean.normalized());
    return eb <= ea + 1e-12 ? pb : pa;
}

Selection select_dcharts(const TriMesh& mesh, int seed, const DChartsConfig& cfg) {
    check_seed(mesh, seed);
    cfg.validate();
    const int n = mesh.num_faces();
    std::vector<char> in(n, 0);
    std::vector<int> chart{seed};
    in[seed] = 1;
    double chart_area = mesh.face_area(seed);
    const Vec3 origin = mesh.face_centroid(seed);
    Proxy proxy{mesh.face_normal(seed), 0.0};

    auto energy = [&](int t) {
        const double F = fitting_error(proxy, mesh.face_normal(t));
        const double d = (mesh.face_centroid(t) - origin).norm();
        const double C = std::numbers::pi * d * d / chart_area;
        double shared = 0.0, outer = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int g = mesh.face_neighbor(t, k);
            const double len = mesh.edge(mesh.face_edge(t, k)).length;
            (g >= 0 && in[g] ? shared : outer) += len;
        }
        const double S = shared > 0.0 ? outer / shared : kInf;
        return std::pow(F, cfg.alpha) * std::pow(C, cfg.beta) * std::pow(S, cfg.gamma_s);
    };

    using Item = std::pair<double, int>;
    for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        auto push_neighbors = [&](int f) {
            for (int k = 0; k < 3; ++k) {
                const int g = mesh.face_neighbor(f, k);
                if (g >= 0 && !in[g]) queue.emplace(energy(g), g);
            }
        };
        for (int f : chart) push_neighbors(f);
        int added = 0;
        while (!queue.empty()) {
            const int t = queue.top().second;
            queue.pop();
            if (in[t] || fitting_error(proxy, mesh.face_normal(t)) > cfg.f_max) continue;
            in[t] = 1;
            chart.push_back(t);
            chart_area += mesh.face_area(t);
            ++added;
            push_neighbors(t);
        }
        if (outer > 0 && added == 0) break;
        // refit; keep the old proxy if the new one would evict chart faces
        const Proxy next = fit_proxy(mesh, chart);
        const bool keeps = std::all_of(chart.begin(), chart.end(), [&](int f) {
            return fitting_error(next, mesh.face_normal(f)) <= cfg.f_max;
        });
        if (!keeps) break;
        proxy = next;
    }
    return from_faces(mesh, std::move(chart), seed);
}

// ---- logarithmic map --------------------------------------------------------

Eigen::MatrixX2d discrete_exp_map(const TriMesh& mesh, int seed) {
    check_seed(mesh, seed);
    const int nv = mesh.num_vertices();
    Eigen::MatrixX2d uv = Eigen::MatrixX2d::Constant(nv, 2, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> dist(nv, kInf);
    std::vector<int> parent(nv, -1);
    std::vector<char> done(nv, 0);
    std::vector<std::array<Vec3, 2>> frame(nv);

    // vertex adjacency from faces
    std::vector<std::vector<int>> adj(nv);
    for (const MeshEdge& e : mesh.edges()) {
        adj[e.v0].push_back(e.v1);
        adj[e.v1].push_back(e.v0);
    }

    const Vec3 c = mesh.face_centroid(seed);
    const Vec3& ns = mesh.face_normal(seed);
    const auto& fs = mesh.face_frame(seed);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (int v : mesh.face(seed)) {
        const Vec3 d = mesh.vertex(v) - c;
        uv.row(v) = Vec2(d.dot(fs[0]), d.dot(fs[1])).transpose();
        const Eigen::Matrix3d R = transport(ns, mesh.vertex_normal(v));
        frame[v] = {R * fs[0], R * fs[1]};
        dist[v] = d.norm();
        queue.emplace(dist[v], v);
    }

    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (done[v] || d > dist[v]) continue;
        done[v] = 1;
        if (parent[v] >= 0) {
            // upwind average over settled neighbours, inverse distance weights
            const Vec3& n = mesh.vertex_normal(v);
            Vec2 acc = Vec2::Zero();
            double wsum = 0.0;
            for (int u : adj[v]) {
                if (!done[u] || u == v) continue;
                const Vec3 e = mesh.vertex(v) - mesh.vertex(u);
                const Vec3& nu = mesh.vertex_normal(u);
                Vec3 t = e - e.dot(nu) * nu;
                const double tn = t.norm();
                if (tn < 1e-15) continue;
                t *= e.norm() / tn;
                const Vec2 p = uv.row(u).transpose() + Vec2(t.dot(frame[u][0]), t.dot(frame[u][1]));
                const double w = 1.0 / e.norm();
                acc += w * p;
                wsum += w;
            }
            const int p = parent[v];
            if (wsum > 0.0) {
                uv.row(v) = (acc / wsum).transpose();
            } else {
                uv.row(v) = uv.row(p);
            }
            const Eigen::Matrix3d R = transport(mesh.vertex_normal(p), n);
            frame[v] = {R * frame[p][0], R * frame[p][1]};
        }
        for (int u : adj[v]) {
            if (done[u]) continue;
            const double nd = d + (mesh.vertex(u) - mesh.vertex(v)).norm();
            if (nd < dist[u]) {
                dist[u] = nd;
                parent[u] = v;
                queue.emplace(nd, u);
            }
        }
    }
    return uv;
}

Selection select_logmap(const TriMesh& mesh, int seed, double lambda) {
    check_seed(mesh, seed);
    if (!(lambda > 0.0)) throw std::invalid_argument("logmap: lambda must be positive");
    const Eigen::MatrixX2d uv = discrete_exp_map(mesh, seed);
    WeightField valid = WeightField::constant(mesh.num_faces(), 0.0);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& v = mesh.face(f);
        if (uv.row(v[0]).hasNaN() || uv.row(v[1]).hasNaN() || uv.row(v[2]).hasNaN()) continue;
        const Mat2 J = detail::jacobian(mesh.face_local(f), uv.row(v[0]).transpose(), uv.row(v[1]).transpose(),
                                        uv.row(v[2]).transpose());
        if (eval_DI(J) < lambda) valid.values[f] = 1.0;
    }
    valid.values[seed] = 1.0;  // the seed itself is mapped exactly
    return from_faces(mesh, floodfill_faces(mesh, valid, seed, 0.5), seed);
}

// ---- distortion-greedy growth -------------------------------------------------

namespace {

struct Unfolded {
    double DI = kInf;
    std::array<Vec2, 3> uv;
};

// Extend neighbour g's affine map over c by unfolding c's apex about the
// shared edge into g's plane.
Unfolded unfold_over(const TriMesh& mesh, const std::vector<std::array<Vec2, 3>>& tri, int c, int g) {
    const auto& fc = mesh.face(c);
    const auto& fg = mesh.face(g);
    const Vec3& ng = mesh.face_normal(g);
    const auto& frame = mesh.face_frame(g);
    const Vec3& o = mesh.vertex(fg[0]);
    const Mat2 J = detail::jacobian(mesh.face_local(g), tri[g][0], tri[g][1], tri[g][2]);
    Unfolded out;
    for (int k = 0; k < 3; ++k) {
        const int v = fc[k];
        auto it = std::find(fg.begin(), fg.end(), v);
        if (it != fg.end()) {
            out.uv[k] = tri[g][it - fg.begin()];
            continue;
        }
        int a = -1, b = -1;
        for (int j = 0; j < 3; ++j)
            if (fc[j] != v) (a < 0 ? a : b) = fc[j];
        const Vec3 pa = mesh.vertex(a), pb = mesh.vertex(b), x = mesh.vertex(v);
        const Vec3 axis = (pb - pa).normalized();
        const Vec3 foot = pa + (x - pa).dot(axis) * axis;
        Vec3 side = ng.cross(axis);
        if (side.dot(mesh.face_centroid(g) - foot) > 0.0) side = -side;
        const Vec3 y = foot + (x - foot).norm() * side - o;
        out.uv[k] = tri[g][0] + J * Vec2(y.dot(frame[0]), y.dot(frame[1]));
    }
    out.DI = eval_DI(detail::jacobian(mesh.face_local(c), out.uv[0], out.uv[1], out.uv[2]));
    return out;
}

}  // namespace

Selection select_greedy(const TriMesh& mesh, int seed, const GreedyConfig& cfg) {
    check_seed(mesh, seed);
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("greedy: lambda must be positive");
    if (cfg.reparam_every < 0) throw std::invalid_argument("greedy: reparam_every must be non-negative");
    if (cfg.max_checkpoints < 0) throw std::invalid_argument("greedy: max_checkpoints must be non-negative");
    if (!(cfg.work_budget >= 0.0)) throw std::invalid_argument("greedy: work_budget must be non-negative");
    if (!(cfg.min_batch_frac >= 0.0 && cfg.min_batch_frac < 1.0))
        throw std::invalid_argument("greedy: min_batch_frac must be in [0, 1)");
    const int n = mesh.num_faces();
    std::vector<char> in(n, 0), rejected(n, 0);
    std::vector<int> faces{seed};
    in[seed] = 1;
    // corner uvs per accepted face, mesh corner order
    std::vector<std::array<Vec2, 3>> tri(n);
    {
        const auto& L = mesh.face_local(seed);
        tri[seed] = {L.col(0), L.col(1), L.col(2)};
    }

    // Grow up to `count` faces one at a time, lowest estimate first, chaining
    // estimates through the faces added in this round. Works on copies.
    auto grow = [&](int count, std::vector<char>& in_t, std::vector<std::array<Vec2, 3>>& tri_t) {
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        std::vector<double> best(n, kInf);
        auto offer = [&](int c) {
            if (in_t[c] || rejected[c]) return;
            double e = kInf;
            for (int j = 0; j < 3; ++j) {
                const int g = mesh.face_neighbor(c, j);
                if (g >= 0 && in_t[g]) e = std::min(e, unfold_over(mesh, tri_t, c, g).DI);
            }
            // round-off must not decide the order: ties fall through to the index
            e = std::floor(e / 1e-12) * 1e-12;
            if (e < cfg.lambda && e < best[c]) {
                best[c] = e;
                queue.emplace(e, c);
            }
        };
        for (int f : faces)
            for (int k = 0; k < 3; ++k)
                if (const int c = mesh.face_neighbor(f, k); c >= 0) offer(c);
        std::vector<int> added;
        while (!queue.empty() && static_cast<int>(added.size()) < count) {
            const auto [e, c] = queue.top();
            queue.pop();
            if (in_t[c] || e > best[c]) continue;
            Unfolded u;
            for (int j = 0; j < 3; ++j) {
                const int g = mesh.face_neighbor(c, j);
                if (g < 0 || !in_t[g]) continue;
                Unfolded v = unfold_over(mesh, tri_t, c, g);
                if (v.DI < u.DI) u = v;
            }
            in_t[c] = 1;
            tri_t[c] = u.uv;
            added.push_back(c);
            for (int k = 0; k < 3; ++k)
                if (const int g = mesh.face_neighbor(c, k); g >= 0) offer(g);
        }
        return added;
    };

    // lscm + refine on the trial patch; every face must stay under lambda
    auto reparam = [&](const std::vector<int>& trial, std::vector<std::array<Vec2, 3>>& out) {
        Patch cut;
        UVMap map;
        try {
            map = flatten_patch(mesh, make_patch(mesh, trial, seed), cut, cfg.refine_iters, cfg.refine_tol);
        } catch (const SolveError&) {
            return false;
        }
        for (int i = 0; i < cut.num_faces(); ++i)
            if (!(eval_DI(map.jacobians[i]) < cfg.lambda)) return false;
        for (int i = 0; i < cut.num_faces(); ++i)
            for (int k = 0; k < 3; ++k) out[cut.faces[i]][k] = map.uv.row(cut.corners[i][k]).transpose();
        return true;
    };

    // batch size doubles after a good checkpoint and halves after a bad one
    auto cap = [&] {
        return cfg.reparam_every > 0 ? cfg.reparam_every : std::max(4, static_cast<int>(faces.size()) / 4);
    };
    int count = cap();
    const double budget = cfg.work_budget * n;
    double spent = 0.0;
    for (int checkpoint = 0; cfg.max_checkpoints == 0 || checkpoint < cfg.max_checkpoints; ++checkpoint) {
        std::vector<char> in_t = in;
        std::vector<std::array<Vec2, 3>> tri_t = tri;
        const std::vector<int> added = grow(count, in_t, tri_t);
        if (added.empty()) break;
        std::vector<int> trial = faces;
        trial.insert(trial.end(), added.begin(), added.end());
        std::sort(trial.begin(), trial.end());
        if (cfg.work_budget > 0.0 && spent + static_cast<double>(trial.size()) > budget) break;
        if (reparam(trial, tri_t)) {
            faces = std::move(trial);
            in = std::move(in_t);
            tri = std::move(tri_t);
            count = std::min(2 * count, cap());
            continue;
        }
        spent += static_cast<double>(trial.size());
        if (added.size() == 1) {
            rejected[added[0]] = 1;
        } else {
            // growth is deterministic, so a smaller count replays a prefix
            count = static_cast<int>(added.size()) / 2;
            if (count < cfg.min_batch_frac * static_cast<double>(faces.size())) break;
        }
    }
    return from_faces(mesh, std::move(faces), seed);
}

// ---- direct weight optimization ---------------------------------------------

Selection select_optimized(const TriMesh& mesh, int seed, const OptimizedConfig& cfg) {
    check_seed(mesh, seed);
    OptimizeResult opt = optimize_weights(mesh, seed, cfg.loss, cfg.steps, cfg.lr, cfg.options);
    Selection out;
    out.patch = floodfill_patch(mesh, opt.weights, seed, cfg.loss.floodfill_threshold);
    out.weights = std::move(opt.weights);
    return out;
}

// ---- dispatch ----------------------------------------------------------------

std::optional<SelectorKind> parse_selector(std::string_view name) {
    if (name == "optimized") return SelectorKind::optimized;
    if (name == "dcharts") return SelectorKind::dcharts;
    if (name == "logmap") return SelectorKind::logmap;
    if (name == "greedy") return SelectorKind::greedy;
    return std::nullopt;
}

std::string selector_name(SelectorKind kind) {
    switch (kind) {
        case SelectorKind::optimized: return "optimized";
        case SelectorKind::dcharts: return "dcharts";
        case SelectorKind::logmap: return "logmap";
        case SelectorKind::greedy: return "greedy";
    }
    return "unknown";
}

Selection run_selector(const TriMesh& mesh, int seed, SelectorKind kind, const SelectorConfig& cfg) {
    check_seed(mesh, seed);
    const auto t0 = std::chrono::steady_clock::now();
    Selection out;
    switch (kind) {
        case SelectorKind::optimized: out = select_optimized(mesh, seed, cfg.optimized); break;
        case SelectorKind::dcharts: out = select_dcharts(mesh, seed, cfg.dcharts); break;
        case SelectorKind::logmap: out = select_logmap(mesh, seed, cfg.logmap_lambda); break;
        case SelectorKind::greedy: out = select_greedy(mesh, seed, cfg.greedy); break;
    }
    out.seg_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace flatsel
