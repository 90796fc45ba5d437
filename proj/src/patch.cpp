#include "flatsel/patch.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace flatsel {

void WeightField::validate(const TriMesh& mesh) const {
    if (size() != mesh.num_faces())
        throw std::invalid_argument("weight field has " + std::to_string(size()) +
                                    " entries for " + std::to_string(mesh.num_faces()) + " faces");
    for (int f = 0; f < size(); ++f)
        if (!(values[f] >= 0.0 && values[f] <= 1.0))
            throw std::invalid_argument("weight of face " + std::to_string(f) + " outside [0, 1]");
}

namespace {

using EdgeKey = std::uint64_t;

EdgeKey edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<EdgeKey>(a) << 32) | static_cast<EdgeKey>(static_cast<std::uint32_t>(b));
}
int key_lo(EdgeKey k) { return static_cast<int>(k >> 32); }
int key_hi(EdgeKey k) { return static_cast<int>(k & 0xffffffffu); }

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        parent[b] = a;
        return true;
    }
};

// Patch faces (by position) incident to each local edge.
std::unordered_map<EdgeKey, std::vector<int>> local_edge_faces(const Patch& p) {
    std::unordered_map<EdgeKey, std::vector<int>> out;
    out.reserve(p.corners.size() * 2);
    for (int i = 0; i < p.num_faces(); ++i)
        for (int k = 0; k < 3; ++k) out[edge_key(p.corners[i][k], p.corners[i][(k + 1) % 3])].push_back(i);
    return out;
}

std::vector<std::vector<std::pair<int, int>>> vertex_corners(const Patch& p) {
    std::vector<std::vector<std::pair<int, int>>> out(p.num_vertices());
    for (int i = 0; i < p.num_faces(); ++i)
        for (int k = 0; k < 3; ++k) out[p.corners[i][k]].emplace_back(i, k);
    return out;
}

// Re-numbers local vertices so each vertex fan that is separated by a cut
// edge or a boundary edge gets its own copy.
void split_fans(Patch& p, const std::set<EdgeKey>& cut) {
    const auto edge_faces = local_edge_faces(p);
    const auto around = vertex_corners(p);
    std::vector<int> origin;
    std::vector<std::array<int, 3>> corners = p.corners;
    for (int v = 0; v < p.num_vertices(); ++v) {
        const auto& inc = around[v];
        if (inc.empty()) continue;
        std::unordered_map<int, int> slot;
        for (int s = 0; s < static_cast<int>(inc.size()); ++s) slot[inc[s].first] = s;
        UnionFind uf(static_cast<int>(inc.size()));
        for (const auto& [fi, k] : inc) {
            for (int other : {p.corners[fi][(k + 1) % 3], p.corners[fi][(k + 2) % 3]}) {
                const EdgeKey key = edge_key(v, other);
                const auto& ef = edge_faces.at(key);
                if (ef.size() != 2 || cut.count(key)) continue;
                uf.unite(slot[ef[0]], slot[ef[1]]);
            }
        }
        std::unordered_map<int, int> comp_id;
        for (int s = 0; s < static_cast<int>(inc.size()); ++s) {
            const int root = uf.find(s);
            auto [it, inserted] = comp_id.try_emplace(root, static_cast<int>(origin.size()));
            if (inserted) origin.push_back(p.vertex_origin[v]);
            corners[inc[s].first][inc[s].second] = it->second;
        }
    }
    p.corners = std::move(corners);
    p.vertex_origin = std::move(origin);
}

bool all_fans_single(const Patch& p) {
    Patch probe = p;
    split_fans(probe, {});
    return probe.num_vertices() == p.num_vertices();
}

using Graph = std::vector<std::vector<std::pair<int, double>>>;

Graph vertex_graph(const TriMesh& mesh, const Patch& p) {
    Graph g(p.num_vertices());
    std::set<EdgeKey> seen;
    for (const auto& c : p.corners) {
        for (int k = 0; k < 3; ++k) {
            const int a = c[k], b = c[(k + 1) % 3];
            if (!seen.insert(edge_key(a, b)).second) continue;
            const double len = (mesh.vertex(p.vertex_origin[a]) - mesh.vertex(p.vertex_origin[b])).norm();
            g[a].emplace_back(b, len);
            g[b].emplace_back(a, len);
        }
    }
    for (auto& nb : g) std::sort(nb.begin(), nb.end());
    return g;
}

struct ShortestPaths {
    std::vector<double> dist;
    std::vector<int> parent;
};

// Multi-source Dijkstra; ties settle the lower vertex id first. Stops early
// once `stop(v)` holds for a popped vertex, returning that vertex (or -1).
template <class Stop>
int dijkstra(const Graph& g, const std::vector<int>& sources, ShortestPaths& sp, Stop stop) {
    const int n = static_cast<int>(g.size());
    sp.dist.assign(n, std::numeric_limits<double>::infinity());
    sp.parent.assign(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int s : sources) {
        sp.dist[s] = 0.0;
        pq.emplace(0.0, s);
    }
    std::vector<char> done(n, 0);
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (done[v]) continue;
        done[v] = 1;
        if (stop(v)) return v;
        for (const auto& [w, len] : g[v]) {
            const double nd = d + len;
            if (nd < sp.dist[w]) {
                sp.dist[w] = nd;
                sp.parent[w] = v;
                pq.emplace(nd, w);
            }
        }
    }
    return -1;
}

void add_path_edges(const ShortestPaths& sp, int v, std::set<EdgeKey>& out) {
    while (sp.parent[v] >= 0) {
        out.insert(edge_key(v, sp.parent[v]));
        v = sp.parent[v];
    }
}

// Joins the longest boundary loop to its nearest neighbouring loop.
std::set<EdgeKey> loop_bridge(const TriMesh& mesh, const Patch& p) {
    const auto& loops = p.boundary_loops;
    int longest = 0;
    double best = -1.0;
    for (int i = 0; i < static_cast<int>(loops.size()); ++i) {
        const double len = loop_length(mesh, p, loops[i]);
        if (len > best + 1e-12 * std::max(1.0, best)) {
            best = len;
            longest = i;
        }
    }
    std::vector<int> loop_of(p.num_vertices(), -1);
    for (int i = 0; i < static_cast<int>(loops.size()); ++i)
        for (int v : loops[i])
            if (loop_of[v] < 0 || i == longest) loop_of[v] = i;
    std::vector<int> sources(loops[longest].begin(), loops[longest].end());
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

    ShortestPaths sp;
    const Graph g = vertex_graph(mesh, p);
    const int hit = dijkstra(g, sources, sp, [&](int v) { return loop_of[v] >= 0 && loop_of[v] != longest; });
    if (hit < 0) throw Error("cut_to_disk: boundary loops are not connected");
    std::set<EdgeKey> cut;
    add_path_edges(sp, hit, cut);
    return cut;
}

// Shortest non-separating cycle among the tree-cotree generators.
std::set<EdgeKey> genus_cycle(const TriMesh& mesh, const Patch& p, int root) {
    const Graph g = vertex_graph(mesh, p);
    ShortestPaths sp;
    dijkstra(g, {root}, sp, [](int) { return false; });

    std::set<EdgeKey> tree;
    for (int v = 0; v < p.num_vertices(); ++v)
        if (sp.parent[v] >= 0) tree.insert(edge_key(v, sp.parent[v]));

    const auto edge_faces = local_edge_faces(p);
    std::vector<EdgeKey> keys;
    keys.reserve(edge_faces.size());
    for (const auto& [k, _] : edge_faces) keys.push_back(k);
    std::sort(keys.begin(), keys.end());

    std::unordered_map<EdgeKey, int> loop_of_edge;
    for (int i = 0; i < static_cast<int>(p.boundary_loops.size()); ++i) {
        const auto& loop = p.boundary_loops[i];
        for (std::size_t j = 0; j < loop.size(); ++j) loop_of_edge[edge_key(loop[j], loop[(j + 1) % loop.size()])] = i;
    }

    UnionFind dual(p.num_faces() + static_cast<int>(p.boundary_loops.size()));
    EdgeKey best_key = 0;
    double best_len = std::numeric_limits<double>::infinity();
    for (EdgeKey k : keys) {
        if (tree.count(k)) continue;
        const auto& ef = edge_faces.at(k);
        const int n0 = ef[0];
        const int n1 = ef.size() == 2 ? ef[1] : p.num_faces() + loop_of_edge.at(k);
        if (dual.unite(n0, n1)) continue;
        const int a = key_lo(k), b = key_hi(k);
        // cycle length through the lowest common ancestor
        std::set<int> anc;
        for (int v = a; v >= 0; v = sp.parent[v]) anc.insert(v);
        int lca = b;
        while (!anc.count(lca)) lca = sp.parent[lca];
        const double len = sp.dist[a] + sp.dist[b] - 2.0 * sp.dist[lca] +
                           (mesh.vertex(p.vertex_origin[a]) - mesh.vertex(p.vertex_origin[b])).norm();
        if (len < best_len) {
            best_len = len;
            best_key = k;
        }
    }
    if (!std::isfinite(best_len)) throw Error("cut_to_disk: no non-separating cycle found");

    const int a = key_lo(best_key), b = key_hi(best_key);
    std::set<int> anc;
    for (int v = a; v >= 0; v = sp.parent[v]) anc.insert(v);
    int lca = b;
    while (!anc.count(lca)) lca = sp.parent[lca];
    std::set<EdgeKey> cut{best_key};
    for (int v = a; v != lca; v = sp.parent[v]) cut.insert(edge_key(v, sp.parent[v]));
    for (int v = b; v != lca; v = sp.parent[v]) cut.insert(edge_key(v, sp.parent[v]));
    return cut;
}

// Two-edge slit at the vertex farthest from the seed; opens a closed sphere.
std::set<EdgeKey> sphere_slit(const TriMesh& mesh, const Patch& p, int root) {
    const Graph g = vertex_graph(mesh, p);
    ShortestPaths sp;
    dijkstra(g, {root}, sp, [](int) { return false; });
    int far = root;
    for (int v = 0; v < p.num_vertices(); ++v)
        if (sp.dist[v] > sp.dist[far] && std::isfinite(sp.dist[v])) far = v;
    const auto& nb = g[far];
    if (nb.size() < 2) throw Error("cut_to_disk: cannot open closed patch");
    std::set<int> adjacent_to_first;
    for (const auto& [w, _] : g[nb[0].first]) adjacent_to_first.insert(w);
    int second = nb[1].first;
    for (std::size_t i = 1; i < nb.size(); ++i)
        if (!adjacent_to_first.count(nb[i].first)) {
            second = nb[i].first;
            break;
        }
    return {edge_key(far, nb[0].first), edge_key(far, second)};
}

// Faces joined through shared local edges form one piece.
bool locally_connected(const Patch& p) {
    UnionFind uf(p.num_faces());
    for (const auto& [_, ef] : local_edge_faces(p))
        if (ef.size() == 2) uf.unite(ef[0], ef[1]);
    for (int i = 1; i < p.num_faces(); ++i)
        if (uf.find(i) != uf.find(0)) return false;
    return true;
}

// Interior edges not crossed by a spanning tree of the faces (grown from the
// seed by centroid distance), with dangling branches pruned. Cutting along
// them always leaves a disk; the seams are not the shortest possible.
std::set<EdgeKey> cut_graph(const TriMesh& mesh, const Patch& p) {
    const auto edge_faces = local_edge_faces(p);
    std::vector<std::vector<std::pair<int, EdgeKey>>> across(p.num_faces());
    std::vector<EdgeKey> keys;
    for (const auto& [k, ef] : edge_faces) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (EdgeKey k : keys) {
        const auto& ef = edge_faces.at(k);
        if (ef.size() != 2) continue;
        across[ef[0]].emplace_back(ef[1], k);
        across[ef[1]].emplace_back(ef[0], k);
    }
    std::vector<Vec3> centre(p.num_faces());
    for (int i = 0; i < p.num_faces(); ++i) centre[i] = mesh.face_centroid(p.faces[i]);

    std::set<EdgeKey> tree;
    std::vector<double> dist(p.num_faces(), std::numeric_limits<double>::infinity());
    std::vector<EdgeKey> via(p.num_faces(), 0);
    std::vector<char> done(p.num_faces(), 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    const int root = p.local_face(p.seed);
    dist[root] = 0.0;
    pq.emplace(0.0, root);
    while (!pq.empty()) {
        const auto [d, f] = pq.top();
        pq.pop();
        if (done[f]) continue;
        done[f] = 1;
        if (f != root) tree.insert(via[f]);
        for (const auto& [g, k] : across[f]) {
            const double nd = d + (centre[g] - centre[f]).norm();
            if (!done[g] && nd < dist[g]) {
                dist[g] = nd;
                via[g] = k;
                pq.emplace(nd, g);
            }
        }
    }

    std::set<EdgeKey> cut;
    std::vector<int> degree(p.num_vertices(), 0);
    std::vector<std::vector<EdgeKey>> incident(p.num_vertices());
    for (EdgeKey k : keys) {
        const bool boundary = edge_faces.at(k).size() == 1;
        if (!boundary && tree.count(k)) continue;
        ++degree[key_lo(k)];
        ++degree[key_hi(k)];
        if (boundary) continue;
        cut.insert(k);
        incident[key_lo(k)].push_back(k);
        incident[key_hi(k)].push_back(k);
    }
    std::deque<int> leaves;
    for (int v = 0; v < p.num_vertices(); ++v)
        if (degree[v] == 1) leaves.push_back(v);
    while (!leaves.empty()) {
        const int v = leaves.front();
        leaves.pop_front();
        if (degree[v] != 1) continue;
        for (EdgeKey k : incident[v]) {
            if (!cut.erase(k)) continue;
            const int o = key_lo(k) == v ? key_hi(k) : key_lo(k);
            --degree[v];
            if (--degree[o] == 1) leaves.push_back(o);
            break;
        }
    }
    return cut;
}

}  // namespace

int Patch::num_edges() const {
    std::vector<EdgeKey> keys;
    keys.reserve(corners.size() * 3);
    for (const auto& c : corners)
        for (int k = 0; k < 3; ++k) keys.push_back(edge_key(c[k], c[(k + 1) % 3]));
    std::sort(keys.begin(), keys.end());
    return static_cast<int>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

int Patch::local_face(int face) const {
    auto it = std::lower_bound(faces.begin(), faces.end(), face);
    if (it == faces.end() || *it != face) return -1;
    return static_cast<int>(it - faces.begin());
}

Patch make_patch(const TriMesh& mesh, std::vector<int> faces, int seed) {
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    for (int f : faces)
        if (f < 0 || f >= mesh.num_faces()) throw std::invalid_argument("face id out of range");
    Patch p;
    p.faces = std::move(faces);
    p.seed = seed;
    if (!p.contains(seed)) throw std::invalid_argument("seed face not in patch");
    std::unordered_map<int, int> local;
    std::vector<int> used;
    for (int f : p.faces)
        for (int v : mesh.face(f)) used.push_back(v);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (int i = 0; i < static_cast<int>(used.size()); ++i) local[used[i]] = i;
    p.vertex_origin = used;
    p.corners.reserve(p.faces.size());
    for (int f : p.faces) {
        const auto& t = mesh.face(f);
        p.corners.push_back({local[t[0]], local[t[1]], local[t[2]]});
    }
    refresh_topology(mesh, p);
    return p;
}

Patch whole_mesh_patch(const TriMesh& mesh, int seed) {
    if (seed < 0 || seed >= mesh.num_faces()) throw std::invalid_argument("seed face out of range");
    Patch p;
    p.faces.resize(mesh.num_faces());
    std::iota(p.faces.begin(), p.faces.end(), 0);
    p.seed = seed;
    p.corners = mesh.faces();
    p.vertex_origin.resize(mesh.num_vertices());
    std::iota(p.vertex_origin.begin(), p.vertex_origin.end(), 0);
    refresh_topology(mesh, p);
    return p;
}

std::vector<int> floodfill_faces(const TriMesh& mesh, const WeightField& weights, int seed,
                                 double threshold) {
    if (seed < 0 || seed >= mesh.num_faces()) throw std::invalid_argument("seed face out of range");
    if (weights.size() != mesh.num_faces()) throw std::invalid_argument("weight field size mismatch");
    if (weights[seed] < threshold) return {seed};
    std::vector<char> seen(mesh.num_faces(), 0);
    std::vector<int> out;
    std::deque<int> queue{seed};
    seen[seed] = 1;
    while (!queue.empty()) {
        const int f = queue.front();
        queue.pop_front();
        out.push_back(f);
        for (int k = 0; k < 3; ++k) {
            const int g = mesh.face_neighbor(f, k);
            if (g < 0 || seen[g] || weights[g] < threshold) continue;
            seen[g] = 1;
            queue.push_back(g);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Patch floodfill_patch(const TriMesh& mesh, const WeightField& weights, int seed, double threshold) {
    return make_patch(mesh, floodfill_faces(mesh, weights, seed, threshold), seed);
}

bool is_edge_connected(const TriMesh& mesh, std::span<const int> faces) {
    if (faces.empty()) return true;
    std::vector<char> member(mesh.num_faces(), 0), seen(mesh.num_faces(), 0);
    for (int f : faces) member[f] = 1;
    std::deque<int> queue{faces[0]};
    seen[faces[0]] = 1;
    std::size_t count = 0;
    while (!queue.empty()) {
        const int f = queue.front();
        queue.pop_front();
        ++count;
        for (int k = 0; k < 3; ++k) {
            const int g = mesh.face_neighbor(f, k);
            if (g < 0 || !member[g] || seen[g]) continue;
            seen[g] = 1;
            queue.push_back(g);
        }
    }
    std::size_t distinct = 0;
    for (char m : member) distinct += m;
    return count == distinct;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh&, const Patch& p) {
    const auto edge_faces = local_edge_faces(p);
    // boundary edges with the direction their face traverses them
    std::unordered_map<int, std::vector<std::pair<int, EdgeKey>>> outgoing, incident;
    std::vector<std::pair<int, int>> starts;
    for (int i = 0; i < p.num_faces(); ++i) {
        for (int k = 0; k < 3; ++k) {
            const int a = p.corners[i][k], b = p.corners[i][(k + 1) % 3];
            const EdgeKey key = edge_key(a, b);
            if (edge_faces.at(key).size() != 1) continue;
            outgoing[a].emplace_back(b, key);
            incident[a].emplace_back(b, key);
            incident[b].emplace_back(a, key);
            starts.emplace_back(a, b);
        }
    }
    for (auto& [_, v] : outgoing) std::sort(v.begin(), v.end());
    for (auto& [_, v] : incident) std::sort(v.begin(), v.end());

    std::set<EdgeKey> used;
    std::vector<std::vector<int>> loops;
    for (const auto& [a0, b0] : starts) {
        if (used.count(edge_key(a0, b0))) continue;
        std::vector<int> loop{a0};
        used.insert(edge_key(a0, b0));
        int cur = b0;
        while (cur != a0) {
            loop.push_back(cur);
            int next = -1;
            EdgeKey next_key = 0;
            for (const auto& [w, key] : outgoing[cur])
                if (!used.count(key)) {
                    next = w;
                    next_key = key;
                    break;
                }
            if (next < 0)
                for (const auto& [w, key] : incident[cur])
                    if (!used.count(key)) {
                        next = w;
                        next_key = key;
                        break;
                    }
            if (next < 0) break;  // open chain; cannot happen on a manifold patch
            used.insert(next_key);
            cur = next;
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

double loop_length(const TriMesh& mesh, const Patch& p, const std::vector<int>& loop) {
    double len = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const int a = p.vertex_origin[loop[i]];
        const int b = p.vertex_origin[loop[(i + 1) % loop.size()]];
        len += (mesh.vertex(a) - mesh.vertex(b)).norm();
    }
    return len;
}

void refresh_topology(const TriMesh& mesh, Patch& p) {
    p.boundary_loops = boundary_loops(mesh, p);
    p.is_disk = p.boundary_loops.size() == 1 && p.euler_characteristic() == 1 && all_fans_single(p);
}

Patch cut_to_disk(const TriMesh& mesh, const Patch& patch) {
    if (patch.faces.empty()) throw std::invalid_argument("cut_to_disk: empty patch");
    if (!is_edge_connected(mesh, patch.faces)) throw Error("cut_to_disk: patch is not edge-connected");
    Patch p = patch;
    split_fans(p, {});
    refresh_topology(mesh, p);
    const Patch start = p;
    // short seams first: bridge loops, open handles, slit spheres
    try {
        const int max_rounds = 4 * p.num_faces() + 8;
        for (int round = 0; round < max_rounds; ++round) {
            if (p.is_disk) return p;
            const int b = static_cast<int>(p.boundary_loops.size());
            const int genus = (2 - p.euler_characteristic() - b) / 2;
            const int root = p.corners[p.local_face(p.seed)][0];
            std::set<EdgeKey> cut;
            if (b >= 2)
                cut = loop_bridge(mesh, p);
            else if (genus > 0)
                cut = genus_cycle(mesh, p, root);
            else
                cut = sphere_slit(mesh, p, root);
            split_fans(p, cut);
            refresh_topology(mesh, p);
            ++p.seam_cuts;
            // a handle cycle that runs along the boundary can split the patch
            if (!locally_connected(p)) break;
        }
    } catch (const Error&) {
    }
    // fall back to a cut graph, which always works
    p = start;
    std::set<EdgeKey> cut = cut_graph(mesh, p);
    if (cut.empty() && p.boundary_loops.empty()) cut = sphere_slit(mesh, p, p.corners[p.local_face(p.seed)][0]);
    split_fans(p, cut);
    refresh_topology(mesh, p);
    ++p.seam_cuts;
    if (!p.is_disk) throw Error("cut_to_disk: did not reach disk topology");
    return p;
}

}  // namespace flatsel
