#include "flatsel/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

namespace flatsel {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
    // FNV-1a over the eight bytes of x
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

TriMesh TriMesh::build(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces) {
    TriMesh m;
    m.vertices_ = std::move(vertices);
    m.faces_ = std::move(faces);
    const int nv = m.num_vertices();
    const int nf = m.num_faces();

    for (int f = 0; f < nf; ++f) {
        const auto& t = m.faces_[f];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= nv)
                throw MeshError("face " + std::to_string(f) + " references vertex " +
                                std::to_string(t[k]) + " out of range");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw MeshError("degenerate face " + std::to_string(f) + ": repeated vertex");
    }

    m.face_areas_.resize(nf);
    m.face_normals_.resize(nf);
    m.face_frames_.resize(nf);
    m.face_local_.resize(nf);
    for (int f = 0; f < nf; ++f) {
        const auto& t = m.faces_[f];
        const Vec3& p0 = m.vertices_[t[0]];
        const Vec3 e1 = m.vertices_[t[1]] - p0;
        const Vec3 e2 = m.vertices_[t[2]] - p0;
        const Vec3 cr = e1.cross(e2);
        const double area = 0.5 * cr.norm();
        const double longest = std::max({e1.norm(), e2.norm(), (e2 - e1).norm()});
        if (!(area > 1e-12 * longest * longest) || !std::isfinite(area))
            throw MeshError("degenerate face " + std::to_string(f) + ": zero area");
        m.face_areas_[f] = area;
        const Vec3 n = cr / cr.norm();
        m.face_normals_[f] = n;
        const Vec3 x = e1.normalized();
        const Vec3 y = n.cross(x);
        m.face_frames_[f] = {x, y};
        Eigen::Matrix<double, 2, 3> loc;
        loc << 0.0, e1.norm(), e2.dot(x),
               0.0, 0.0, e2.dot(y);
        m.face_local_[f] = loc;
    }

    // Edges keyed by sorted vertex pair.
    std::map<std::pair<int, int>, int> edge_index;
    m.face_edges_.assign(nf, {-1, -1, -1});
    for (int f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) {
            int a = m.faces_[f][k], b = m.faces_[f][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, m.num_edges());
            if (inserted) {
                MeshEdge e;
                e.v0 = key.first;
                e.v1 = key.second;
                e.f0 = f;
                e.length = (m.vertices_[a] - m.vertices_[b]).norm();
                m.edges_.push_back(e);
            } else {
                MeshEdge& e = m.edges_[it->second];
                if (e.f1 >= 0 || e.f0 == f)
                    throw MeshError("non-manifold edge (" + std::to_string(key.first) + ", " +
                                    std::to_string(key.second) + ")");
                e.f1 = f;
            }
            m.face_edges_[f][k] = it->second;
        }
    }

    m.face_adjacency_.assign(nf, {-1, -1, -1});
    for (int f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) {
            const MeshEdge& e = m.edges_[m.face_edges_[f][k]];
            if (!e.boundary()) m.face_adjacency_[f][k] = (e.f0 == f) ? e.f1 : e.f0;
        }
    }

    for (MeshEdge& e : m.edges_) {
        if (e.boundary()) continue;
        const Vec3& n0 = m.face_normals_[e.f0];
        const Vec3& n1 = m.face_normals_[e.f1];
        const double between = std::atan2(n0.cross(n1).norm(), n0.dot(n1));
        e.dihedral = std::clamp(std::numbers::pi - between, 1e-12, std::numbers::pi);
    }

    m.vertex_faces_.assign(nv, {});
    m.vertex_edges_.assign(nv, {});
    m.vertex_normals_.assign(nv, Vec3::Zero());
    for (int f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) {
            m.vertex_faces_[m.faces_[f][k]].push_back(f);
            m.vertex_normals_[m.faces_[f][k]] += m.face_areas_[f] * m.face_normals_[f];
        }
    }
    for (int e = 0; e < m.num_edges(); ++e) {
        m.vertex_edges_[m.edges_[e].v0].emplace_back(m.edges_[e].v1, e);
        m.vertex_edges_[m.edges_[e].v1].emplace_back(m.edges_[e].v0, e);
    }
    for (auto& n : m.vertex_normals_) {
        const double len = n.norm();
        if (len > 0) n /= len;
    }
    return m;
}

std::vector<int> TriMesh::neighbors(int f) const {
    std::vector<int> out;
    for (int g : face_adjacency_[f])
        if (g >= 0) out.push_back(g);
    return out;
}

Vec3 TriMesh::face_centroid(int f) const {
    const auto& t = faces_[f];
    return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

int TriMesh::find_edge(int a, int b) const {
    for (const auto& [other, e] : vertex_edges_[a])
        if (other == b) return e;
    return -1;
}

double TriMesh::bbox_diagonal() const {
    if (vertices_.empty()) return 0.0;
    Vec3 lo = vertices_[0], hi = vertices_[0];
    for (const Vec3& p : vertices_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

double TriMesh::mean_edge_length() const {
    if (edges_.empty()) return 0.0;
    double s = 0.0;
    for (const MeshEdge& e : edges_) s += e.length;
    return s / static_cast<double>(edges_.size());
}

std::uint64_t TriMesh::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = mix(h, vertices_.size());
    for (const Vec3& p : vertices_) {
        for (int k = 0; k < 3; ++k) {
            std::uint64_t bits;
            double c = p[k];
            std::memcpy(&bits, &c, sizeof bits);
            h = mix(h, bits);
        }
    }
    h = mix(h, faces_.size());
    for (const auto& t : faces_)
        for (int v : t) h = mix(h, static_cast<std::uint64_t>(v));
    return h;
}

TriMesh parse_obj(std::istream& in) {
    std::vector<Vec3> raw;
    std::vector<std::array<int, 3>> faces;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p[0] >> p[1] >> p[2]))
                throw MeshError("line " + std::to_string(line_no) + ": malformed vertex");
            raw.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                int v = 0;
                try {
                    v = std::stoi(tok.substr(0, tok.find('/')));
                } catch (const std::exception&) {
                    throw MeshError("line " + std::to_string(line_no) + ": malformed face index");
                }
                if (v == 0) throw MeshError("line " + std::to_string(line_no) + ": zero index");
                idx.push_back(v > 0 ? v - 1 : static_cast<int>(raw.size()) + v);
            }
            if (idx.size() != 3)
                throw MeshError("non-triangular face " + std::to_string(faces.size()) + " (" +
                                std::to_string(idx.size()) + " vertices)");
            faces.push_back({idx[0], idx[1], idx[2]});
        }
    }

    // Merge bit-identical positions, keeping first-seen order.
    std::map<std::array<double, 3>, int> seen;
    std::vector<int> remap(raw.size());
    std::vector<Vec3> verts;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] =
            seen.try_emplace({raw[i][0], raw[i][1], raw[i][2]}, static_cast<int>(verts.size()));
        if (inserted) verts.push_back(raw[i]);
        remap[i] = it->second;
    }
    for (auto& t : faces)
        for (int& v : t) {
            if (v < 0 || v >= static_cast<int>(raw.size()))
                throw MeshError("face references vertex " + std::to_string(v) + " out of range");
            v = remap[v];
        }
    return TriMesh::build(std::move(verts), std::move(faces));
}

TriMesh parse_obj_string(const std::string& text) {
    std::istringstream in(text);
    return parse_obj(in);
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open " + path);
    return parse_obj(in);
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
    out.precision(17);
    for (const Vec3& p : mesh.vertices()) out << "v " << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
    for (const auto& t : mesh.faces())
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void save_obj(const std::string& path, const TriMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_obj(out, mesh);
}

}  // namespace flatsel
