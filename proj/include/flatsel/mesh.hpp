// Indexed triangle mesh with the derived connectivity and per-face geometry
// the selection pipeline needs. A TriMesh is built once and never mutated.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace flatsel {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported input geometry.
struct MeshError : Error {
    using Error::Error;
};

struct MeshEdge {
    int v0 = -1, v1 = -1;  // v0 < v1
    int f0 = -1, f1 = -1;  // f1 == -1 on the boundary
    double dihedral = std::numbers::pi;  // interior angle in (0, pi]; pi when coplanar
    double length = 0.0;
    bool boundary() const { return f1 < 0; }
};

class TriMesh {
public:
    // Validates and derives everything. Throws MeshError on repeated
    // indices, out-of-range indices, zero-area faces and edges shared by
    // more than two faces.
    static TriMesh build(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    const Vec3& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& face(int f) const { return faces_[f]; }

    const std::vector<MeshEdge>& edges() const { return edges_; }
    const MeshEdge& edge(int e) const { return edges_[e]; }

    // Edge k of face f joins corners k and (k+1)%3.
    int face_edge(int f, int k) const { return face_edges_[f][k]; }
    // Face across edge k of face f, or -1.
    int face_neighbor(int f, int k) const { return face_adjacency_[f][k]; }
    // Edge-sharing neighbours of f, boundary slots omitted.
    std::vector<int> neighbors(int f) const;

    double face_area(int f) const { return face_areas_[f]; }
    const std::vector<double>& face_areas() const { return face_areas_; }
    const Vec3& face_normal(int f) const { return face_normals_[f]; }
    Vec3 face_centroid(int f) const;
    const Vec3& vertex_normal(int v) const { return vertex_normals_[v]; }

    // Orthonormal in-plane basis; axis 0 runs along corner0 -> corner1.
    const std::array<Vec3, 2>& face_frame(int f) const { return face_frames_[f]; }
    // Corner positions in the face frame: column 0 is the origin, column 1
    // lies on the positive x axis.
    const Eigen::Matrix<double, 2, 3>& face_local(int f) const { return face_local_[f]; }

    // Faces around each vertex.
    const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }
    // Edge id for the unordered vertex pair, or -1.
    int find_edge(int a, int b) const;

    double bbox_diagonal() const;
    double mean_edge_length() const;

    // Order-sensitive 64-bit digest of positions and faces.
    std::uint64_t content_hash() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<MeshEdge> edges_;
    std::vector<std::array<int, 3>> face_edges_;
    std::vector<std::array<int, 3>> face_adjacency_;
    std::vector<double> face_areas_;
    std::vector<Vec3> face_normals_;
    std::vector<std::array<Vec3, 2>> face_frames_;
    std::vector<Eigen::Matrix<double, 2, 3>> face_local_;
    std::vector<Vec3> vertex_normals_;
    std::vector<std::vector<int>> vertex_faces_;
    std::vector<std::vector<std::pair<int, int>>> vertex_edges_;  // (other vertex, edge)
};

// Wavefront OBJ. Only `v` and `f` records are read; texture and normal
// indices in face records are ignored. Exactly coincident vertices are
// merged.
TriMesh parse_obj(std::istream& in);
TriMesh load_mesh(const std::string& path);
TriMesh parse_obj_string(const std::string& text);

void write_obj(std::ostream& out, const TriMesh& mesh);
void save_obj(const std::string& path, const TriMesh& mesh);

}  // namespace flatsel
