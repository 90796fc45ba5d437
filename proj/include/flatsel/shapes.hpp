// Procedural primitives with per-face segment labels. Each primitive knows
// its developable decomposition (cube sides, cylinder side and caps, ...).
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "flatsel/mesh.hpp"

namespace flatsel {

struct Primitive {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<int> labels;              // per face, 0 .. num_segments-1
    std::vector<char> segment_is_sphere;  // per segment

    int num_segments() const { return static_cast<int>(segment_is_sphere.size()); }
    TriMesh mesh() const { return TriMesh::build(vertices, faces); }

    // Appends `other`, shifting its labels past ours.
    void append(const Primitive& other);
    // Merges vertices closer than `tol` (bucketed, deterministic).
    void weld(double tol = 1e-9);
    // Flips faces so normals point away from `center`.
    void orient_outward(const Vec3& center);
    void transform(const std::function<Vec3(const Vec3&)>& f);
};

// z = 0 rectangle [0, sx] x [0, sy] split into nx x ny quads.
Primitive plane_grid(int nx, int ny, double sx = 1.0, double sy = 1.0);
// Axis-aligned cube [-s/2, s/2]^3, n x n quads per side, one segment per side.
Primitive cube(int n = 1, double size = 1.0);
// Cube sides x = 0, y = 0, z = 0 of [0, s]^3 meeting at the origin.
Primitive three_sided_cube(int n = 4, double size = 1.0);
// Axis along z, z in [0, h]. Segments: side 0, then bottom 1 and top 2 when capped.
Primitive cylinder(int n_around, int n_height, double radius = 1.0, double height = 2.0, bool caps = true,
                   int cap_rings = 0);
// Apex at z = h. Segments: side 0, base 1 when capped.
Primitive cone(int n_around, int n_height, double radius = 1.0, double height = 1.5, bool cap = true);
Primitive icosphere(int subdivisions, double radius = 1.0);
// Regular tetrahedron with unit circumradius, n x n subdivision per side.
Primitive tetrahedron(int n = 1);
// Upper unit hemisphere, open along the equator.
Primitive hemisphere(int n_rings, int n_around, double radius = 1.0);
Primitive torus(int n_major, int n_minor, double major = 1.0, double minor = 0.35);

}  // namespace flatsel
