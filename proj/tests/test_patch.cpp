#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "flatsel/patch.hpp"
#include "flatsel/shapes.hpp"

using namespace flatsel;

namespace {

std::vector<int> faces_with_label(const Primitive& p, int label) {
    std::vector<int> out;
    for (int f = 0; f < static_cast<int>(p.labels.size()); ++f)
        if (p.labels[f] == label) out.push_back(f);
    return out;
}

void check_disk(const TriMesh& mesh, const Patch& in, const Patch& out) {
    CHECK(out.is_disk);
    CHECK(out.boundary_loops.size() == 1);
    CHECK(out.euler_characteristic() == 1);
    CHECK(out.faces == in.faces);
    CHECK(out.seed == in.seed);
    for (int i = 0; i < out.num_faces(); ++i)
        for (int k = 0; k < 3; ++k)
            CHECK(out.vertex_origin[out.corners[i][k]] == mesh.face(out.faces[i])[k]);
}

}  // namespace

TEST_CASE("floodfill keeps the seed's island only") {
    const Primitive prim = plane_grid(6, 2);
    const TriMesh m = prim.mesh();
    WeightField w = WeightField::constant(m.num_faces(), 0.0);
    // two islands separated by a zero column
    for (int f = 0; f < m.num_faces(); ++f) {
        const double x = m.face_centroid(f).x();
        if (x < 2.0 / 6 || x > 4.0 / 6) w[f] = 0.9;
    }
    const int seed = 0;
    const Patch p = floodfill_patch(m, w, seed, 0.5);
    for (int f : p.faces) CHECK(m.face_centroid(f).x() < 0.5);
    CHECK(p.num_faces() == 8);
    CHECK(p.contains(seed));
}

TEST_CASE("floodfill of all ones is the whole mesh and the seed fallback is a singleton") {
    const TriMesh m = cube(2).mesh();
    const Patch all = floodfill_patch(m, WeightField::constant(m.num_faces(), 1.0), 5, 0.5);
    CHECK(all.num_faces() == m.num_faces());
    WeightField w = WeightField::constant(m.num_faces(), 1.0);
    w[7] = 0.2;
    const Patch single = floodfill_patch(m, w, 7, 0.5);
    CHECK(single.faces == std::vector<int>{7});
    CHECK(single.is_disk);
}

TEST_CASE("floodfill is idempotent") {
    const TriMesh m = cylinder(16, 4).mesh();
    WeightField w(std::vector<double>(m.num_faces()));
    for (int f = 0; f < m.num_faces(); ++f) w[f] = 0.5 + 0.5 * std::sin(1.7 * f);
    const auto a = floodfill_faces(m, w, 3, 0.5);
    const auto b = floodfill_faces(m, WeightField::indicator(m.num_faces(), a), 3, 0.5);
    CHECK(a == b);
}

TEST_CASE("boundary loops of closed, holed and annular patches") {
    const Primitive c = cube(1);
    const TriMesh cm = c.mesh();
    CHECK(boundary_loops(cm, whole_mesh_patch(cm)).empty());

    std::vector<int> five;
    for (int f = 0; f < cm.num_faces(); ++f)
        if (c.labels[f] != 0) five.push_back(f);
    const Patch holed = make_patch(cm, five, five[0]);
    REQUIRE(holed.boundary_loops.size() == 1);
    CHECK(holed.boundary_loops[0].size() == 4);
    CHECK(holed.is_disk);

    const Primitive cyl = cylinder(12, 3);
    const TriMesh ym = cyl.mesh();
    const auto side = faces_with_label(cyl, 0);
    const Patch annulus = make_patch(ym, side, side[0]);
    CHECK(annulus.boundary_loops.size() == 2);
    CHECK_FALSE(annulus.is_disk);
}

TEST_CASE("cut_to_disk on an annulus needs a single cut") {
    const Primitive cyl = cylinder(24, 6, 1.0, 2.0, false);
    const TriMesh m = cyl.mesh();
    const Patch p = whole_mesh_patch(m);
    const Patch d = cut_to_disk(m, p);
    check_disk(m, p, d);
    CHECK(d.seam_cuts == 1);
    // a straight seam of n_height edges duplicates n_height + 1 vertices
    CHECK(d.num_vertices() == m.num_vertices() + 7);
}

TEST_CASE("cut_to_disk leaves a disk untouched") {
    const TriMesh m = plane_grid(4, 3).mesh();
    const Patch p = whole_mesh_patch(m, 5);
    const Patch d = cut_to_disk(m, p);
    CHECK(d.seam_cuts == 0);
    CHECK(d.corners == p.corners);
    CHECK(d.vertex_origin == p.vertex_origin);
}

TEST_CASE("cut_to_disk on a torus takes two cuts") {
    const TriMesh m = torus(16, 8).mesh();
    const Patch p = whole_mesh_patch(m);
    const Patch d = cut_to_disk(m, p);
    check_disk(m, p, d);
    CHECK(d.seam_cuts == 2);
}

TEST_CASE("cut_to_disk on closed and multiply holed surfaces") {
    for (const Primitive& prim : {cube(2), icosphere(1), cylinder(10, 3)}) {
        const TriMesh m = prim.mesh();
        const Patch p = whole_mesh_patch(m, 3);
        check_disk(m, p, cut_to_disk(m, p));
    }
    // plane with two interior holes: three loops
    const Primitive g = plane_grid(9, 5);
    const TriMesh m = g.mesh();
    std::vector<int> keep;
    for (int f = 0; f < m.num_faces(); ++f) {
        const Vec3 c = m.face_centroid(f);
        const bool hole1 = c.x() > 2.0 / 9 && c.x() < 3.0 / 9 && c.y() > 0.4 && c.y() < 0.6;
        const bool hole2 = c.x() > 6.0 / 9 && c.x() < 7.0 / 9 && c.y() > 0.4 && c.y() < 0.6;
        if (!hole1 && !hole2) keep.push_back(f);
    }
    const Patch holed = make_patch(m, keep, keep[0]);
    CHECK(holed.boundary_loops.size() == 3);
    const Patch d = cut_to_disk(m, holed);
    check_disk(m, holed, d);
    CHECK(d.seam_cuts == 2);
}

TEST_CASE("cut_to_disk splits pinched vertices") {
    // two triangles sharing a single vertex are not edge-connected
    const TriMesh m = TriMesh::build({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}},
                                     {{0, 1, 2}, {0, 3, 4}});
    CHECK_THROWS_AS(cut_to_disk(m, whole_mesh_patch(m)), Error);
    // a bowtie fan joined through one edge path is connected
    const TriMesh fan = TriMesh::build({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {-1, 1, 0}, {-1, 0, 0},
                                        {-1, -1, 0}, {0, -1, 0}, {1, -1, 0}},
                                       {{0, 1, 2}, {0, 2, 3}, {0, 5, 6}, {0, 6, 7}, {1, 8, 0}});
    const Patch p = whole_mesh_patch(fan);
    CHECK_FALSE(p.is_disk);
}

TEST_CASE("cut_to_disk on crossing bands of a torus") {
    // one ring around the tube and one around the hole: a punctured torus
    const int nu = 24, nv = 12;
    const TriMesh m = torus(nu, nv).mesh();
    std::vector<int> keep;
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i)
            if (i < 2 || j < 2) {
                keep.push_back(2 * (j * nu + i));
                keep.push_back(2 * (j * nu + i) + 1);
            }
    const Patch p = make_patch(m, keep, keep[0]);
    REQUIRE(p.boundary_loops.size() == 1);
    REQUIRE(p.euler_characteristic() == -1);
    check_disk(m, p, cut_to_disk(m, p));
    for (int seed : {keep[5], keep[40], keep.back()}) {
        const Patch q = make_patch(m, keep, seed);
        check_disk(m, q, cut_to_disk(m, q));
    }
}

TEST_CASE("cut_to_disk on random blobs of a torus") {
    const TriMesh m = torus(30, 14).mesh();
    for (int seed : {0, 101, 377, 640}) {
        for (double frac : {0.3, 0.6, 0.9}) {
            // breadth-first ball around the seed
            std::vector<char> in(m.num_faces(), 0);
            std::vector<int> faces{seed}, queue{seed};
            in[seed] = 1;
            const int target = static_cast<int>(frac * m.num_faces());
            for (std::size_t h = 0; h < queue.size() && static_cast<int>(faces.size()) < target; ++h)
                for (int g : m.neighbors(queue[h]))
                    if (!in[g] && static_cast<int>(faces.size()) < target) {
                        in[g] = 1;
                        faces.push_back(g);
                        queue.push_back(g);
                    }
            const Patch p = make_patch(m, faces, seed);
            check_disk(m, p, cut_to_disk(m, p));
        }
    }
}
