#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "flatsel/mesh.hpp"
#include "flatsel/shapes.hpp"

using namespace flatsel;

namespace {

const char* kCubeObj = R"(# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";

}  // namespace

TEST_CASE("cube obj loads with the expected combinatorics") {
    const TriMesh m = parse_obj_string(kCubeObj);
    CHECK(m.num_vertices() == 8);
    CHECK(m.num_faces() == 12);
    CHECK(m.num_edges() == 18);
    for (const auto& e : m.edges()) {
        CHECK_FALSE(e.boundary());
        CHECK(e.dihedral > 0.0);
        CHECK(e.dihedral <= std::numbers::pi);
    }
    int creases = 0;
    for (const auto& e : m.edges())
        if (std::abs(e.dihedral - std::numbers::pi / 2) < 1e-12) ++creases;
        else CHECK(e.dihedral == doctest::Approx(std::numbers::pi));
    CHECK(creases == 12);
}

TEST_CASE("obj with a quad is rejected") {
    const char* quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
    CHECK_THROWS_WITH_AS(parse_obj_string(quad), doctest::Contains("non-triangular"), MeshError);
}

TEST_CASE("collinear face is rejected as degenerate") {
    const char* flat = "v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n";
    CHECK_THROWS_WITH_AS(parse_obj_string(flat), doctest::Contains("degenerate face"), MeshError);
}

TEST_CASE("non-manifold edge is rejected") {
    const char* fin = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n";
    CHECK_THROWS_WITH_AS(parse_obj_string(fin), doctest::Contains("non-manifold"), MeshError);
}

TEST_CASE("slash tokens, negative indices and exact duplicates") {
    const char* obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 0 0\nvt 0 0\nf 1/1 2/1 3/1\nf -2 -1 -4\n";
    // v4 duplicates v2, so the second face is the first one reversed
    const TriMesh m = parse_obj_string(obj);
    CHECK(m.num_vertices() == 3);
    CHECK(m.num_faces() == 2);
}

TEST_CASE("write and reload round-trips geometry") {
    const TriMesh a = cube(2).mesh();
    std::stringstream ss;
    write_obj(ss, a);
    const TriMesh b = parse_obj(ss);
    CHECK(a.num_faces() == b.num_faces());
    CHECK(a.content_hash() == b.content_hash());
}

TEST_CASE("dihedral angles are symmetric and local frames are consistent") {
    const TriMesh m = cylinder(12, 3).mesh();
    for (int f = 0; f < m.num_faces(); ++f) {
        const auto& P = m.face_local(f);
        CHECK(P(0, 0) == 0.0);
        CHECK(P(1, 1) == 0.0);
        CHECK(P(0, 1) > 0.0);
        const double area = 0.5 * std::abs(P(0, 1) * P(1, 2));
        CHECK(area == doctest::Approx(m.face_area(f)).epsilon(1e-12));
        for (int k = 0; k < 3; ++k) {
            const int g = m.face_neighbor(f, k);
            if (g < 0) continue;
            const int e = m.face_edge(f, k);
            bool found = false;
            for (int j = 0; j < 3; ++j)
                if (m.face_edge(g, j) == e) found = m.face_neighbor(g, j) == f;
            CHECK(found);
        }
    }
}
