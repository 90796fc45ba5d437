#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "doctest.h"
#include "flatsel/distortion.hpp"
#include "flatsel/param.hpp"
#include "flatsel/shapes.hpp"

using namespace flatsel;

namespace {

std::vector<int> faces_with_label(const Primitive& p, int label) {
    std::vector<int> out;
    for (int f = 0; f < static_cast<int>(p.labels.size()); ++f)
        if (p.labels[f] == label) out.push_back(f);
    return out;
}

// Best similarity a * R(x) + t from x to y in the least-squares sense;
// returns the residual normalised by the spread of y.
double procrustes_residual(const Eigen::MatrixX2d& x, const Eigen::MatrixX2d& y) {
    const Eigen::RowVector2d mx = x.colwise().mean(), my = y.colwise().mean();
    const Eigen::MatrixX2d X = x.rowwise() - mx, Y = y.rowwise() - my;
    // complex least squares: y = z * x with z = a + ib
    double num_re = 0, num_im = 0, den = 0;
    for (int i = 0; i < X.rows(); ++i) {
        num_re += X(i, 0) * Y(i, 0) + X(i, 1) * Y(i, 1);
        num_im += X(i, 0) * Y(i, 1) - X(i, 1) * Y(i, 0);
        den += X.row(i).squaredNorm();
    }
    const double a = num_re / den, b = num_im / den;
    double r = 0;
    for (int i = 0; i < X.rows(); ++i) {
        const Eigen::RowVector2d p(a * X(i, 0) - b * X(i, 1), b * X(i, 0) + a * X(i, 1));
        r += (p - Y.row(i)).squaredNorm();
    }
    return std::sqrt(r / Y.squaredNorm());
}

}  // namespace

TEST_CASE("single triangle maps with zero conformal energy") {
    const TriMesh m = TriMesh::build({{0, 0, 0}, {2, 0, 1}, {0.3, 1.4, -0.2}}, {{0, 1, 2}});
    const Patch p = whole_mesh_patch(m);
    const UVMap uv = lscm(m, p);
    CHECK(conformal_energy(m, p, uv.uv) < 1e-24);
    // pins at true distance make the map an isometry
    const auto sd = singular_distortions(uv.jacobians, DistortionVariant::eval);
    CHECK(sd.isometric[0] < 1e-20);
}

TEST_CASE("planar grid maps by a similarity") {
    const TriMesh m = plane_grid(5, 4, 2.0, 1.0).mesh();
    const Patch p = whole_mesh_patch(m);
    const UVMap uv = lscm(m, p);
    CHECK(conformal_energy(m, p, uv.uv) <= 1e-10);
    Eigen::MatrixX2d xy(m.num_vertices(), 2);
    for (int v = 0; v < m.num_vertices(); ++v) xy.row(v) = m.vertex(v).head<2>().transpose();
    CHECK(procrustes_residual(xy, uv.uv) < 1e-10);
    CHECK(uv.uv.row(uv.pins[0]).norm() == 0.0);
}

TEST_CASE("hemisphere cannot be mapped conformally with zero energy") {
    const TriMesh m = hemisphere(6, 16).mesh();
    const Patch p = whole_mesh_patch(m);
    CHECK(conformal_energy(m, p, lscm(m, p).uv) > 1e-4);
}

TEST_CASE("lscm rejects non-disk patches and bad pins") {
    const TriMesh m = cylinder(12, 3, 1.0, 1.0, false).mesh();
    CHECK_THROWS_AS(lscm(m, whole_mesh_patch(m)), std::invalid_argument);
    const TriMesh g = plane_grid(2, 2).mesh();
    CHECK_THROWS_AS(lscm(g, whole_mesh_patch(g), Pins{1, 1}), std::invalid_argument);
}

TEST_CASE("jacobians reproduce the uv edge vectors") {
    const TriMesh m = hemisphere(4, 12).mesh();
    const Patch p = whole_mesh_patch(m);
    const UVMap uv = lscm(m, p);
    for (int i = 0; i < p.num_faces(); ++i) {
        const auto& P = m.face_local(p.faces[i]);
        const auto& c = p.corners[i];
        for (int k = 1; k < 3; ++k) {
            const Vec2 du = (uv.uv.row(c[k]) - uv.uv.row(c[0])).transpose();
            const Vec2 pred = uv.jacobians[i] * (P.col(k) - P.col(0));
            CHECK((pred - du).norm() <= 1e-9 * du.norm());
        }
    }
}

TEST_CASE("different pins give the same map up to a similarity on a developable sheet") {
    // a grid rolled onto a quarter cylinder
    Primitive sheet = plane_grid(8, 5, 1.5, 1.0);
    sheet.transform([](const Vec3& x) { return Vec3(std::sin(x.x()), x.y(), 1.0 - std::cos(x.x())); });
    const TriMesh m = sheet.mesh();
    const Patch p = whole_mesh_patch(m);
    const UVMap a = lscm(m, p);
    const UVMap b = lscm(m, p, Pins{3, 40});
    CHECK(procrustes_residual(a.uv, b.uv) <= 1e-7);
}

TEST_CASE("on a curved patch the pin choice changes more than a similarity") {
    const TriMesh m = hemisphere(5, 14).mesh();
    const Patch p = whole_mesh_patch(m);
    CHECK(procrustes_residual(lscm(m, p).uv, lscm(m, p, Pins{3, 40}).uv) > 1e-4);
}

TEST_CASE("rigid motion leaves the optimal conformal energy unchanged") {
    Primitive prim = hemisphere(5, 12);
    const TriMesh m0 = prim.mesh();
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    prim.transform([&](const Vec3& x) { return Vec3(R * x + Vec3(4, -2, 0.5)); });
    const TriMesh m1 = prim.mesh();
    const Patch p0 = whole_mesh_patch(m0), p1 = whole_mesh_patch(m1);
    const double e0 = conformal_energy(m0, p0, lscm(m0, p0).uv);
    const double e1 = conformal_energy(m1, p1, lscm(m1, p1).uv);
    CHECK(std::abs(e0 - e1) <= 1e-9);
}

TEST_CASE("wlscm with unit weights equals lscm on the whole mesh") {
    const TriMesh m = hemisphere(5, 12).mesh();
    const Patch p = whole_mesh_patch(m);
    const UVMap w = wlscm(m, WeightField::constant(m.num_faces(), 1.0));
    const UVMap l = lscm(m, p, w.pins);
    CHECK((w.uv - l.uv).cwiseAbs().maxCoeff() < 1e-8);
    const UVMap half = wlscm(m, WeightField::constant(m.num_faces(), 0.5));
    CHECK((half.uv - w.uv).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("wlscm rejects an empty segmentation") {
    const TriMesh m = plane_grid(2, 2).mesh();
    CHECK_THROWS_WITH(wlscm(m, WeightField::constant(m.num_faces(), 0.0)), doctest::Contains("empty soft segmentation"));
}

TEST_CASE("three-sided cube: zero weight on one side reproduces lscm of the rest") {
    const Primitive prim = three_sided_cube(4);
    const TriMesh m = prim.mesh();
    WeightField w = WeightField::constant(m.num_faces(), 1.0);
    for (int f : faces_with_label(prim, 2)) w[f] = 0.0;
    std::vector<int> rest;
    for (int f = 0; f < m.num_faces(); ++f)
        if (w[f] > 0) rest.push_back(f);
    const UVMap wm = wlscm(m, w);
    const Patch p = make_patch(m, rest, rest[0]);
    REQUIRE(p.is_disk);
    const Pins pins{static_cast<int>(std::find(p.vertex_origin.begin(), p.vertex_origin.end(), wm.pins[0]) -
                                     p.vertex_origin.begin()),
                    static_cast<int>(std::find(p.vertex_origin.begin(), p.vertex_origin.end(), wm.pins[1]) -
                                     p.vertex_origin.begin())};
    const UVMap lm = lscm(m, p, pins);
    double err = 0;
    for (int v = 0; v < p.num_vertices(); ++v)
        err = std::max(err, (lm.uv.row(v) - wm.uv.row(p.vertex_origin[v])).norm());
    CHECK(err < 1e-8);
}

TEST_CASE("isometric refine flattens a cylinder side exactly") {
    const TriMesh m = cylinder(24, 6, 1.0, 1.5, false).mesh();
    const Patch p = cut_to_disk(m, whole_mesh_patch(m));
    const UVMap init = lscm(m, p);
    const UVMap out = isometric_refine(m, p, init, 200, 1e-14);
    const auto arap = arap_energy(m, p, out.uv);
    CHECK(*std::max_element(arap.begin(), arap.end()) <= 1e-8);
    for (std::size_t i = 1; i < out.energy_trace.size(); ++i) CHECK(out.energy_trace[i] <= out.energy_trace[i - 1]);
}

TEST_CASE("isometric refine is a fixed point on an already rigid planar map") {
    const TriMesh m = plane_grid(3, 3).mesh();
    const Patch p = whole_mesh_patch(m);
    const UVMap init = lscm(m, p);
    const UVMap out = isometric_refine(m, p, init, 50, 1e-6);
    CHECK(out.iterations == 1);
    CHECK(out.energy_trace.back() <= 1e-20);
}

TEST_CASE("isometric refine energy is monotone on a hemisphere") {
    const TriMesh m = hemisphere(8, 20).mesh();
    const Patch p = whole_mesh_patch(m);
    const UVMap out = isometric_refine(m, p, lscm(m, p), 100, 0.0);
    CHECK(out.energy_trace.size() >= 2);
    for (std::size_t i = 1; i < out.energy_trace.size(); ++i) CHECK(out.energy_trace[i] <= out.energy_trace[i - 1]);
    CHECK(out.energy_trace.back() < out.energy_trace.front());
}

TEST_CASE("reflected initial maps are counted and corrected") {
    const TriMesh m = plane_grid(3, 3).mesh();
    const Patch p = whole_mesh_patch(m);
    UVMap init = lscm(m, p);
    init.uv.col(1) *= -1.0;
    const UVMap out = isometric_refine(m, p, init, 100, 1e-12);
    CHECK(out.flips_corrected == p.num_faces());
    for (const Mat2& J : out.jacobians) CHECK(J.determinant() > 0.0);
}
