#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "flatsel/param.hpp"
#include "flatsel/distortion.hpp"

namespace flatsel {

Mat2 closest_rotation(const Mat2& J) {
    // argmin over det = +1 of |J - R|_F; reflections land on a proper rotation
    const double a = J(0, 0) + J(1, 1);
    const double b = J(1, 0) - J(0, 1);
    const double h = std::hypot(a, b);
    if (h == 0.0) return Mat2::Identity();
    Mat2 R;
    R << a / h, -b / h, b / h, a / h;
    return R;
}

namespace {

struct FaceGeom {
    Eigen::Matrix<double, 2, 3> local;
    std::array<double, 3> cot;  // cot of the angle opposite edge (k, k+1)
};

FaceGeom face_geom(const TriMesh& mesh, int f) {
    FaceGeom g;
    g.local = mesh.face_local(f);
    for (int k = 0; k < 3; ++k) {
        const Vec2 o = g.local.col((k + 2) % 3);
        const Vec2 a = g.local.col(k) - o;
        const Vec2 b = g.local.col((k + 1) % 3) - o;
        g.cot[k] = a.dot(b) / std::abs(a.x() * b.y() - a.y() * b.x());
    }
    return g;
}

double face_energy(const FaceGeom& g, const Mat2& R, const Vec2 u[3]) {
    double e = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int l = (k + 1) % 3;
        const Vec2 d = (u[k] - u[l]) - R * (g.local.col(k) - g.local.col(l));
        e += g.cot[k] * d.squaredNorm();
    }
    return e;
}

}  // namespace

UVMap isometric_refine(const TriMesh& mesh, const Patch& patch, const UVMap& init, int max_iters, double tol) {
    if (!patch.is_disk) throw std::invalid_argument("isometric_refine: patch is not a topological disk");
    const int nv = patch.num_vertices();
    const int nf = patch.num_faces();
    if (init.uv.rows() != nv) throw std::invalid_argument("isometric_refine: UV map does not cover the patch");

    std::vector<FaceGeom> geom(nf);
    for (int i = 0; i < nf; ++i) geom[i] = face_geom(mesh, patch.faces[i]);

    UVMap out = init;
    out.iterations = 0;
    out.energy_trace.clear();
    out.flips_corrected = 0;
    auto jac = face_jacobians(mesh, patch, out.uv);
    for (const Mat2& J : jac)
        if (J.determinant() < 0.0) ++out.flips_corrected;

    const int pin = init.pins[0] >= 0 && init.pins[0] < nv ? init.pins[0] : patch.corners[0][0];

    // cotangent Laplacian with `pin` eliminated, factorized once
    std::vector<int> idx(nv, -1);
    int n = 0;
    for (int v = 0; v < nv; ++v)
        if (v != pin) idx[v] = n++;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nf * 12);
    for (int i = 0; i < nf; ++i) {
        const auto& c = patch.corners[i];
        for (int k = 0; k < 3; ++k) {
            const int a = c[k], b = c[(k + 1) % 3];
            const double w = geom[i].cot[k];
            if (idx[a] >= 0) trip.emplace_back(idx[a], idx[a], w);
            if (idx[b] >= 0) trip.emplace_back(idx[b], idx[b], w);
            if (idx[a] >= 0 && idx[b] >= 0) {
                trip.emplace_back(idx[a], idx[b], -w);
                trip.emplace_back(idx[b], idx[a], -w);
            }
        }
    }
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    if (n > 0) {
        solver.compute(L);
        if (solver.info() != Eigen::Success) throw SolveError("isometric_refine: Laplacian factorization failed");
    }

    std::vector<Mat2> rot(nf);
    auto local_step = [&](const Eigen::MatrixX2d& uv) {
        const auto J = face_jacobians(mesh, patch, uv);
        for (int i = 0; i < nf; ++i) rot[i] = closest_rotation(J[i]);
    };
    auto energy = [&](const Eigen::MatrixX2d& uv) {
        double e = 0.0;
        for (int i = 0; i < nf; ++i) {
            const auto& c = patch.corners[i];
            const Vec2 u[3] = {uv.row(c[0]).transpose(), uv.row(c[1]).transpose(), uv.row(c[2]).transpose()};
            e += face_energy(geom[i], rot[i], u);
        }
        return e;
    };

    double area = 0.0;
    for (int f : patch.faces) area += mesh.face_area(f);
    const double floor = 1e-16 * area;  // round-off level; nothing left to refine

    local_step(out.uv);
    double e_prev = energy(out.uv);
    out.energy_trace.push_back(e_prev);
    if (n == 0) return out;

    for (int it = 0; it < max_iters; ++it) {
        Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n, 2);
        for (int i = 0; i < nf; ++i) {
            const auto& c = patch.corners[i];
            for (int k = 0; k < 3; ++k) {
                const int a = c[k], b = c[(k + 1) % 3];
                const double w = geom[i].cot[k];
                const Vec2 t = w * (rot[i] * (geom[i].local.col(k) - geom[i].local.col((k + 1) % 3)));
                if (idx[a] >= 0) rhs.row(idx[a]) += t.transpose();
                if (idx[b] >= 0) rhs.row(idx[b]) -= t.transpose();
                // pinned neighbour moves to the right-hand side
                if (idx[a] >= 0 && idx[b] < 0) rhs.row(idx[a]) += w * out.uv.row(b);
                if (idx[b] >= 0 && idx[a] < 0) rhs.row(idx[b]) += w * out.uv.row(a);
            }
        }
        const Eigen::MatrixX2d sol = solver.solve(rhs);
        if (!sol.allFinite()) throw SolveError("isometric_refine: global step failed");
        Eigen::MatrixX2d next = out.uv;
        for (int v = 0; v < nv; ++v)
            if (idx[v] >= 0) next.row(v) = sol.row(idx[v]);
        local_step(next);
        const double e = energy(next);
        ++out.iterations;
        if (e > e_prev) {
            // round-off only; the alternating scheme cannot increase the energy
            local_step(out.uv);
            out.energy_trace.push_back(e_prev);
            break;
        }
        out.uv = std::move(next);
        out.energy_trace.push_back(e);
        const bool converged = e <= floor || e_prev - e <= tol * std::max(e_prev, 1e-300);
        e_prev = e;
        if (converged) break;
    }
    out.jacobians = face_jacobians(mesh, patch, out.uv);
    for (int k = 0; k < 2; ++k)
        if (out.pins[k] >= 0 && out.pins[k] < nv) out.pin_uv[k] = out.uv.row(out.pins[k]).transpose();
    return out;
}

}  // namespace flatsel
