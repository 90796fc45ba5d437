#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "conformal.hpp"
#include "flatsel/param.hpp"

namespace flatsel {

namespace detail {

JacobianOp jacobian_operator(const Eigen::Matrix<double, 2, 3>& local) {
    Mat2 P;
    P.col(0) = local.col(1) - local.col(0);
    P.col(1) = local.col(2) - local.col(0);
    const Mat2 Q = P.inverse();
    // J = D Q with D = [u1-u0, u2-u0; v1-v0, v2-v0]
    JacobianOp G = JacobianOp::Zero();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            auto row = G.row(2 * r + c);
            for (int k = 0; k < 2; ++k) {
                row(2 * (k + 1) + r) += Q(k, c);
                row(r) -= Q(k, c);
            }
        }
    return G;
}

Residual conformal_residual(const Eigen::Matrix<double, 2, 3>& local) {
    const JacobianOp G = jacobian_operator(local);
    Residual M;
    M.row(0) = (G.row(0) - G.row(3)) / std::sqrt(2.0);
    M.row(1) = (G.row(1) + G.row(2)) / std::sqrt(2.0);
    return M;
}

Mat2 jacobian(const Eigen::Matrix<double, 2, 3>& local, const Vec2& u0, const Vec2& u1, const Vec2& u2) {
    Mat2 P, D;
    P.col(0) = local.col(1) - local.col(0);
    P.col(1) = local.col(2) - local.col(0);
    D.col(0) = u1 - u0;
    D.col(1) = u2 - u0;
    return D * P.inverse();
}

ConformalSystem build_system(const TriMesh& mesh, const Patch& domain, const std::vector<double>& weight,
                             Pins pins) {
    ConformalSystem sys;
    sys.num_vertices = domain.num_vertices();
    sys.tris = domain.corners;
    sys.residuals.reserve(domain.faces.size());
    sys.coeff.reserve(domain.faces.size());
    for (int i = 0; i < domain.num_faces(); ++i) {
        const int f = domain.faces[i];
        sys.residuals.push_back(conformal_residual(mesh.face_local(f)));
        sys.coeff.push_back(weight[i] * mesh.face_area(f));
    }
    sys.pins = pins;
    const double d = (mesh.vertex(domain.vertex_origin[pins[0]]) - mesh.vertex(domain.vertex_origin[pins[1]])).norm();
    sys.pin_uv = {Vec2(0.0, 0.0), Vec2(d, 0.0)};
    return sys;
}

Pins heaviest_face_pins(const TriMesh& mesh, const Patch& domain, const std::vector<double>& weight) {
    int best = 0;
    for (int i = 1; i < domain.num_faces(); ++i)
        if (weight[i] > weight[best]) best = i;
    const auto& c = domain.corners[best];
    int k_best = 0;
    double len_best = -1.0;
    for (int k = 0; k < 3; ++k) {
        const double len = (mesh.vertex(domain.vertex_origin[c[k]]) -
                            mesh.vertex(domain.vertex_origin[c[(k + 1) % 3]])).norm();
        if (len > len_best) {
            len_best = len;
            k_best = k;
        }
    }
    return {c[k_best], c[(k_best + 1) % 3]};
}

void ConformalSystem::solve() {
    std::vector<char> used(num_vertices, 0);
    for (const auto& t : tris)
        for (int v : t) used[v] = 1;
    for (int p : pins)
        if (p < 0 || p >= num_vertices || !used[p]) throw SolveError("pinned vertex is not in the domain");
    if (pins[0] == pins[1]) throw SolveError("pins must be two distinct vertices");

    dof.assign(2 * num_vertices, -1);
    num_free = 0;
    for (int v = 0; v < num_vertices; ++v) {
        if (!used[v] || v == pins[0] || v == pins[1]) continue;
        dof[2 * v] = num_free++;
        dof[2 * v + 1] = num_free++;
    }
    x = Eigen::VectorXd::Zero(2 * num_vertices);
    for (int k = 0; k < 2; ++k) x.segment<2>(2 * pins[k]) = pin_uv[k];
    if (num_free == 0) return;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(tris.size() * 36);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(num_free);
    for (std::size_t i = 0; i < tris.size(); ++i) {
        const Eigen::Matrix<double, 6, 6> H = coeff[i] * residuals[i].transpose() * residuals[i];
        int g[6];
        for (int c = 0; c < 3; ++c) {
            g[2 * c] = 2 * tris[i][c];
            g[2 * c + 1] = 2 * tris[i][c] + 1;
        }
        for (int a = 0; a < 6; ++a) {
            const int ra = dof[g[a]];
            if (ra < 0) continue;
            for (int b = 0; b < 6; ++b) {
                const int rb = dof[g[b]];
                if (rb >= 0)
                    trip.emplace_back(ra, rb, H(a, b));
                else
                    rhs[ra] -= H(a, b) * x[g[b]];
            }
        }
    }
    Eigen::SparseMatrix<double> K(num_free, num_free);
    K.setFromTriplets(trip.begin(), trip.end());
    factor = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(K);
    if (factor->info() != Eigen::Success || factor->vectorD().minCoeff() <= 0.0)
        throw SolveError("conformal system is singular");
    const Eigen::VectorXd sol = factor->solve(rhs);
    if (factor->info() != Eigen::Success || !sol.allFinite()) throw SolveError("conformal solve failed");
    for (int j = 0; j < 2 * num_vertices; ++j)
        if (dof[j] >= 0) x[j] = sol[dof[j]];
}

Coords ConformalSystem::face_coords(int i) const {
    Coords c;
    for (int k = 0; k < 3; ++k) c.segment<2>(2 * k) = x.segment<2>(2 * tris[i][k]);
    return c;
}

double ConformalSystem::energy() const {
    double e = 0.0;
    for (std::size_t i = 0; i < tris.size(); ++i)
        e += coeff[i] * (residuals[i] * face_coords(static_cast<int>(i))).squaredNorm();
    return e;
}

Eigen::MatrixX2d uv_matrix(const ConformalSystem& sys) {
    Eigen::MatrixX2d uv(sys.num_vertices, 2);
    for (int v = 0; v < sys.num_vertices; ++v) uv.row(v) = sys.x.segment<2>(2 * v).transpose();
    return uv;
}

}  // namespace detail

namespace {

UVMap finish(const TriMesh& mesh, const Patch& domain, const detail::ConformalSystem& sys, Eigen::MatrixX2d uv) {
    UVMap out;
    out.uv = std::move(uv);
    out.jacobians = face_jacobians(mesh, domain, out.uv);
    out.pins = sys.pins;
    out.pin_uv = sys.pin_uv;
    return out;
}

// Uniform-Laplacian fill for vertices the solve did not cover; `known`
// marks vertices whose UV is fixed. Components with no fixed vertex stay at
// the origin.
void harmonic_fill(const TriMesh& mesh, const std::vector<char>& known, Eigen::MatrixX2d& uv) {
    const int nv = mesh.num_vertices();
    std::vector<std::vector<int>> nb(nv);
    for (const MeshEdge& e : mesh.edges()) {
        nb[e.v0].push_back(e.v1);
        nb[e.v1].push_back(e.v0);
    }
    // keep only unknown vertices connected to something known
    std::vector<char> reach(nv, 0);
    std::deque<int> queue;
    for (int v = 0; v < nv; ++v)
        if (known[v]) {
            reach[v] = 1;
            queue.push_back(v);
        }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : nb[v])
            if (!reach[w]) {
                reach[w] = 1;
                queue.push_back(w);
            }
    }
    std::vector<int> idx(nv, -1);
    int n = 0;
    for (int v = 0; v < nv; ++v) {
        if (known[v]) continue;
        if (reach[v])
            idx[v] = n++;
        else
            uv.row(v).setZero();
    }
    if (n == 0) return;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n, 2);
    for (int v = 0; v < nv; ++v) {
        if (idx[v] < 0) continue;
        trip.emplace_back(idx[v], idx[v], static_cast<double>(nb[v].size()));
        for (int w : nb[v]) {
            if (idx[w] >= 0)
                trip.emplace_back(idx[v], idx[w], -1.0);
            else if (known[w])
                rhs.row(idx[v]) += uv.row(w);
        }
    }
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success) throw SolveError("harmonic extension failed");
    const Eigen::MatrixX2d sol = solver.solve(rhs);
    for (int v = 0; v < nv; ++v)
        if (idx[v] >= 0) uv.row(v) = sol.row(idx[v]);
}

}  // namespace

std::vector<Mat2> face_jacobians(const TriMesh& mesh, const Patch& patch, const Eigen::MatrixX2d& uv) {
    std::vector<Mat2> out(patch.faces.size());
    for (int i = 0; i < patch.num_faces(); ++i) {
        const auto& c = patch.corners[i];
        out[i] = detail::jacobian(mesh.face_local(patch.faces[i]), uv.row(c[0]).transpose(),
                                  uv.row(c[1]).transpose(), uv.row(c[2]).transpose());
    }
    return out;
}

double conformal_energy(const TriMesh& mesh, const Patch& patch, const Eigen::MatrixX2d& uv,
                        const WeightField* weights) {
    double e = 0.0;
    const auto J = face_jacobians(mesh, patch, uv);
    for (int i = 0; i < patch.num_faces(); ++i) {
        const Mat2& A = J[i];
        const double off = (A(0, 0) - A(1, 1)) * (A(0, 0) - A(1, 1)) + (A(0, 1) + A(1, 0)) * (A(0, 1) + A(1, 0));
        const double w = weights ? (*weights)[patch.faces[i]] : 1.0;
        e += w * mesh.face_area(patch.faces[i]) * 0.5 * off;
    }
    return e;
}

Pins farthest_vertex_pair(const TriMesh& mesh, const Patch& patch) {
    std::vector<int> verts;
    {
        std::vector<char> used(patch.num_vertices(), 0);
        for (const auto& c : patch.corners)
            for (int v : c) used[v] = 1;
        for (int v = 0; v < patch.num_vertices(); ++v)
            if (used[v]) verts.push_back(v);
    }
    auto pos = [&](int v) -> const Vec3& { return mesh.vertex(patch.vertex_origin[v]); };
    Pins best{verts[0], verts.size() > 1 ? verts[1] : verts[0]};
    double best_d = -1.0;
    if (verts.size() <= 3000) {
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = i + 1; j < verts.size(); ++j) {
                const double d = (pos(verts[i]) - pos(verts[j])).squaredNorm();
                if (d > best_d) {
                    best_d = d;
                    best = {verts[i], verts[j]};
                }
            }
        return best;
    }
    // large patches: repeated farthest-point sweeps
    int a = verts[0];
    for (int sweep = 0; sweep < 4; ++sweep) {
        int far = a;
        double far_d = -1.0;
        for (int v : verts) {
            const double d = (pos(v) - pos(a)).squaredNorm();
            if (d > far_d) {
                far_d = d;
                far = v;
            }
        }
        if (far_d > best_d) {
            best_d = far_d;
            best = {std::min(a, far), std::max(a, far)};
        }
        a = far;
    }
    return best;
}

UVMap lscm(const TriMesh& mesh, const Patch& patch, std::optional<Pins> pins) {
    if (patch.faces.empty()) throw std::invalid_argument("lscm: empty patch");
    if (!patch.is_disk) throw std::invalid_argument("lscm: patch is not a topological disk; run cut_to_disk first");
    const Pins p = pins ? *pins : farthest_vertex_pair(mesh, patch);
    if (p[0] == p[1] || p[0] < 0 || p[1] < 0 || p[0] >= patch.num_vertices() || p[1] >= patch.num_vertices())
        throw std::invalid_argument("lscm: pins must be two distinct patch vertices");
    auto sys = detail::build_system(mesh, patch, std::vector<double>(patch.faces.size(), 1.0), p);
    sys.solve();
    return finish(mesh, patch, sys, detail::uv_matrix(sys));
}

UVMap wlscm(const TriMesh& mesh, const WeightField& weights, std::optional<Pins> pins, const WlscmOptions& opts) {
    weights.validate(mesh);
    const int nf = mesh.num_faces();
    bool any = false;
    for (double w : weights.values) any = any || w > 0.0;
    if (!any) throw std::invalid_argument("wlscm: empty soft segmentation (all weights zero)");

    // face the support component grows from
    int start = -1;
    if (pins) {
        for (int f : mesh.vertex_faces((*pins)[0]))
            if (weights[f] > 0.0 && (start < 0 || weights[f] > weights[start])) start = f;
        if (start < 0) throw std::invalid_argument("wlscm: pinned vertex touches no positive-weight face");
    } else {
        start = 0;
        for (int f = 1; f < nf; ++f)
            if (weights[f] > weights[start]) start = f;
    }
    std::vector<int> support;
    {
        std::vector<char> seen(nf, 0);
        std::deque<int> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            const int f = queue.front();
            queue.pop_front();
            support.push_back(f);
            for (int k = 0; k < 3; ++k) {
                const int g = mesh.face_neighbor(f, k);
                if (g >= 0 && !seen[g] && weights[g] > 0.0) {
                    seen[g] = 1;
                    queue.push_back(g);
                }
            }
        }
        std::sort(support.begin(), support.end());
    }

    Patch domain;
    domain.faces = support;
    domain.seed = start;
    domain.vertex_origin.resize(mesh.num_vertices());
    std::iota(domain.vertex_origin.begin(), domain.vertex_origin.end(), 0);
    std::vector<double> w(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        domain.corners.push_back(mesh.face(support[i]));
        w[i] = std::max(weights[support[i]], opts.weight_floor);
    }
    Pins p;
    if (pins) {
        p = *pins;
        std::vector<char> in_support(mesh.num_vertices(), 0);
        for (const auto& c : domain.corners)
            for (int v : c) in_support[v] = 1;
        if (p[0] == p[1] || !in_support[p[0]] || !in_support[p[1]])
            throw std::invalid_argument("wlscm: pins must be distinct vertices of positive-weight faces");
    } else {
        p = detail::heaviest_face_pins(mesh, domain, w);
    }
    auto sys = detail::build_system(mesh, domain, w, p);
    sys.solve();

    Eigen::MatrixX2d uv = detail::uv_matrix(sys);
    std::vector<char> known(mesh.num_vertices(), 0);
    for (const auto& c : domain.corners)
        for (int v : c) known[v] = 1;
    if (static_cast<int>(support.size()) < nf) harmonic_fill(mesh, known, uv);
    return finish(mesh, whole_mesh_patch(mesh), sys, std::move(uv));
}

}  // namespace flatsel
