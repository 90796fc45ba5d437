#include "flatsel/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "conformal.hpp"
#include "flatsel/distortion.hpp"

namespace flatsel {

namespace {

constexpr double kWeightFloor = 1e-7;

double edge_cost(const MeshEdge& e, double omega) {
    const double theta = std::min(e.dihedral, std::numbers::pi);
    return -omega * std::log(theta / std::numbers::pi);
}

int interior_edge_count(const TriMesh& mesh) {
    int n = 0;
    for (const MeshEdge& e : mesh.edges())
        if (!e.boundary()) ++n;
    return n;
}

Pins seed_edge_pins(const TriMesh& mesh, const Patch& p) {
    const int i = p.local_face(p.seed);
    const auto& f = mesh.face(p.seed);
    int best = 0;
    double best_len = -1.0;
    for (int k = 0; k < 3; ++k) {
        const double len = (mesh.vertex(f[k]) - mesh.vertex(f[(k + 1) % 3])).norm();
        if (len > best_len) {
            best_len = len;
            best = k;
        }
    }
    return {p.corners[i][best], p.corners[i][(best + 1) % 3]};
}

// phi(D) = 1 - exp(-(D/gamma)^alpha) and its derivative
double phi(double D, const LossConfig& cfg) {
    if (!std::isfinite(D)) return 1.0;
    return 1.0 - std::exp(-std::pow(D / cfg.gamma, cfg.alpha));
}

double phi_prime(double D, const LossConfig& cfg) {
    if (!std::isfinite(D) || D <= 0.0) return 0.0;
    const double r = D / cfg.gamma;
    return cfg.alpha / cfg.gamma * std::pow(r, cfg.alpha - 1.0) * std::exp(-std::pow(r, cfg.alpha));
}

LossEvaluation evaluate(const TriMesh& mesh, const WeightField& weights, int seed, const LossConfig& cfg,
                        detail::ConformalSystem& sys) {
    cfg.validate();
    weights.validate(mesh);
    if (seed < 0 || seed >= mesh.num_faces()) throw std::invalid_argument("seed face out of range");

    LossEvaluation out;
    const auto region = floodfill_faces(mesh, weights, seed, cfg.floodfill_threshold);
    out.patch = cut_to_disk(mesh, make_patch(mesh, region, seed));
    const Patch& p = out.patch;

    std::vector<double> w(p.faces.size());
    for (int i = 0; i < p.num_faces(); ++i) w[i] = std::max(weights[p.faces[i]], kWeightFloor);
    sys = detail::build_system(mesh, p, w, seed_edge_pins(mesh, p));
    sys.solve();

    out.uv.uv = detail::uv_matrix(sys);
    out.uv.pins = sys.pins;
    out.uv.pin_uv = sys.pin_uv;
    out.uv.jacobians = face_jacobians(mesh, p, out.uv.uv);
    out.per_face_D.resize(p.faces.size());
    for (int i = 0; i < p.num_faces(); ++i) out.per_face_D[i] = arap_density(out.uv.jacobians[i]);

    out.threshold = threshold_loss(mesh, out.per_face_D, p, cfg);
    out.smooth = smooth_loss(mesh, weights, cfg);
    out.total = out.threshold + out.smooth;
    return out;
}

}  // namespace

void LossConfig::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be at least 1");
    if (!(omega >= 0.0)) throw std::invalid_argument("omega must be non-negative");
    if (!(floodfill_threshold > 0.0 && floodfill_threshold < 1.0))
        throw std::invalid_argument("floodfill threshold must lie in (0, 1)");
}

double arap_density(const Mat2& J) { return 2.0 * (J - closest_rotation(J)).squaredNorm(); }

double threshold_loss(const TriMesh& mesh, const std::vector<double>& per_face_D, const Patch& active,
                      const LossConfig& cfg) {
    if (per_face_D.size() != active.faces.size())
        throw std::invalid_argument("threshold_loss: one distortion value per active face expected");
    double area = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < active.faces.size(); ++i) {
        const double a = mesh.face_area(active.faces[i]);
        area += a;
        sum += a * phi(per_face_D[i], cfg);
    }
    return area > 0.0 ? sum / area : 0.0;
}

double smooth_loss(const TriMesh& mesh, const WeightField& weights, const LossConfig& cfg) {
    const int n = interior_edge_count(mesh);
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (const MeshEdge& e : mesh.edges())
        if (!e.boundary()) sum += edge_cost(e, cfg.omega) * std::abs(weights[e.f0] - weights[e.f1]);
    return sum / n;
}

std::vector<double> smooth_loss_grad(const TriMesh& mesh, const WeightField& weights, const LossConfig& cfg) {
    std::vector<double> g(mesh.num_faces(), 0.0);
    const int n = interior_edge_count(mesh);
    if (n == 0) return g;
    for (const MeshEdge& e : mesh.edges()) {
        if (e.boundary()) continue;
        const double d = weights[e.f0] - weights[e.f1];
        if (d == 0.0) continue;  // subgradient 0 at the kink
        const double c = edge_cost(e, cfg.omega) / n * (d > 0.0 ? 1.0 : -1.0);
        g[e.f0] += c;
        g[e.f1] -= c;
    }
    return g;
}

LossEvaluation total_loss(const TriMesh& mesh, const WeightField& weights, int seed, const LossConfig& cfg) {
    detail::ConformalSystem sys;
    return evaluate(mesh, weights, seed, cfg, sys);
}

LossGradient grad_weights(const TriMesh& mesh, const WeightField& weights, int seed, const LossConfig& cfg) {
    detail::ConformalSystem sys;
    LossGradient out;
    out.loss = evaluate(mesh, weights, seed, cfg, sys);
    out.grad = smooth_loss_grad(mesh, weights, cfg);
    const Patch& p = out.loss.patch;
    if (sys.num_free == 0) return out;

    double area = 0.0;
    for (int f : p.faces) area += mesh.face_area(f);

    // dL/dx over the free coordinates
    Eigen::VectorXd dldx = Eigen::VectorXd::Zero(sys.num_free);
    for (int i = 0; i < p.num_faces(); ++i) {
        const double D = out.loss.per_face_D[i];
        const double s = mesh.face_area(p.faces[i]) / area * phi_prime(D, cfg);
        if (s == 0.0) continue;
        const Mat2& J = out.loss.uv.jacobians[i];
        const Mat2 dJ = 4.0 * s * (J - closest_rotation(J));
        const Eigen::Vector4d vec(dJ(0, 0), dJ(0, 1), dJ(1, 0), dJ(1, 1));
        const detail::Coords gx = detail::jacobian_operator(mesh.face_local(p.faces[i])).transpose() * vec;
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 2; ++a) {
                const int d = sys.dof[2 * p.corners[i][k] + a];
                if (d >= 0) dldx[d] += gx[2 * k + a];
            }
    }

    const Eigen::VectorXd lambda = sys.factor->solve(dldx);
    if (sys.factor->info() != Eigen::Success) throw SolveError("adjoint solve failed");

    for (int i = 0; i < p.num_faces(); ++i) {
        const int f = p.faces[i];
        if (weights[f] < kWeightFloor) continue;  // floored weight is locally constant
        detail::Coords lam = detail::Coords::Zero();
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 2; ++a) {
                const int d = sys.dof[2 * p.corners[i][k] + a];
                if (d >= 0) lam[2 * k + a] = lambda[d];
            }
        const detail::Residual& M = sys.residuals[i];
        out.grad[f] -= mesh.face_area(f) * (M * lam).dot(M * sys.face_coords(i));
    }
    return out;
}

WeightField initial_weights(const TriMesh& mesh, int seed, const OptimizeOptions& opts) {
    if (seed < 0 || seed >= mesh.num_faces()) throw std::invalid_argument("seed face out of range");
    const double radius = opts.init_radius * mesh.bbox_diagonal();
    std::vector<double> dist(mesh.num_faces(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[seed] = 0.0;
    queue.emplace(0.0, seed);
    while (!queue.empty()) {
        const auto [d, f] = queue.top();
        queue.pop();
        if (d > dist[f] || d > radius) continue;
        for (int k = 0; k < 3; ++k) {
            const int g = mesh.face_neighbor(f, k);
            if (g < 0) continue;
            const double nd = d + (mesh.face_centroid(f) - mesh.face_centroid(g)).norm();
            if (nd < dist[g]) {
                dist[g] = nd;
                queue.emplace(nd, g);
            }
        }
    }
    WeightField w = WeightField::constant(mesh.num_faces(), 0.5 - opts.init_margin);
    for (int f = 0; f < mesh.num_faces(); ++f)
        if (dist[f] <= radius) w[f] = 1.0;
    return w;
}

OptimizeResult optimize_weights(const TriMesh& mesh, int seed, const LossConfig& cfg, int steps, double lr,
                                const OptimizeOptions& opts) {
    if (steps < 0) throw std::invalid_argument("steps must be non-negative");
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    OptimizeResult out;
    out.weights = initial_weights(mesh, seed, opts);
    if (steps == 0) return out;

    LossGradient cur = grad_weights(mesh, out.weights, seed, cfg);
    out.loss_trace.push_back(cur.loss.total);
    for (int step = 0; step < steps; ++step) {
        double gmax = 0.0;
        for (double g : cur.grad) gmax = std::max(gmax, std::abs(g));
        if (gmax == 0.0) break;
        double size = lr;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, size *= 0.5) {
            WeightField next = out.weights;
            for (int f = 0; f < mesh.num_faces(); ++f)
                next[f] = std::clamp(next[f] - size * cur.grad[f] / gmax, 0.0, 1.0);
            const double loss = total_loss(mesh, next, seed, cfg).total;
            if (loss <= cur.loss.total) {
                out.weights = std::move(next);
                cur = grad_weights(mesh, out.weights, seed, cfg);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.stalled = true;
            out.warning = "step " + std::to_string(step) + ": no decrease after " +
                          std::to_string(opts.max_halvings) + " halvings; returning best weights so far";
            break;
        }
        ++out.steps_taken;
        out.loss_trace.push_back(cur.loss.total);
    }
    return out;
}

}  // namespace flatsel
