#include "flatsel/postprocess.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boykov_kolmogorov_max_flow.hpp>

namespace flatsel {

namespace {

using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using FlowGraph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS,
    boost::property<boost::vertex_index_t, long,
                    boost::property<boost::vertex_color_t, boost::default_color_type,
                                    boost::property<boost::vertex_distance_t, long,
                                                    boost::property<boost::vertex_predecessor_t,
                                                                    Traits::edge_descriptor>>>>,
    boost::property<boost::edge_capacity_t, double,
                    boost::property<boost::edge_residual_capacity_t, double,
                                    boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

void add_arc_pair(FlowGraph& g, int a, int b, double cap_ab, double cap_ba) {
    auto cap = boost::get(boost::edge_capacity, g);
    auto rev = boost::get(boost::edge_reverse, g);
    const auto e = boost::add_edge(a, b, g).first;
    const auto r = boost::add_edge(b, a, g).first;
    cap[e] = cap_ab;
    cap[r] = cap_ba;
    rev[e] = r;
    rev[r] = e;
}

std::pair<double, double> unaries(double w, const GraphcutOptions& opts) {
    if (opts.unary == Unary::linear) return {w, 1.0 - w};  // (U(0), U(1))
    const double c = std::clamp(w, opts.eps, 1.0 - opts.eps);
    return {-std::log(1.0 - c), -std::log(c)};
}

double pair_cost(const MeshEdge& e, const GraphcutOptions& opts) {
    const double theta = std::clamp(e.dihedral, opts.theta_min, std::numbers::pi);
    return -std::log(theta / std::numbers::pi);
}

}  // namespace

double graphcut_energy(const TriMesh& mesh, const WeightField& weights, const std::vector<char>& labels,
                       const GraphcutOptions& opts) {
    double e = 0.0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto [u0, u1] = unaries(weights[f], opts);
        e += labels[f] ? u1 : u0;
    }
    for (const MeshEdge& edge : mesh.edges())
        if (!edge.boundary() && labels[edge.f0] != labels[edge.f1]) e += pair_cost(edge, opts);
    return e;
}

WeightField graphcut_smooth(const TriMesh& mesh, const WeightField& weights, const GraphcutOptions& opts) {
    weights.validate(mesh);
    const int n = mesh.num_faces();
    const int source = n, sink = n + 1;
    FlowGraph g(n + 2);
    // source side = label 1: cutting s->f pays U(0), cutting f->t pays U(1)
    for (int f = 0; f < n; ++f) {
        auto [u0, u1] = unaries(weights[f], opts);
        const double m = std::min(u0, u1);
        add_arc_pair(g, source, f, u0 - m, 0.0);
        add_arc_pair(g, f, sink, u1 - m, 0.0);
    }
    for (const MeshEdge& e : mesh.edges()) {
        if (e.boundary()) continue;
        const double c = pair_cost(e, opts);
        if (c > 0.0) add_arc_pair(g, e.f0, e.f1, c, c);
    }
    boost::boykov_kolmogorov_max_flow(g, source, sink);
    auto color = boost::get(boost::vertex_color, g);
    WeightField out = WeightField::constant(n, 0.0);
    for (int f = 0; f < n; ++f)
        if (color[f] == boost::black_color) out[f] = 1.0;
    return out;
}

UVMap flatten_patch(const TriMesh& mesh, const Patch& patch, Patch& cut, int refine_iters, double refine_tol) {
    cut = cut_to_disk(mesh, patch);
    const UVMap init = lscm(mesh, cut);
    return isometric_refine(mesh, cut, init, refine_iters, refine_tol);
}

FinalizeResult finalize_patch(const TriMesh& mesh, const WeightField& weights, int seed,
                              const FinalizeOptions& opts) {
    weights.validate(mesh);
    if (seed < 0 || seed >= mesh.num_faces()) throw std::invalid_argument("seed face out of range");
    FinalizeResult out;
    if (opts.smooth) {
        out.binary = graphcut_smooth(mesh, weights, opts.graphcut);
    } else {
        out.binary = WeightField::constant(mesh.num_faces(), 0.0);
        for (int f = 0; f < mesh.num_faces(); ++f) out.binary[f] = weights[f] >= 0.5 ? 1.0 : 0.0;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Patch region = floodfill_patch(mesh, out.binary, seed, 0.5);
    out.uv = flatten_patch(mesh, region, out.patch, opts.refine_iters, opts.refine_tol);
    out.report = make_report(mesh, out.patch, out.uv, opts.lambda);
    out.report.uv_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace flatsel
