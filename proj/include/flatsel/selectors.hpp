// Seed-conditioned patch selectors. Every selector returns an edge-connected
// patch holding the seed plus a per-face weight field (the indicator of the
// patch, or the raw soft field for the optimized selector).
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "flatsel/losses.hpp"
#include "flatsel/mesh.hpp"
#include "flatsel/patch.hpp"
#include "flatsel/weights.hpp"

namespace flatsel {

struct Selection {
    Patch patch;
    WeightField weights;
    double seg_time = 0.0;  // seconds, filled in by run_selector
};

// ---- DCharts ---------------------------------------------------------------

struct DChartsConfig {
    double alpha = 1.0;    // fitting exponent
    double beta = 0.7;     // compactness exponent
    double gamma_s = 0.5;  // straight-boundary exponent
    double f_max = 0.2;
    int max_outer_iters = 50;

    // Fitting term only; compactness and straightness switched off.
    static DChartsConfig proxy_biased() {
        DChartsConfig c;
        c.beta = 0.0;
        c.gamma_s = 0.0;
        return c;
    }
    void validate() const;
};

// Developability proxy: faces fit when their normal makes angle theta with axis.
struct Proxy {
    Vec3 axis = Vec3::UnitZ();
    double theta = 0.0;
};

double fitting_error(const Proxy& proxy, const Vec3& normal);
// Area-weighted fit over `faces`: the least-variance direction of the
// normals, or the mean normal when that fits at least as well.
Proxy fit_proxy(const TriMesh& mesh, std::span<const int> faces);

Selection select_dcharts(const TriMesh& mesh, int seed, const DChartsConfig& cfg = {});

// ---- logarithmic map ------------------------------------------------------

// Geodesic polar coordinates around the seed centroid, per mesh vertex,
// propagated in Dijkstra order with upwind averaging and frame transport.
Eigen::MatrixX2d discrete_exp_map(const TriMesh& mesh, int seed);

Selection select_logmap(const TriMesh& mesh, int seed, double lambda = 0.05);

// ---- distortion-greedy growth ----------------------------------------------

struct GreedyConfig {
    double lambda = 0.05;
    int reparam_every = 0;  // 0: adaptive, max(4, |patch| / 4)
    int refine_iters = 100;  // same defaults as finalize_patch, so the final map passes too
    double refine_tol = 1e-8;
    // Growth stops after this many lscm + refine checkpoints (0: no limit).
    // Near the distortion limit every checkpoint admits at most one face.
    int max_checkpoints = 64;
    // After a failed checkpoint growth stops once the halved batch drops
    // below this fraction of the patch (0: refine down to single faces).
    double min_batch_frac = 1.0 / 64.0;
    // Growth stops before the faces flattened in failed checkpoints would
    // exceed work_budget * |F| (0: no limit). Accepted checkpoints grow
    // geometrically so their cost is already bounded.
    double work_budget = 2.0;
};

Selection select_greedy(const TriMesh& mesh, int seed, const GreedyConfig& cfg = {});

// ---- direct weight optimization ---------------------------------------------

struct OptimizedConfig {
    LossConfig loss;
    int steps = 40;
    double lr = 0.25;
    OptimizeOptions options;
};

Selection select_optimized(const TriMesh& mesh, int seed, const OptimizedConfig& cfg = {});

// ---- dispatch ----------------------------------------------------------------

enum class SelectorKind { optimized, dcharts, logmap, greedy };

std::optional<SelectorKind> parse_selector(std::string_view name);
std::string selector_name(SelectorKind kind);

struct SelectorConfig {
    DChartsConfig dcharts;
    double logmap_lambda = 0.05;
    GreedyConfig greedy;
    OptimizedConfig optimized;
};

// Validates the seed and times the selection.
Selection run_selector(const TriMesh& mesh, int seed, SelectorKind kind, const SelectorConfig& cfg = {});

}  // namespace flatsel
