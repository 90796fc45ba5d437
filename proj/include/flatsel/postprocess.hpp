// Inference-time cleanup: binary graphcut smoothing of a soft segmentation,
// then floodfill, seam cutting and isometric parameterization.
#pragma once

#include <vector>

#include "flatsel/distortion.hpp"
#include "flatsel/mesh.hpp"
#include "flatsel/param.hpp"
#include "flatsel/patch.hpp"
#include "flatsel/weights.hpp"

namespace flatsel {

enum class Unary {
    log_prob,  // U(1) = -log w, U(0) = -log(1 - w), w clamped to [eps, 1 - eps]
    linear,    // U(1) = 1 - w, U(0) = w
};

struct GraphcutOptions {
    Unary unary = Unary::log_prob;
    double eps = 1e-6;
    double theta_min = 0.017453292519943295;  // one degree
};

// Cost of a labelling: sum of unaries plus -log(theta/pi) per interior edge
// whose faces disagree, theta clamped to [theta_min, pi].
double graphcut_energy(const TriMesh& mesh, const WeightField& weights, const std::vector<char>& labels,
                       const GraphcutOptions& opts = {});

// Exact minimizer of graphcut_energy by max-flow. Returns 0/1 weights.
WeightField graphcut_smooth(const TriMesh& mesh, const WeightField& weights, const GraphcutOptions& opts = {});

struct FinalizeOptions {
    GraphcutOptions graphcut;
    bool smooth = true;  // run graphcuts before the floodfill
    double lambda = 0.05;
    int refine_iters = 100;
    double refine_tol = 1e-8;
};

struct FinalizeResult {
    WeightField binary;  // graphcut output (or the thresholded input when smooth = false)
    Patch patch;         // disk topology, contains the seed
    UVMap uv;
    DistortionReport report;
};

// graphcuts -> floodfill at 0.5 -> cut_to_disk -> lscm -> isometric_refine
// -> eval-variant distortion report (uv_time filled in).
FinalizeResult finalize_patch(const TriMesh& mesh, const WeightField& weights, int seed,
                              const FinalizeOptions& opts = {});

// cut_to_disk -> lscm -> isometric_refine for an arbitrary connected patch.
UVMap flatten_patch(const TriMesh& mesh, const Patch& patch, Patch& cut, int refine_iters = 100,
                    double refine_tol = 1e-8);

}  // namespace flatsel
