// Training losses on a soft segmentation and their gradients with respect
// to the per-face weights, differentiated through the weighted conformal
// solve by the adjoint method.
#pragma once

#include <string>
#include <vector>

#include "flatsel/mesh.hpp"
#include "flatsel/param.hpp"
#include "flatsel/patch.hpp"
#include "flatsel/weights.hpp"

namespace flatsel {

struct LossConfig {
    double gamma = 0.01;  // soft distortion threshold
    double alpha = 5.0;   // threshold sharpness
    double omega = 0.1;   // smoothness scale
    double floodfill_threshold = 0.5;

    void validate() const;  // throws std::invalid_argument
};

// sum_t (A_t / sum A) (1 - exp(-(D_t / gamma)^alpha)) over the active faces;
// per_face_D[i] belongs to active.faces[i].
double threshold_loss(const TriMesh& mesh, const std::vector<double>& per_face_D, const Patch& active,
                      const LossConfig& cfg);

// (1/|E|) sum over interior edges of -omega log(theta/pi) |w_t1 - w_t2|,
// |E| the number of interior edges.
double smooth_loss(const TriMesh& mesh, const WeightField& weights, const LossConfig& cfg);
std::vector<double> smooth_loss_grad(const TriMesh& mesh, const WeightField& weights, const LossConfig& cfg);

// Per-face distortion fed to the threshold loss: the ARAP energy density
// D_arap(t) / A_t = 2 |J_t - L_t|_F^2.
double arap_density(const Mat2& J);

struct LossEvaluation {
    double total = 0.0;
    double threshold = 0.0;
    double smooth = 0.0;
    Patch patch;                     // floodfilled region, cut to a disk
    UVMap uv;                        // rows = patch local vertices
    std::vector<double> per_face_D;  // per patch face
};

// Floodfill at cfg.floodfill_threshold from `seed`, cut the region to a
// disk, solve the conformal problem on it with the raw weights of its faces
// (pins on the longest edge of the seed face), then
// L = threshold(D of that map) + smooth(raw weights).
LossEvaluation total_loss(const TriMesh& mesh, const WeightField& weights, int seed, const LossConfig& cfg);

struct LossGradient {
    LossEvaluation loss;
    std::vector<double> grad;  // dL/dw per mesh face
};

// Adjoint gradient of total_loss. The floodfill mask, the seam and the best
// fit rotations are held fixed.
LossGradient grad_weights(const TriMesh& mesh, const WeightField& weights, int seed, const LossConfig& cfg);

struct OptimizeOptions {
    double init_radius = 0.1;   // geodesic ball radius as a fraction of the bbox diagonal
    double init_margin = 0.01;  // outside the ball weights start at 0.5 - margin
    int max_halvings = 8;
};

struct OptimizeResult {
    WeightField weights;
    std::vector<double> loss_trace;  // loss of the initial weights, then after each accepted step
    int steps_taken = 0;
    bool stalled = false;  // backtracking ran out of halvings
    std::string warning;
};

WeightField initial_weights(const TriMesh& mesh, int seed, const OptimizeOptions& opts = {});

// Projected gradient descent on total_loss. Each step moves by
// lr * g / max|g| (clamped to [0, 1]); a step that raises the loss is
// halved, at most opts.max_halvings times, after which the run stops.
OptimizeResult optimize_weights(const TriMesh& mesh, int seed, const LossConfig& cfg, int steps, double lr,
                                const OptimizeOptions& opts = {});

}  // namespace flatsel
