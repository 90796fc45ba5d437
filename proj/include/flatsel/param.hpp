// Planar parameterizations: least-squares conformal maps, the weighted
// variant that consumes a soft segmentation, and a local/global isometric
// refiner.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "flatsel/mesh.hpp"
#include "flatsel/patch.hpp"
#include "flatsel/weights.hpp"

namespace flatsel {

// Linear solve failed (singular or indefinite system).
struct SolveError : Error {
    using Error::Error;
};

using Pins = std::array<int, 2>;

// UV coordinates over a domain. For lscm / isometric_refine the domain is a
// Patch and rows are its local vertices; for wlscm the domain is the whole
// mesh and rows are mesh vertices.
struct UVMap {
    Eigen::MatrixX2d uv;
    std::vector<Mat2> jacobians;  // per domain face, face frame -> UV
    Pins pins{-1, -1};
    std::array<Vec2, 2> pin_uv{Vec2::Zero(), Vec2::Zero()};

    // isometric_refine bookkeeping
    int iterations = 0;
    int flips_corrected = 0;
    std::vector<double> energy_trace;  // ARAP energy of init, then after each iteration
};

struct WlscmOptions {
    double weight_floor = 1e-7;  // positive weights below this are raised to it
};

// Conformal map of a disk-topology patch with two pinned vertices. Default
// pins: the two patch vertices farthest apart, placed at (0,0) and (d,0)
// where d is their 3D distance. Throws std::invalid_argument for a non-disk
// patch and SolveError when the system is singular.
UVMap lscm(const TriMesh& mesh, const Patch& patch, std::optional<Pins> pins = std::nullopt);

// Weighted conformal map over the whole mesh; face t's conformal error is
// scaled by its weight. Faces of weight exactly zero carry no energy: the
// solve runs on the edge-connected positive-weight component holding the
// pins, and every other vertex receives a harmonic extension of that
// solution. Default pins: the longest edge of the highest-weight face.
UVMap wlscm(const TriMesh& mesh, const WeightField& weights, std::optional<Pins> pins = std::nullopt,
            const WlscmOptions& opts = {});

// Local/global as-rigid-as-possible iterations starting from `init`. Stops
// after `max_iters` iterations or when the relative energy decrease drops
// below `tol`. Reflected input Jacobians get a proper rotation as their
// local target and are counted in `flips_corrected`.
UVMap isometric_refine(const TriMesh& mesh, const Patch& patch, const UVMap& init, int max_iters = 50,
                       double tol = 1e-6);

// Per-face Jacobians of `uv` over the patch faces.
std::vector<Mat2> face_jacobians(const TriMesh& mesh, const Patch& patch, const Eigen::MatrixX2d& uv);

// Area-weighted conformal energy sum_t w_t A_t |J_t - S(J_t)|^2 over the
// patch faces; weights default to 1.
double conformal_energy(const TriMesh& mesh, const Patch& patch, const Eigen::MatrixX2d& uv,
                        const WeightField* weights = nullptr);

// The two patch vertices at maximal 3D distance (lowest ids on ties).
Pins farthest_vertex_pair(const TriMesh& mesh, const Patch& patch);

}  // namespace flatsel
