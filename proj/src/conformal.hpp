// Internal: the weighted conformal least-squares system shared by the
// forward solves (lscm / wlscm) and the adjoint gradient.
#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "flatsel/mesh.hpp"
#include "flatsel/param.hpp"
#include "flatsel/patch.hpp"

namespace flatsel::detail {

using Residual = Eigen::Matrix<double, 2, 6>;
using Coords = Eigen::Matrix<double, 6, 1>;
using JacobianOp = Eigen::Matrix<double, 4, 6>;

// vec(J) = G x with vec(J) = (J00, J01, J10, J11), x = (u0, v0, u1, v1, u2, v2).
JacobianOp jacobian_operator(const Eigen::Matrix<double, 2, 3>& local);

// r = M x with x = (u0, v0, u1, v1, u2, v2) and |r|^2 = |J - S(J)|^2, where
// J is the face Jacobian and S(J) its nearest similarity.
Residual conformal_residual(const Eigen::Matrix<double, 2, 3>& local);

// Face Jacobian of corner UVs given the face-frame corner positions.
Mat2 jacobian(const Eigen::Matrix<double, 2, 3>& local, const Vec2& u0, const Vec2& u1, const Vec2& u2);

// sum_t coeff_t |M_t x_t|^2 over the domain faces, minimized with two
// vertices pinned. Unknowns are the UVs of every other vertex that some
// domain face uses.
struct ConformalSystem {
    int num_vertices = 0;
    std::vector<std::array<int, 3>> tris;
    std::vector<Residual> residuals;
    std::vector<double> coeff;
    Pins pins{-1, -1};
    std::array<Vec2, 2> pin_uv{Vec2::Zero(), Vec2::Zero()};

    std::vector<int> dof;  // 2 * vertex + axis -> unknown index, or -1
    int num_free = 0;
    Eigen::VectorXd x;     // 2 * num_vertices coordinates
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor;  // reduced K, kept for adjoint solves

    // Throws SolveError when the reduced system is not positive definite.
    void solve();

    Coords face_coords(int i) const;
    double energy() const;
};

// System over the faces of `domain` (rows = its local vertices) with
// coefficient weight[i] * area for patch face i.
ConformalSystem build_system(const TriMesh& mesh, const Patch& domain, const std::vector<double>& weight,
                             Pins pins);

// Pins on the longest edge of the highest-weight domain face.
Pins heaviest_face_pins(const TriMesh& mesh, const Patch& domain, const std::vector<double>& weight);

Eigen::MatrixX2d uv_matrix(const ConformalSystem& sys);

}  // namespace flatsel::detail
