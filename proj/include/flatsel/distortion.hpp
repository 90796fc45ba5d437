// Per-face distortion of a UV map and the aggregate selection metrics.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flatsel/mesh.hpp"
#include "flatsel/param.hpp"
#include "flatsel/patch.hpp"

namespace flatsel {

// Proper rotation nearest to J in the Frobenius norm (the rotation factor
// of its polar decomposition; for det J < 0 the reflection is dropped).
Mat2 closest_rotation(const Mat2& J);

struct SingularValues {
    double s1 = 0.0, s2 = 0.0;  // s1 >= s2 >= 0
};
SingularValues singular_values(const Mat2& J);

enum class DistortionVariant {
    dataset,  // D_I = max(s1, 1/s2),      D_C = (s1 - s2)^2
    eval,     // D_I = (max(s1, 1/s2) - 1)^2, D_C = (s1 - s2)^2
};

struct SingularDistortions {
    std::vector<double> isometric;
    std::vector<double> conformal;
    std::vector<char> flagged;  // s2 <= 1e-12: both values are +inf
};

SingularDistortions singular_distortions(const std::vector<Mat2>& jacobians, DistortionVariant variant);

// sum_k cot(theta_k) |(u_k - u_{k+1}) - L (v_k - v_{k+1})|^2 per patch face,
// theta_k the angle opposite edge (k, k+1) and L the closest rotation.
std::vector<double> arap_energy(const TriMesh& mesh, const Patch& patch, const Eigen::MatrixX2d& uv);

// 100 * |{patch faces with D_I < lambda}| / |F| over the whole mesh.
double percent_below(const TriMesh& mesh, const Patch& patch, const std::vector<double>& per_face_DI,
                     double lambda);

struct DistortionReport {
    std::vector<int> faces;  // mesh face ids the per-face vectors refer to
    std::vector<double> per_face_arap;
    std::vector<double> per_face_DI;  // eval variant
    std::vector<double> per_face_DC;
    std::vector<char> flagged;
    double lambda = 0.05;
    double percent_DI = 0.0;
    int n_faces = 0;
    int flips_corrected = 0;
    double seg_time = 0.0;  // seconds spent selecting
    double uv_time = 0.0;   // seconds spent cutting and parameterizing

    double max_DI() const;
};

DistortionReport make_report(const TriMesh& mesh, const Patch& patch, const UVMap& uv, double lambda = 0.05);

// Per-face table: face,arap,DI,DC,flagged
std::string report_csv(const DistortionReport& report);

}  // namespace flatsel
