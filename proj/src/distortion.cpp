#include "flatsel/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flatsel {

SingularValues singular_values(const Mat2& J) {
    // closed form: J = [[a, b], [c, d]] splits into a similarity part (E, H)
    // and an anti-similarity part (F, G)
    const double E = 0.5 * (J(0, 0) + J(1, 1));
    const double F = 0.5 * (J(0, 0) - J(1, 1));
    const double G = 0.5 * (J(1, 0) + J(0, 1));
    const double H = 0.5 * (J(1, 0) - J(0, 1));
    const double Q = std::hypot(E, H);
    const double R = std::hypot(F, G);
    return {Q + R, std::abs(Q - R)};
}

SingularDistortions singular_distortions(const std::vector<Mat2>& jacobians, DistortionVariant variant) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    SingularDistortions out;
    out.isometric.resize(jacobians.size());
    out.conformal.resize(jacobians.size());
    out.flagged.assign(jacobians.size(), 0);
    for (std::size_t i = 0; i < jacobians.size(); ++i) {
        const auto [s1, s2] = singular_values(jacobians[i]);
        if (s2 <= 1e-12) {
            out.isometric[i] = out.conformal[i] = inf;
            out.flagged[i] = 1;
            continue;
        }
        const double m = std::max(s1, 1.0 / s2);
        out.isometric[i] = variant == DistortionVariant::dataset ? m : (m - 1.0) * (m - 1.0);
        out.conformal[i] = (s1 - s2) * (s1 - s2);
    }
    return out;
}

std::vector<double> arap_energy(const TriMesh& mesh, const Patch& patch, const Eigen::MatrixX2d& uv) {
    if (uv.rows() != patch.num_vertices()) throw std::invalid_argument("arap_energy: UV map does not cover the patch");
    const auto J = face_jacobians(mesh, patch, uv);
    std::vector<double> out(patch.faces.size());
    for (int i = 0; i < patch.num_faces(); ++i) {
        const auto& P = mesh.face_local(patch.faces[i]);
        const auto& c = patch.corners[i];
        const Mat2 L = closest_rotation(J[i]);
        double e = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int l = (k + 1) % 3, o = (k + 2) % 3;
            const Vec2 a = P.col(k) - P.col(o), b = P.col(l) - P.col(o);
            const double cot = a.dot(b) / std::abs(a.x() * b.y() - a.y() * b.x());
            const Vec2 du = (uv.row(c[k]) - uv.row(c[l])).transpose();
            e += cot * (du - L * (P.col(k) - P.col(l))).squaredNorm();
        }
        // an obtuse corner can push the sum a hair below zero
        out[i] = std::max(e, 0.0);
    }
    return out;
}

double percent_below(const TriMesh& mesh, const Patch& patch, const std::vector<double>& per_face_DI,
                     double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("percent_below: lambda must be positive");
    if (mesh.num_faces() == 0) return 0.0;
    int count = 0;
    for (std::size_t i = 0; i < patch.faces.size() && i < per_face_DI.size(); ++i)
        if (per_face_DI[i] < lambda) ++count;
    return 100.0 * count / mesh.num_faces();
}

double DistortionReport::max_DI() const {
    double m = 0.0;
    for (double d : per_face_DI) m = std::max(m, d);
    return m;
}

DistortionReport make_report(const TriMesh& mesh, const Patch& patch, const UVMap& uv, double lambda) {
    DistortionReport r;
    r.faces = patch.faces;
    r.lambda = lambda;
    r.per_face_arap = arap_energy(mesh, patch, uv.uv);
    const auto sd = singular_distortions(face_jacobians(mesh, patch, uv.uv), DistortionVariant::eval);
    r.per_face_DI = sd.isometric;
    r.per_face_DC = sd.conformal;
    r.flagged = sd.flagged;
    r.percent_DI = percent_below(mesh, patch, r.per_face_DI, lambda);
    r.n_faces = patch.num_faces();
    r.flips_corrected = uv.flips_corrected;
    return r;
}

std::string report_csv(const DistortionReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "face,arap,DI,DC,flagged\n";
    for (std::size_t i = 0; i < report.faces.size(); ++i)
        os << report.faces[i] << ',' << report.per_face_arap[i] << ',' << report.per_face_DI[i] << ','
           << report.per_face_DC[i] << ',' << int(report.flagged[i]) << '\n';
    return os.str();
}

}  // namespace flatsel
