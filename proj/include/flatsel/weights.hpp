#pragma once

#include <span>
#include <vector>

#include "flatsel/mesh.hpp"

namespace flatsel {

// Soft per-face segmentation, one value in [0, 1] per mesh face.
struct WeightField {
    std::vector<double> values;

    WeightField() = default;
    explicit WeightField(std::vector<double> v) : values(std::move(v)) {}

    static WeightField constant(int num_faces, double value) {
        return WeightField(std::vector<double>(num_faces, value));
    }
    static WeightField indicator(int num_faces, std::span<const int> faces) {
        WeightField w = constant(num_faces, 0.0);
        for (int f : faces) w.values[f] = 1.0;
        return w;
    }

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int f) const { return values[f]; }
    double& operator[](int f) { return values[f]; }

    // Throws std::invalid_argument on a length mismatch or an entry outside [0, 1].
    void validate(const TriMesh& mesh) const;
};

}  // namespace flatsel
