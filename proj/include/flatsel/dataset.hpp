// Synthetic near-developable shapes with ground-truth segment labels:
// deformed primitives placed apart from each other, jittered and smoothed,
// then filtered by how well each segment flattens.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flatsel/mesh.hpp"

namespace flatsel {

enum class PrimitiveKind { cube, cone, cylinder, sphere, tetrahedron };

std::string primitive_name(PrimitiveKind kind);
std::optional<PrimitiveKind> parse_primitive(const std::string& name);

struct Segment {
    int primitive = -1;       // index into LabeledShape::primitives
    int piece = -1;           // developable piece of that primitive (cube side, cylinder cap, ...)
    bool sphere = false;      // pieces of a sphere are never seeded
    std::vector<int> faces;   // ascending mesh face ids, one edge-connected component
    bool filtered = false;    // filter_and_sample has scored it
    bool valid = false;
    double mean_DI = 0.0;     // mean (max(s1, 1/s2) - 1)^2
    double mean_DC = 0.0;     // mean (s1 - s2)^2
};

struct SeedFace {
    int face = -1;
    int segment = -1;
    bool operator==(const SeedFace&) const = default;
};

struct LabeledShape {
    TriMesh mesh;
    std::vector<int> labels;  // per face: segment id
    std::vector<Segment> segments;
    std::vector<PrimitiveKind> primitives;
    std::vector<int> valid_segments;
    std::vector<SeedFace> seeds;
    std::uint64_t rng_seed = 0;
};

struct GenerateOptions {
    bool deform = true;   // false: no simple deforms (test mode)
    bool augment = true;  // jitter one third of the vertices, then smooth
    int resolution = 8;   // subdivision level of each primitive
    // Fixed primitive kinds instead of random ones; the count then comes from here.
    std::vector<PrimitiveKind> kinds;
};

// Deterministic in rng_seed. n_primitives in [1, 5].
LabeledShape generate_shape(std::uint64_t rng_seed, int n_primitives, const GenerateOptions& opts = {});

struct SegmentDistortion {
    double mean_DI = 0.0;
    double mean_DC = 0.0;
};

// cut_to_disk -> lscm -> isometric_refine on the faces, then the per-face
// means of (max(s1, 1/s2) - 1)^2 and (s1 - s2)^2.
SegmentDistortion segment_distortion(const TriMesh& mesh, const std::vector<int>& faces, int refine_iters = 100);

// Scores every segment, marks it valid when both means are <= threshold and
// samples max(1, round(frac * |segment|)) seeds (at most max_seeds) from
// each valid non-sphere segment.
LabeledShape filter_and_sample(LabeledShape shape, double threshold = 0.05, double frac = 0.05, int max_seeds = 20);

// <dir>/mesh.obj, labels.json, seeds.json
void save_shape(const std::filesystem::path& dir, const LabeledShape& shape);
LabeledShape load_shape(const std::filesystem::path& dir);

struct DatasetManifest {
    std::uint64_t rng_seed = 0;
    int count = 0;
    int max_primitives = 3;
    GenerateOptions options;
    double threshold = 0.05;
    double frac = 0.05;
    int max_seeds = 20;
    std::vector<std::string> shapes;     // sub-directory names
    std::vector<std::uint64_t> seeds;    // per-shape rng seed
};

// Generates `count` shapes (seeds derived from rng_seed) into out_dir with a
// manifest.json that is enough to regenerate them exactly.
DatasetManifest generate_dataset(const std::filesystem::path& out_dir, std::uint64_t rng_seed, int count,
                                 int max_primitives = 3, const GenerateOptions& opts = {}, double threshold = 0.05,
                                 double frac = 0.05, int max_seeds = 20);
DatasetManifest load_manifest(const std::filesystem::path& dir);

}  // namespace flatsel
