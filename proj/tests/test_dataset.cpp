#include <filesystem>
#include <set>

#include "doctest.h"
#include "flatsel/dataset.hpp"
#include "flatsel/shapes.hpp"

using namespace flatsel;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("flatsel_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

void check_partition(const LabeledShape& s) {
    REQUIRE(static_cast<int>(s.labels.size()) == s.mesh.num_faces());
    std::vector<int> seen(s.mesh.num_faces(), 0);
    for (int id = 0; id < static_cast<int>(s.segments.size()); ++id)
        for (int f : s.segments[id].faces) {
            ++seen[f];
            CHECK(s.labels[f] == id);
        }
    for (int c : seen) CHECK(c == 1);
}

}  // namespace

TEST_CASE("undeformed single cube: six valid segments") {
    GenerateOptions opts;
    opts.deform = false;
    opts.kinds = {PrimitiveKind::cube};
    const LabeledShape s = filter_and_sample(generate_shape(3, 1, opts));
    CHECK(s.segments.size() == 6);
    CHECK(s.valid_segments.size() == 6);
    check_partition(s);
    for (const Segment& g : s.segments) {
        CHECK(g.mean_DI <= 0.05);
        CHECK(g.mean_DC <= 0.05);
    }
}

TEST_CASE("sphere segments are never valid") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        GenerateOptions opts;
        opts.kinds = {PrimitiveKind::sphere};
        const LabeledShape s = filter_and_sample(generate_shape(seed, 1, opts));
        REQUIRE(s.segments.size() == 1);
        CHECK(s.segments[0].sphere);
        CHECK_FALSE(s.segments[0].valid);
        CHECK(s.seeds.empty());
    }
}

TEST_CASE("generation is deterministic in the rng seed") {
    const LabeledShape a = filter_and_sample(generate_shape(42, 3));
    const LabeledShape b = filter_and_sample(generate_shape(42, 3));
    CHECK(a.mesh.content_hash() == b.mesh.content_hash());
    CHECK(a.mesh.vertices() == b.mesh.vertices());
    CHECK(a.labels == b.labels);
    CHECK(a.seeds == b.seeds);
    CHECK(a.valid_segments == b.valid_segments);
    const LabeledShape c = generate_shape(43, 3);
    CHECK(c.mesh.content_hash() != a.mesh.content_hash());
}

TEST_CASE("labels partition the faces and seeds sit in valid non-sphere segments") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const LabeledShape s = filter_and_sample(generate_shape(seed, 1 + seed % 5));
        check_partition(s);
        for (const SeedFace& sf : s.seeds) {
            REQUIRE(sf.segment >= 0);
            CHECK(s.labels[sf.face] == sf.segment);
            CHECK(s.segments[sf.segment].valid);
            CHECK_FALSE(s.segments[sf.segment].sphere);
        }
        for (int id : s.valid_segments) CHECK(s.segments[id].valid);
    }
}

TEST_CASE("seed count: five percent capped at twenty") {
    LabeledShape s;
    const Primitive grid = plane_grid(20, 10, 2.0, 1.0);
    s.mesh = grid.mesh();
    REQUIRE(s.mesh.num_faces() == 400);
    s.labels.assign(400, 0);
    Segment g;
    for (int f = 0; f < 400; ++f) g.faces.push_back(f);
    s.segments = {g};
    s.primitives = {PrimitiveKind::cube};

    const LabeledShape a = filter_and_sample(s, 0.05, 0.05, 20);
    CHECK(a.seeds.size() == 20);
    std::set<int> distinct;
    for (const auto& sf : a.seeds) distinct.insert(sf.face);
    CHECK(distinct.size() == 20);
    CHECK(filter_and_sample(s, 0.05, 0.05, 7).seeds.size() == 7);
    CHECK(filter_and_sample(s, 0.05, 0.01, 20).seeds.size() == 4);
    CHECK(filter_and_sample(s, 0.05, 0.001, 20).seeds.size() == 1);
}

TEST_CASE("filter marks the undeformed cylinder side valid") {
    LabeledShape s;
    const Primitive c = cylinder(32, 8);
    s.mesh = c.mesh();
    s.labels = c.labels;
    s.primitives = {PrimitiveKind::cylinder};
    for (int l = 0; l < c.num_segments(); ++l) {
        Segment g;
        g.piece = l;
        g.primitive = 0;
        for (int f = 0; f < s.mesh.num_faces(); ++f)
            if (c.labels[f] == l) g.faces.push_back(f);
        s.segments.push_back(g);
    }
    const LabeledShape out = filter_and_sample(s);
    CHECK(out.segments[0].valid);
    CHECK(out.segments[0].mean_DI < 1e-12);
    CHECK(out.segments[0].mean_DC < 1e-12);
}

TEST_CASE("bad arguments are rejected") {
    CHECK_THROWS_AS(generate_shape(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_shape(1, 6), std::invalid_argument);
    const LabeledShape s = generate_shape(1, 1);
    CHECK_THROWS_AS(filter_and_sample(s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(filter_and_sample(s, 0.05, 0.0), std::invalid_argument);
}

TEST_CASE("shape files round trip") {
    const auto dir = scratch("shape");
    const LabeledShape a = filter_and_sample(generate_shape(7, 2));
    save_shape(dir, a);
    CHECK(std::filesystem::exists(dir / "mesh.obj"));
    const LabeledShape b = load_shape(dir);
    CHECK(b.mesh.num_faces() == a.mesh.num_faces());
    CHECK(b.labels == a.labels);
    CHECK(b.seeds == a.seeds);
    CHECK(b.valid_segments == a.valid_segments);
    REQUIRE(b.segments.size() == a.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(b.segments[i].faces == a.segments[i].faces);
        CHECK(b.segments[i].mean_DI == doctest::Approx(a.segments[i].mean_DI));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("manifest regenerates the dataset exactly") {
    const auto dir = scratch("dataset");
    const DatasetManifest man = generate_dataset(dir, 99, 3, 2);
    const DatasetManifest back = load_manifest(dir);
    CHECK(back.seeds == man.seeds);
    CHECK(back.shapes == man.shapes);
    for (int i = 0; i < man.count; ++i) {
        const LabeledShape disk = load_shape(dir / man.shapes[i]);
        const int n = 1 + static_cast<int>(back.seeds[i] % static_cast<std::uint64_t>(back.max_primitives));
        const LabeledShape again = filter_and_sample(generate_shape(back.seeds[i], n, back.options), back.threshold,
                                                     back.frac, back.max_seeds);
        CHECK(disk.labels == again.labels);
        CHECK(disk.seeds == again.seeds);
        CHECK(disk.mesh.num_vertices() == again.mesh.num_vertices());
    }
    std::filesystem::remove_all(dir);
}
