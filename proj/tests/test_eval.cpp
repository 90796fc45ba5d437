#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "flatsel/config.hpp"
#include "flatsel/dataset.hpp"
#include "flatsel/eval.hpp"
#include "flatsel/shapes.hpp"

using namespace flatsel;
namespace fs = std::filesystem;

namespace {

// Precision and recall recomputed from scratch for every threshold.
double brute_ap(const std::vector<double>& s, const std::vector<int>& truth) {
    std::vector<double> t = s;
    std::sort(t.begin(), t.end(), std::greater<>());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<std::pair<double, double>> pr;  // recall, precision
    int pos = 0;
    for (int y : truth) pos += y;
    for (double th : t) {
        int tp = 0, sel = 0;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i] >= th) {
                ++sel;
                tp += truth[i];
            }
        pr.push_back({double(tp) / pos, double(tp) / sel});
    }
    double ap = 0, prev = 0;
    for (auto [r, p] : pr) {
        ap += (r - prev) * p;
        prev = r;
    }
    return ap;
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("flatsel_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("perfect prediction scores one") {
    WeightField w = WeightField::indicator(10, std::vector<int>{1, 2, 3});
    auto m = segmentation_metrics(w, std::vector<int>{1, 2, 3});
    CHECK(m.accuracy == 1.0);
    CHECK(*m.mAP == 1.0);
    CHECK(*m.F1 == 1.0);
}

TEST_CASE("complement prediction") {
    std::vector<int> truth{0, 4, 7};
    WeightField w = WeightField::constant(10, 1.0);
    for (int f : truth) w[f] = 0.0;
    auto m = segmentation_metrics(w, truth);
    CHECK(m.accuracy == 0.0);
    CHECK(*m.F1 == 0.0);
}

TEST_CASE("empty prediction") {
    std::vector<int> truth{0, 4, 7};
    auto m = segmentation_metrics(WeightField::constant(10, 0.0), truth);
    CHECK(m.accuracy == doctest::Approx(1.0 - 3.0 / 10.0).epsilon(1e-15));
    CHECK(*m.F1 == 0.0);
}

TEST_CASE("uniform half prediction on ten faces") {
    WeightField w = WeightField::constant(10, 0.5);
    auto m = segmentation_metrics(w, std::vector<int>{0, 1, 2, 3, 4});
    // one threshold: everything selected, precision 1/2 at recall 1
    CHECK(*m.mAP == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(*m.F1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("binary prediction gives a two point curve") {
    // 4 selected, 3 of them right, 5 true faces in 12
    std::vector<int> truth{0, 1, 2, 9, 10};
    WeightField w = WeightField::indicator(12, std::vector<int>{0, 1, 2, 5});
    auto m = segmentation_metrics(w, truth);
    CHECK(*m.mAP == doctest::Approx(0.6 * 0.75 + 0.4 * 5.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("mAP matches brute force on random scores") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + trial % 20;
        std::vector<double> s(n);
        std::vector<int> y(n), truth;
        for (int i = 0; i < n; ++i) {
            s[i] = std::round(std::uniform_real_distribution<double>(0, 1)(rng) * 8) / 8;  // ties on purpose
            y[i] = rng() % 3 == 0;
            if (y[i]) truth.push_back(i);
        }
        if (truth.empty()) {
            y[0] = 1;
            truth.push_back(0);
        }
        auto m = segmentation_metrics(WeightField(s), truth);
        CHECK(*m.mAP == doctest::Approx(brute_ap(s, y)).epsilon(1e-12));
        CHECK(m.accuracy >= 0.0);
        CHECK(m.accuracy <= 1.0);
        CHECK(*m.mAP <= 1.0 + 1e-12);
    }
}

TEST_CASE("empty truth leaves F1 and mAP null") {
    auto m = segmentation_metrics(WeightField::constant(4, 0.2), std::vector<int>{});
    CHECK(m.accuracy == 1.0);
    CHECK_FALSE(m.F1.has_value());
    CHECK_FALSE(m.mAP.has_value());
}

TEST_CASE("median") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    CHECK_THROWS(median({}));
}

TEST_CASE("medians skip null metrics") {
    BenchRecord a, b, c;
    for (auto* r : {&a, &b, &c}) {
        r->dataset = "d";
        r->selector = "greedy";
        r->percent_DI = {10};
    }
    a.F1 = 0.2;
    b.F1 = 0.6;
    a.seg_time = 1;
    b.seg_time = 2;
    c.seg_time = 9;
    auto m = aggregate_medians({a, b, c});
    REQUIRE(m.size() == 1);
    CHECK(m[0].samples == 3);
    CHECK(*m[0].F1 == doctest::Approx(0.4));
    CHECK(m[0].seg_time == 2);
}

TEST_CASE("config overrides") {
    SelectorConfig cfg;
    apply_overrides(cfg, SelectorKind::greedy, {{"lambda", 0.02}, {"max_checkpoints", 3}});
    CHECK(cfg.greedy.lambda == 0.02);
    CHECK(cfg.greedy.max_checkpoints == 3);
    auto j = selector_config_json(SelectorKind::greedy, cfg);
    CHECK(j["lambda"] == 0.02);
    CHECK_THROWS_AS(apply_overrides(cfg, SelectorKind::greedy, {{"nope", 1}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_overrides(cfg, SelectorKind::greedy, {{"lambda", "x"}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_overrides(cfg, SelectorKind::logmap, {{"lambda", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_overrides(cfg, SelectorKind::logmap, {{"selector", "greedy"}}), std::invalid_argument);
    SelectorConfig other;
    CHECK(config_hash(selector_config_json(SelectorKind::greedy, cfg)) !=
          config_hash(selector_config_json(SelectorKind::greedy, other)));
    CHECK(config_hash(selector_config_json(SelectorKind::greedy, other)).size() == 16);
}

TEST_CASE("benchmark on undeformed cubes") {
    const fs::path ds = fresh_dir("bench_cubes");
    GenerateOptions o;
    o.deform = false;
    o.augment = false;
    o.resolution = 4;
    o.kinds = {PrimitiveKind::cube};
    const DatasetManifest man = generate_dataset(ds, 7, 2, 1, o, 0.05, 0.02, 2);
    int seeds = 0;
    for (const auto& s : man.shapes) seeds += static_cast<int>(load_shape(ds / s).seeds.size());
    REQUIRE(seeds > 0);

    BenchOptions bo;
    bo.lambdas = {0.05};
    bo.threads = 2;
    const std::vector<SelectorKind> sel{SelectorKind::dcharts, SelectorKind::greedy};
    BenchResult r = run_benchmark(ds, sel, bo);
    CHECK(r.failures.empty());
    CHECK(static_cast<int>(r.records.size()) == seeds * 2);
    CHECK(std::is_sorted(r.records.begin(), r.records.end(), [](const BenchRecord& a, const BenchRecord& b) {
        return std::tie(a.mesh, a.seed_face, a.selector) < std::tie(b.mesh, b.seed_face, b.selector);
    }));
    for (const auto& rec : r.records) {
        CHECK(rec.percent_DI[0] >= 0.0);
        CHECK(rec.percent_DI[0] <= 100.0);
        CHECK(rec.accuracy.has_value());
    }
    REQUIRE(r.medians.size() == 2);
    const double side = 100.0 / 6.0;
    for (const auto& m : r.medians) {
        if (m.selector == "dcharts") {
            CHECK(m.percent_DI[0] == doctest::Approx(side).epsilon(1e-12));
            CHECK(*m.F1 == 1.0);
        } else {
            // greedy unfolds across creases, so it keeps at least the side
            CHECK(m.percent_DI[0] >= side - 1e-9);
        }
    }

    const fs::path out1 = fresh_dir("bench_out1"), out2 = fresh_dir("bench_out2");
    write_benchmark(out1, ds, sel, bo, r);
    write_benchmark(out2, ds, sel, bo, run_benchmark(ds, sel, bo));
    CHECK(slurp(out1 / "bench.csv") == slurp(out2 / "bench.csv"));
    CHECK(fs::exists(out1 / "timings.csv"));
    CHECK(fs::exists(out1 / "bench.json"));
    fs::remove_all(ds);
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("empty selector list gives an empty table") {
    BenchResult r = run_benchmark("/nonexistent", {});
    CHECK(r.records.empty());
    CHECK(r.medians.empty());
}

TEST_CASE("unlabelled datasets and bad samples") {
    const fs::path ds = fresh_dir("bench_raw");
    fs::create_directories(ds / "a");
    fs::create_directories(ds / "b");
    save_obj((ds / "a" / "mesh.obj").string(), plane_grid(4, 4).mesh());
    std::ofstream(ds / "a" / "seeds.json") << R"({"seeds":[{"face":3,"segment":-1},{"face":999,"segment":-1}]})";
    save_obj((ds / "b" / "mesh.obj").string(), plane_grid(2, 2).mesh());  // no seeds file
    BenchResult r = run_benchmark(ds, {SelectorKind::logmap});
    REQUIRE(r.records.size() == 1);
    CHECK_FALSE(r.records[0].accuracy.has_value());
    CHECK(r.records[0].percent_DI[2] == doctest::Approx(100.0));
    CHECK(r.failures.size() == 2);
    fs::remove_all(ds);
}
