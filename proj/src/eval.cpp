#include "flatsel/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "flatsel/config.hpp"
#include "flatsel/dataset.hpp"

namespace flatsel {

using nlohmann::json;
namespace fs = std::filesystem;

SegmentationMetrics segmentation_metrics(const WeightField& pred, std::span<const int> truth_faces) {
    const int n = pred.size();
    if (n == 0) throw std::invalid_argument("empty prediction");
    std::vector<char> truth(n, 0);
    for (int f : truth_faces) {
        if (f < 0 || f >= n) throw std::invalid_argument("truth face out of range");
        truth[f] = 1;
    }
    int positives = 0, tp = 0, fp = 0, correct = 0;
    for (int f = 0; f < n; ++f) {
        const bool p = pred[f] >= 0.5;
        positives += truth[f];
        tp += p && truth[f];
        fp += p && !truth[f];
        correct += p == static_cast<bool>(truth[f]);
    }
    SegmentationMetrics m;
    m.accuracy = static_cast<double>(correct) / n;
    if (positives == 0) return m;
    const int fn = positives - tp;
    m.F1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);

    std::vector<int> order(n);
    for (int f = 0; f < n; ++f) order[f] = f;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pred[a] > pred[b]; });
    double ap = 0.0, prev_recall = 0.0;
    int tps = 0, taken = 0;
    for (int i = 0; i < n;) {
        const double t = pred[order[i]];
        for (; i < n && pred[order[i]] == t; ++i, ++taken) tps += truth[order[i]];
        const double recall = static_cast<double>(tps) / positives;
        ap += (recall - prev_recall) * static_cast<double>(tps) / taken;
        prev_recall = recall;
    }
    m.mAP = ap;
    return m;
}

SegmentationMetrics segmentation_metrics(const WeightField& pred, const Patch& truth) {
    return segmentation_metrics(pred, std::span<const int>(truth.faces));
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of nothing");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

struct Sample {
    std::size_t shape;
    int seed_face;
    int segment;
    SelectorKind selector;
};

struct LoadedShape {
    std::string name;
    TriMesh mesh;
    bool labelled = false;
    std::vector<std::vector<int>> segments;
    std::vector<SeedFace> seeds;
};

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return json::parse(in);
}

LoadedShape load_any(const fs::path& dir) {
    LoadedShape s;
    s.name = dir.filename().string();
    if (fs::exists(dir / "labels.json")) {
        LabeledShape ls = load_shape(dir);
        s.mesh = std::move(ls.mesh);
        s.labelled = true;
        for (auto& seg : ls.segments) s.segments.push_back(std::move(seg.faces));
        s.seeds = std::move(ls.seeds);
    } else {
        s.mesh = load_mesh((dir / "mesh.obj").string());
        const json seeds = read_json(dir / "seeds.json");
        for (const auto& e : seeds.at("seeds")) s.seeds.push_back({e.at("face").get<int>(), -1});
    }
    return s;
}

std::vector<fs::path> shape_dirs(const fs::path& root) {
    std::vector<fs::path> dirs;
    if (fs::exists(root / "manifest.json")) {
        for (const auto& name : load_manifest(root).shapes) dirs.push_back(root / name);
        return dirs;
    }
    if (!fs::is_directory(root)) throw std::runtime_error("not a dataset directory: " + root.string());
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "mesh.obj")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::string dataset_id(const fs::path& dir) {
    fs::path p = fs::weakly_canonical(dir);
    if (p.filename().empty()) p = p.parent_path();
    return p.filename().string();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

std::vector<BenchMedians> aggregate_medians(const std::vector<BenchRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<const BenchRecord*>> groups;
    for (const auto& r : records) groups[{r.dataset, r.selector}].push_back(&r);
    std::vector<BenchMedians> out;
    for (const auto& [key, rs] : groups) {
        BenchMedians m;
        m.dataset = key.first;
        m.selector = key.second;
        m.samples = static_cast<int>(rs.size());
        auto med = [&](auto get) -> std::optional<double> {
            std::vector<double> v;
            for (const BenchRecord* r : rs)
                if (auto x = get(*r)) v.push_back(*x);
            return v.empty() ? std::nullopt : std::optional<double>(median(v));
        };
        m.accuracy = med([](const BenchRecord& r) { return r.accuracy; });
        m.mAP = med([](const BenchRecord& r) { return r.mAP; });
        m.F1 = med([](const BenchRecord& r) { return r.F1; });
        for (std::size_t k = 0; k < rs.front()->percent_DI.size(); ++k)
            m.percent_DI.push_back(*med([&](const BenchRecord& r) { return std::optional<double>(r.percent_DI[k]); }));
        m.n_faces = *med([](const BenchRecord& r) { return std::optional<double>(r.n_faces); });
        m.seg_time = *med([](const BenchRecord& r) { return std::optional<double>(r.seg_time); });
        m.uv_time = *med([](const BenchRecord& r) { return std::optional<double>(r.uv_time); });
        out.push_back(std::move(m));
    }
    return out;
}

BenchResult run_benchmark(const fs::path& dataset_dir, const std::vector<SelectorKind>& selectors,
                          const BenchOptions& opts) {
    for (double l : opts.lambdas)
        if (!(l > 0)) throw std::invalid_argument("lambda grid must be positive");
    BenchResult result;
    if (selectors.empty()) return result;

    const std::string dataset = dataset_id(dataset_dir);
    std::vector<LoadedShape> shapes;
    for (const auto& dir : shape_dirs(dataset_dir)) {
        try {
            shapes.push_back(load_any(dir));
        } catch (const std::exception& e) {
            result.failures.push_back({dir.filename().string(), -1, "", e.what()});
        }
    }

    std::vector<Sample> samples;
    for (std::size_t s = 0; s < shapes.size(); ++s)
        for (const SeedFace& seed : shapes[s].seeds)
            for (SelectorKind k : selectors) samples.push_back({s, seed.face, seed.segment, k});

    std::vector<std::optional<BenchRecord>> records(samples.size());
    std::vector<std::optional<BenchFailure>> failures(samples.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < samples.size();) {
            const Sample& smp = samples[i];
            const LoadedShape& shape = shapes[smp.shape];
            const std::string name = selector_name(smp.selector);
            try {
                Selection sel = run_selector(shape.mesh, smp.seed_face, smp.selector, opts.selector);
                FinalizeResult fin = finalize_patch(shape.mesh, sel.weights, smp.seed_face, opts.finalize);
                BenchRecord r;
                r.dataset = dataset;
                r.mesh = shape.name;
                r.seed_face = smp.seed_face;
                r.selector = name;
                r.config_hash = config_hash(selector_config_json(smp.selector, opts.selector));
                r.mesh_faces = shape.mesh.num_faces();
                int segment = smp.segment;
                if (shape.labelled && segment < 0) {
                    for (std::size_t g = 0; g < shape.segments.size() && segment < 0; ++g)
                        if (std::binary_search(shape.segments[g].begin(), shape.segments[g].end(), smp.seed_face))
                            segment = static_cast<int>(g);
                }
                if (shape.labelled && segment >= 0) {
                    const SegmentationMetrics m = segmentation_metrics(sel.weights, shape.segments.at(segment));
                    r.accuracy = m.accuracy;
                    r.mAP = m.mAP;
                    r.F1 = m.F1;
                }
                for (double l : opts.lambdas)
                    r.percent_DI.push_back(percent_below(shape.mesh, fin.patch, fin.report.per_face_DI, l));
                r.n_faces = fin.patch.num_faces();
                r.max_DI = fin.report.max_DI();
                r.seg_time = sel.seg_time;
                r.uv_time = fin.report.uv_time;
                records[i] = std::move(r);
            } catch (const std::exception& e) {
                failures[i] = BenchFailure{shape.name, smp.seed_face, name, e.what()};
            }
        }
    };
    int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, std::max(1, static_cast<int>(samples.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (auto& r : records)
        if (r) result.records.push_back(std::move(*r));
    for (auto& f : failures)
        if (f) result.failures.push_back(std::move(*f));
    auto key = [](const auto& r) { return std::tie(r.mesh, r.seed_face, r.selector); };
    std::sort(result.records.begin(), result.records.end(),
              [&](const BenchRecord& a, const BenchRecord& b) { return key(a) < key(b); });
    std::stable_sort(result.failures.begin(), result.failures.end(),
                     [&](const BenchFailure& a, const BenchFailure& b) { return key(a) < key(b); });
    result.medians = aggregate_medians(result.records);
    return result;
}

std::string bench_csv(const BenchResult& result, std::span<const double> lambdas) {
    std::ostringstream out;
    out << "version,dataset,mesh,seed,selector,config_hash,mesh_faces,n_faces,accuracy,mAP,F1,max_DI";
    for (double l : lambdas) out << ",pDI_" << fmt(l);
    out << "\n";
    for (const auto& r : result.records) {
        out << 1 << ',' << r.dataset << ',' << r.mesh << ',' << r.seed_face << ',' << r.selector << ','
            << r.config_hash << ',' << r.mesh_faces << ',' << r.n_faces << ',' << fmt(r.accuracy) << ','
            << fmt(r.mAP) << ',' << fmt(r.F1) << ',' << fmt(r.max_DI);
        for (double p : r.percent_DI) out << ',' << fmt(p);
        out << "\n";
    }
    return out.str();
}

std::string timings_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "mesh,seed,selector,seg_time,uv_time\n";
    for (const auto& r : result.records)
        out << r.mesh << ',' << r.seed_face << ',' << r.selector << ',' << fmt(r.seg_time) << ','
            << fmt(r.uv_time) << "\n";
    return out.str();
}

void write_benchmark(const fs::path& out_dir, const fs::path& dataset_dir, const std::vector<SelectorKind>& selectors,
                     const BenchOptions& opts, const BenchResult& result) {
    fs::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream out(out_dir / name);
        if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
        out << text;
    };
    write("bench.csv", bench_csv(result, opts.lambdas));
    write("timings.csv", timings_csv(result));

    json j;
    j["version"] = 1;
    j["dataset"] = dataset_id(dataset_dir);
    j["dataset_dir"] = dataset_dir.string();
    j["lambdas"] = opts.lambdas;
    j["selectors"] = json::array();
    for (SelectorKind k : selectors) {
        json c = selector_config_json(k, opts.selector);
        j["selectors"].push_back({{"selector", selector_name(k)}, {"config", c}, {"config_hash", config_hash(c)}});
    }
    j["finalize"] = {{"smooth", opts.finalize.smooth},
                     {"lambda", opts.finalize.lambda},
                     {"refine_iters", opts.finalize.refine_iters},
                     {"refine_tol", opts.finalize.refine_tol}};
    j["records"] = result.records.size();
    j["failures"] = json::array();
    for (const auto& f : result.failures)
        j["failures"].push_back({{"mesh", f.mesh}, {"seed", f.seed_face}, {"selector", f.selector}, {"error", f.error}});
    j["medians"] = json::array();
    for (const auto& m : result.medians) {
        j["medians"].push_back({{"dataset", m.dataset},
                                {"selector", m.selector},
                                {"samples", m.samples},
                                {"accuracy", opt_json(m.accuracy)},
                                {"mAP", opt_json(m.mAP)},
                                {"F1", opt_json(m.F1)},
                                {"percent_DI", m.percent_DI},
                                {"n_faces", m.n_faces},
                                {"seg_time", m.seg_time},
                                {"uv_time", m.uv_time}});
    }
    write("bench.json", j.dump(2) + "\n");
}

}  // namespace flatsel
