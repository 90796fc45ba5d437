// Benchmark harness: face-level segmentation metrics against ground-truth
// segments, and per (mesh, seed, selector) distortion and timing records.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flatsel/postprocess.hpp"
#include "flatsel/selectors.hpp"

namespace flatsel {

struct SegmentationMetrics {
    double accuracy = 0.0;
    std::optional<double> mAP;  // null when the truth is empty
    std::optional<double> F1;   // null when the truth is empty
};

// pred >= 0.5 counts as selected. mAP is the step-wise area under the
// precision-recall curve with one point per distinct pred value.
SegmentationMetrics segmentation_metrics(const WeightField& pred, std::span<const int> truth_faces);
SegmentationMetrics segmentation_metrics(const WeightField& pred, const Patch& truth);

struct BenchRecord {
    std::string dataset;
    std::string mesh;
    int seed_face = -1;
    std::string selector;
    std::string config_hash;
    int mesh_faces = 0;
    std::optional<double> accuracy, mAP, F1;  // null without labels
    std::vector<double> percent_DI;          // one per lambda of the grid
    int n_faces = 0;                         // N, faces of the final patch
    double max_DI = 0.0;
    double seg_time = 0.0;
    double uv_time = 0.0;
};

struct BenchMedians {
    std::string dataset;
    std::string selector;
    int samples = 0;
    std::optional<double> accuracy, mAP, F1;  // over non-null values only
    std::vector<double> percent_DI;
    double n_faces = 0.0;
    double seg_time = 0.0;
    double uv_time = 0.0;
};

struct BenchFailure {
    std::string mesh;
    int seed_face = -1;
    std::string selector;
    std::string error;
};

struct BenchOptions {
    std::vector<double> lambdas{0.01, 0.025, 0.05, 0.1};
    SelectorConfig selector;
    FinalizeOptions finalize;
    int threads = 0;  // 0: hardware concurrency
};

struct BenchResult {
    std::vector<BenchRecord> records;  // sorted by (mesh, seed, selector)
    std::vector<BenchMedians> medians;
    std::vector<BenchFailure> failures;
};

// Every shape directory under `dataset_dir` (the manifest order when a
// manifest.json exists, otherwise sorted sub-directories with a mesh.obj);
// labels.json is optional. Per-sample failures are collected, not thrown.
BenchResult run_benchmark(const std::filesystem::path& dataset_dir, const std::vector<SelectorKind>& selectors,
                          const BenchOptions& opts = {});

double median(std::vector<double> values);
std::vector<BenchMedians> aggregate_medians(const std::vector<BenchRecord>& records);

// Deterministic columns only: identical inputs give identical bytes.
std::string bench_csv(const BenchResult& result, std::span<const double> lambdas);
// mesh,seed,selector,seg_time,uv_time
std::string timings_csv(const BenchResult& result);

// Writes bench.csv, timings.csv and the bench.json run manifest.
void write_benchmark(const std::filesystem::path& out_dir, const std::filesystem::path& dataset_dir,
                     const std::vector<SelectorKind>& selectors, const BenchOptions& opts,
                     const BenchResult& result);

}  // namespace flatsel
