#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rqgmm/kmeans.hpp"
#include "rqgmm/pipeline.hpp"
#include "rqgmm/synth.hpp"

namespace rqgmm {

// One (method, seed) run: fit + evaluate on the synthetic data of that seed.
struct CompareCell {
    Method method = Method::kRqKmeans;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;  // set when !ok
    QualityReport quality;
    std::vector<int> iterations;  // per level
    double fit_seconds = 0.0;
};

struct MethodSummary {
    Method method = Method::kRqKmeans;
    double median_rmse = 0.0;
    std::vector<double> median_utilization;  // per level
    int rmse_wins = 0;         // seeds where this method has the lowest RMSE (ties count for all)
    int utilization_wins = 0;  // seeds where its mean utilization is highest (ties count for all)
    double median_iterations = 0.0;  // total over levels
    double median_fit_seconds = 0.0;
    int failures = 0;
};

struct ComparisonReport {
    SynthSpec spec;
    int levels = 0;
    int k = 0;
    FitConfig cfg;
    std::vector<std::uint64_t> seeds;
    std::vector<CompareCell> cells;  // method-major, then seed order
    std::vector<MethodSummary> summaries;
};

// For every seed s: generate data with spec.seed = s, fit each method with
// cfg.seed = s, evaluate on the training data. Failed fits are recorded in
// their cell and the run continues.
ComparisonReport compare(const SynthSpec& spec, std::span<const Method> methods, int levels, int k,
                         std::span<const std::uint64_t> seeds, const FitConfig& cfg);

// Tab-separated per-cell table followed by nothing else; one header row.
std::string to_tsv(const ComparisonReport& report, bool include_timings = true);
// Structured document (JSON); layout documented in docs/formats.md.
std::string to_json(const ComparisonReport& report, bool include_timings = true);

}  // namespace rqgmm
