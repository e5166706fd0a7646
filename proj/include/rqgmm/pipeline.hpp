#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rqgmm/gmm.hpp"
#include "rqgmm/kernels.hpp"
#include "rqgmm/kmeans.hpp"
#include "rqgmm/matrix.hpp"

namespace rqgmm {

enum class Method { kRqGmm, kRqKmeans, kFlatVq };

std::string_view to_string(Method m) noexcept;
// Accepts "rq-gmm", "rq-kmeans", "flat-vq".
Method parse_method(std::string_view name);

struct LevelReport {
    int iterations = 0;
    bool converged = false;
    int reseeds = 0;
    double wall_seconds = 0.0;
    double train_rmse = 0.0;   // cumulative reconstruction RMSE after this level
    double utilization = 0.0;  // distinct training codes / K
    std::vector<std::int64_t> counts;
    std::vector<std::string> warnings;
};

struct FitReport {
    std::uint64_t seed = 0;
    int max_iters = 0;
    double tol = 0.0;
    std::vector<LevelReport> levels;
};

using Level = std::variant<KmeansLevel, GmmLevel>;

// L fitted levels of one method, all sharing D and K. Immutable once built;
// safe to share between threads for encoding.
class RqModel {
public:
    RqModel(Method method, std::vector<Level> levels, FitReport report = {});

    Method method() const noexcept { return method_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t num_levels() const noexcept { return levels_.size(); }

    const Level& level(std::size_t l) const { return levels_.at(l); }
    const std::vector<Level>& levels() const noexcept { return levels_; }
    // Code vectors of level l: centroids or mixture means.
    const Matrix& means(std::size_t l) const;
    const FitReport& report() const noexcept { return report_; }

    // Code chosen for a residual at level l: nearest centroid, or the
    // maximum-posterior component. Unchecked dimensions.
    int select_code(std::size_t l, std::span<const double> residual) const noexcept;

private:
    Method method_;
    std::size_t dim_ = 0;
    std::size_t k_ = 0;
    std::vector<Level> levels_;
    FitReport report_;
    std::vector<kernels::GmmTerms> terms_;  // per GMM level
};

struct SemanticId {
    std::vector<int> codes;
    friend bool operator==(const SemanticId&, const SemanticId&) = default;
};

struct QualityReport {
    double rmse = 0.0;
    std::vector<double> utilization_per_level;
    std::vector<std::vector<std::int64_t>> code_histogram_per_level;
    std::size_t n_samples = 0;
};

// Fits level 1 on the data, propagates hard-assignment residuals, fits level 2
// on those, and so on. Level l uses seed derive_seed(cfg.seed, l).
RqModel fit(const Matrix& data, Method method, int levels, int k, const FitConfig& cfg);

SemanticId encode(std::span<const double> x, const RqModel& model);
std::vector<double> reconstruct(const SemanticId& id, const RqModel& model);

// Codes for every row, N x L row-major. OpenMP over rows.
std::vector<int> encode_batch(const Matrix& data, const RqModel& model);
// Single-threaded reference for encode_batch.
std::vector<int> encode_batch_serial(const Matrix& data, const RqModel& model);

QualityReport evaluate(const Matrix& data, const RqModel& model);

// Reconstruction RMSE over the training data after every fitting iteration
// of every level (levels before l contribute their final codes).
struct ConvergenceTrace {
    Method method;
    std::vector<std::vector<double>> rmse_per_level;
};

ConvergenceTrace convergence_trace(const Matrix& data, Method method, int levels, int k,
                                   const FitConfig& cfg);
ConvergenceTrace convergence_trace(const RqModel& fitted);

// Tab-separated table: method, level, iteration, rmse.
std::string to_tsv(const ConvergenceTrace& trace);

}  // namespace rqgmm
