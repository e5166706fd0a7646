#include "rqgmm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "rqgmm/error.hpp"
#include "rqgmm/quantizer.hpp"
#include "rqgmm/rng.hpp"

namespace rqgmm {

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::kRqGmm: return "rq-gmm";
        case Method::kRqKmeans: return "rq-kmeans";
        case Method::kFlatVq: return "flat-vq";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "rq-gmm") return Method::kRqGmm;
    if (name == "rq-kmeans") return Method::kRqKmeans;
    if (name == "flat-vq") return Method::kFlatVq;
    throw InputError("unknown method '" + std::string(name) +
                     "' (expected rq-gmm, rq-kmeans or flat-vq)");
}

namespace {

const Matrix& level_means(const Level& level) {
    if (const auto* g = std::get_if<GmmLevel>(&level)) return g->means;
    return std::get<KmeansLevel>(level).centroids;
}

}  // namespace

RqModel::RqModel(Method method, std::vector<Level> levels, FitReport report)
    : method_(method), levels_(std::move(levels)), report_(std::move(report)) {
    if (levels_.empty()) throw InputError("model needs at least one level");
    if (method_ == Method::kFlatVq && levels_.size() != 1) {
        throw InputError("flat-vq model must have exactly one level");
    }
    const bool want_gmm = method_ == Method::kRqGmm;
    dim_ = level_means(levels_.front()).cols();
    k_ = level_means(levels_.front()).rows();
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        if (std::holds_alternative<GmmLevel>(levels_[l]) != want_gmm) {
            throw InputError("level " + std::to_string(l + 1) + " type does not match method " +
                             std::string(to_string(method_)));
        }
        const Matrix& m = level_means(levels_[l]);
        if (m.cols() != dim_ || m.rows() != k_ || k_ == 0 || dim_ == 0) {
            throw InputError("level " + std::to_string(l + 1) + " has shape " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             ", expected " + std::to_string(k_) + "x" + std::to_string(dim_));
        }
        if (const auto* g = std::get_if<GmmLevel>(&levels_[l])) {
            if (g->variances.rows() != k_ || g->variances.cols() != dim_ ||
                g->weights.size() != k_) {
                throw InputError("level " + std::to_string(l + 1) +
                                 " mixture parameters have inconsistent shapes");
            }
            terms_.push_back(kernels::make_gmm_terms(g->means, g->variances, g->weights));
        }
    }
}

const Matrix& RqModel::means(std::size_t l) const { return level_means(levels_.at(l)); }

int RqModel::select_code(std::size_t l, std::span<const double> residual) const noexcept {
    if (method_ != Method::kRqGmm) {
        return nearest_index(residual, std::get<KmeansLevel>(levels_[l]).centroids);
    }
    const auto& g = std::get<GmmLevel>(levels_[l]);
    const auto& terms = terms_[l];
    int best = 0;
    double best_a = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_; ++k) {
        const double a = kernels::log_joint(residual, g.means, terms, k);
        if (a > best_a) {
            best_a = a;
            best = static_cast<int>(k);
        }
    }
    return best;
}

RqModel fit(const Matrix& data, Method method, int levels, int k, const FitConfig& cfg) {
    cfg.validate();
    if (levels < 1) throw InputError("number of levels must be >= 1");
    if (method == Method::kFlatVq && levels != 1) {
        throw InputError("flat-vq uses a single level (got " + std::to_string(levels) + ")");
    }
    if (data.rows() == 0 || data.cols() == 0) throw InputError("fit: data must be non-empty");
    if (k < 1 || static_cast<std::size_t>(k) > data.rows()) {
        throw InputError("fit: k=" + std::to_string(k) + " must be in [1, N=" +
                         std::to_string(data.rows()) + "]");
    }
    require_finite(data.values(), "fit data");

    const std::size_t N = data.rows();
    Matrix residual = data;
    std::vector<Level> fitted;
    FitReport report{cfg.seed, cfg.max_iters, cfg.tol, {}};
    std::vector<int> labels(N);

    for (int l = 0; l < levels; ++l) {
        FitConfig level_cfg = cfg;
        level_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(l));
        LevelReport lr;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (method == Method::kRqGmm) {
                GmmLevel g = em_fit(residual, k, level_cfg);
                lr.iterations = g.iterations;
                lr.converged = g.converged;
                lr.reseeds = static_cast<int>(g.reseed_iterations.size());
                lr.warnings = g.warnings;
                fitted.emplace_back(std::move(g));
            } else {
                KmeansLevel km = kmeans_fit(residual, k, level_cfg);
                lr.iterations = km.iterations;
                lr.converged = km.converged;
                lr.reseeds = km.reseeds;
                lr.warnings = km.warnings;
                fitted.emplace_back(std::move(km));
            }
        } catch (const FitError& e) {
            throw FitError("level " + std::to_string(l + 1) + ": " + e.what(), l, e.component());
        } catch (const InputError& e) {
            throw InputError("level " + std::to_string(l + 1) + ": " + e.what());
        }
        lr.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        // Hard residual propagation with the codes inference would choose.
        const RqModel partial(method, std::vector<Level>{fitted.back()});
        const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            labels[i] = partial.select_code(0, residual.row(i));
        }
        const Matrix& mu = partial.means(0);
        lr.counts.assign(static_cast<std::size_t>(k), 0);
        std::vector<double> sq(N);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            auto r = residual.row(i);
            const auto c = mu.row(static_cast<std::size_t>(labels[i]));
            double s = 0.0;
            for (std::size_t j = 0; j < r.size(); ++j) {
                r[j] -= c[j];
                s += r[j] * r[j];
            }
            sq[i] = s;
        }
        double sse = 0.0;
        for (double s : sq) sse += s;
        for (int lab : labels) ++lr.counts[static_cast<std::size_t>(lab)];
        lr.train_rmse = std::sqrt(sse / static_cast<double>(N));
        lr.utilization =
            static_cast<double>(std::count_if(lr.counts.begin(), lr.counts.end(),
                                              [](std::int64_t c) { return c > 0; })) /
            static_cast<double>(k);
        report.levels.push_back(std::move(lr));
    }
    return RqModel(method, std::move(fitted), std::move(report));
}

namespace {

void check_dim(std::span<const double> x, const RqModel& model) {
    if (x.size() != model.dim()) {
        throw InputError("dimension mismatch: vector has " + std::to_string(x.size()) +
                         ", model expects " + std::to_string(model.dim()));
    }
}

// Writes the L codes of x into out; `scratch` holds the running residual.
void encode_into(std::span<const double> x, const RqModel& model, std::span<int> out,
                 std::vector<double>& scratch) {
    scratch.assign(x.begin(), x.end());
    for (std::size_t l = 0; l < model.num_levels(); ++l) {
        const int code = model.select_code(l, scratch);
        out[l] = code;
        const auto mu = model.means(l).row(static_cast<std::size_t>(code));
        for (std::size_t j = 0; j < scratch.size(); ++j) scratch[j] -= mu[j];
    }
}

}  // namespace

SemanticId encode(std::span<const double> x, const RqModel& model) {
    check_dim(x, model);
    SemanticId id{std::vector<int>(model.num_levels())};
    std::vector<double> scratch;
    encode_into(x, model, id.codes, scratch);
    return id;
}

std::vector<double> reconstruct(const SemanticId& id, const RqModel& model) {
    if (id.codes.size() != model.num_levels()) {
        throw InputError("semantic id has " + std::to_string(id.codes.size()) +
                         " codes, model has " + std::to_string(model.num_levels()) + " levels");
    }
    std::vector<double> out(model.dim(), 0.0);
    for (std::size_t l = 0; l < id.codes.size(); ++l) {
        const int c = id.codes[l];
        if (c < 0 || static_cast<std::size_t>(c) >= model.k()) {
            throw InputError("code " + std::to_string(c) + " at level " + std::to_string(l + 1) +
                             " out of range [0, " + std::to_string(model.k()) + ")");
        }
        const auto mu = model.means(l).row(static_cast<std::size_t>(c));
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += mu[j];
    }
    return out;
}

std::vector<int> encode_batch(const Matrix& data, const RqModel& model) {
    if (data.cols() != model.dim()) check_dim(data.row(0), model);
    const std::size_t L = model.num_levels();
    std::vector<int> codes(data.rows() * L);
    const auto n = static_cast<std::ptrdiff_t>(data.rows());
#pragma omp parallel
    {
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            encode_into(data.row(i), model,
                        std::span<int>(codes).subspan(static_cast<std::size_t>(i) * L, L),
                        scratch);
        }
    }
    return codes;
}

std::vector<int> encode_batch_serial(const Matrix& data, const RqModel& model) {
    if (data.cols() != model.dim()) check_dim(data.row(0), model);
    const std::size_t L = model.num_levels();
    std::vector<int> codes(data.rows() * L);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        encode_into(data.row(i), model, std::span<int>(codes).subspan(i * L, L), scratch);
    }
    return codes;
}

QualityReport evaluate(const Matrix& data, const RqModel& model) {
    if (data.rows() == 0) throw InputError("evaluate: empty data");
    if (data.cols() != model.dim()) check_dim(data.row(0), model);
    const std::size_t N = data.rows();
    const std::size_t L = model.num_levels();
    const std::size_t D = model.dim();
    const std::vector<int> codes = encode_batch(data, model);

    std::vector<double> sq(N);
    const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel
    {
        std::vector<double> recon(D);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            std::fill(recon.begin(), recon.end(), 0.0);
            for (std::size_t l = 0; l < L; ++l) {
                const auto mu = model.means(l).row(
                    static_cast<std::size_t>(codes[static_cast<std::size_t>(i) * L + l]));
                for (std::size_t j = 0; j < D; ++j) recon[j] += mu[j];
            }
            sq[i] = squared_distance(data.row(i), recon);
        }
    }
    QualityReport rep;
    rep.n_samples = N;
    double sse = 0.0;
    for (double s : sq) sse += s;
    rep.rmse = std::sqrt(sse / static_cast<double>(N));
    rep.code_histogram_per_level.assign(L, std::vector<std::int64_t>(model.k(), 0));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t l = 0; l < L; ++l) {
            ++rep.code_histogram_per_level[l][static_cast<std::size_t>(codes[i * L + l])];
        }
    }
    for (const auto& h : rep.code_histogram_per_level) {
        const auto used = std::count_if(h.begin(), h.end(), [](std::int64_t c) { return c > 0; });
        rep.utilization_per_level.push_back(static_cast<double>(used) /
                                            static_cast<double>(model.k()));
    }
    return rep;
}

ConvergenceTrace convergence_trace(const RqModel& fitted) {
    ConvergenceTrace t{fitted.method(), {}};
    for (const auto& level : fitted.levels()) {
        if (const auto* g = std::get_if<GmmLevel>(&level)) {
            t.rmse_per_level.push_back(g->rmse_trace);
        } else {
            t.rmse_per_level.push_back(std::get<KmeansLevel>(level).rmse_trace);
        }
    }
    return t;
}

ConvergenceTrace convergence_trace(const Matrix& data, Method method, int levels, int k,
                                   const FitConfig& cfg) {
    return convergence_trace(fit(data, method, levels, k, cfg));
}

std::string to_tsv(const ConvergenceTrace& trace) {
    std::ostringstream os;
    os.precision(17);
    os << "method\tlevel\titeration\trmse\n";
    for (std::size_t l = 0; l < trace.rmse_per_level.size(); ++l) {
        const auto& series = trace.rmse_per_level[l];
        for (std::size_t t = 0; t < series.size(); ++t) {
            os << to_string(trace.method) << '\t' << l + 1 << '\t' << t + 1 << '\t' << series[t]
               << '\n';
        }
    }
    return os.str();
}

}  // namespace rqgmm
