// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "rqgmm/cli.hpp"
#include "rqgmm/gmm.hpp"
#include "rqgmm/io.hpp"
#include "rqgmm/parallel.hpp"
#include "rqgmm/pipeline.hpp"
#include "rqgmm/quantizer.hpp"
#include "rqgmm/rng.hpp"
#include "rqgmm/synth.hpp"

using namespace rqgmm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-22s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failures += !o.pass;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SynthData default_data(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    return generate(spec);
}

FitConfig cfg_for(std::uint64_t seed) {
    FitConfig c;
    c.seed = seed;
    return c;
}

// ------------------------------------------------------------------ criteria

Outcome em_monotonicity() {
    const auto t0 = Clock::now();
    int traces = 0, bad = 0, restarts = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = default_data(seed);
        const auto model = fit(s.x, Method::kRqGmm, 2, 8, cfg_for(seed));
        for (const auto& lv : model.levels()) {
            const auto& g = std::get<GmmLevel>(lv);
            ++traces;
            restarts += static_cast<int>(g.reseed_iterations.size());
            for (std::size_t t = 1; t < g.loglik_trace.size(); ++t) {
                if (std::find(g.reseed_iterations.begin(), g.reseed_iterations.end(),
                              static_cast<int>(t)) != g.reseed_iterations.end()) {
                    continue;
                }
                const double prev = g.loglik_trace[t - 1];
                const double drop = (prev - g.loglik_trace[t]) / std::abs(prev);
                worst = std::max(worst, drop);
                bad += drop > 1e-9;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && secs < 60.0,
            fmt("%d traces, %d decreases beyond 1e-9 (worst rel drop %.3g), %d reseed restarts, %.1fs < 60s",
                traces, bad, worst, restarts, secs)};
}

Outcome kmeans_monotonicity() {
    int traces = 0, bad = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = default_data(seed);
        const auto model = fit(s.x, Method::kRqKmeans, 2, 8, cfg_for(seed));
        for (const auto& lv : model.levels()) {
            const auto& tr = std::get<KmeansLevel>(lv).inertia_trace;
            ++traces;
            for (std::size_t t = 1; t < tr.size(); ++t) bad += tr[t] > tr[t - 1] * (1.0 + 1e-12);
        }
    }
    return {bad == 0, fmt("%d traces, %d increases beyond 1e-12", traces, bad)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 g(2024);
    std::uniform_int_distribution<std::size_t> dk(1, 8), dd(1, 4), dl(1, 3);
    std::uniform_real_distribution<double> uw(0.05, 1.0);
    int instances = 0, nc_bad = 0, map_bad = 0, resp_bad = 0, resp_checked = 0, rec_bad = 0;
    for (; instances < 1500; ++instances) {
        const std::size_t K = dk(g), D = dd(g), L = dl(g);
        const auto codes = oracle::random_rows(g, K, D, -2, 2);
        const auto x = oracle::random_rows(g, 1, D, -3, 3)[0];

        if (nearest_code(ResidualVector{x, 0}, Codebook(oracle::from_rows(codes))).index !=
            oracle::nearest_scan(x, codes)) {
            ++nc_bad;
        }

        std::vector<double> gamma(K);
        for (auto& v : gamma) v = static_cast<double>(g() % 5);  // frequent ties
        if (map_assign(gamma) != oracle::argmax_scan(gamma)) ++map_bad;

        GmmLevel lvl;
        lvl.means = oracle::from_rows(codes);
        const auto vars = oracle::random_rows(g, K, D, 0.2, 3.0);
        lvl.variances = oracle::from_rows(vars);
        lvl.weights.resize(K);
        for (auto& w : lvl.weights) w = uw(g);
        const double ws = std::accumulate(lvl.weights.begin(), lvl.weights.end(), 0.0);
        for (auto& w : lvl.weights) w /= ws;
        bool representable = true;
        for (std::size_t k = 0; k < K; ++k) {
            representable &= oracle::direct_weighted_pdf(x, codes[k], vars[k], lvl.weights[k]) > 1e-300;
        }
        if (representable) {
            ++resp_checked;
            const auto got = responsibilities(x, lvl);
            const auto want = oracle::direct_posteriors(x, codes, vars, lvl.weights);
            for (std::size_t k = 0; k < K; ++k) resp_bad += std::abs(got[k] - want[k]) > 1e-10;
        }

        std::vector<Level> levels;
        std::vector<oracle::Rows> books;
        for (std::size_t l = 0; l < L; ++l) {
            KmeansLevel km;
            books.push_back(oracle::random_rows(g, K, D, -2, 2));
            km.centroids = Codebook(oracle::from_rows(books.back()));
            levels.emplace_back(std::move(km));
        }
        const RqModel model(Method::kRqKmeans, std::move(levels));
        std::vector<int> id(L);
        for (auto& c : id) c = static_cast<int>(g() % K);
        const auto got = reconstruct(SemanticId{id}, model);
        const auto want = oracle::sum_codes(books, id);
        if (got != want) ++rec_bad;  // same summation order: exact
    }
    const bool ok = nc_bad + map_bad + resp_bad + rec_bad == 0 && resp_checked >= 1000;
    return {ok, fmt("%d instances: nearest_code %d, map_assign %d, responsibilities %d (of %d "
                    "representable), reconstruct %d mismatches",
                    instances, nc_bad, map_bad, resp_bad, resp_checked, rec_bad)};
}

Outcome parameter_recovery() {
    const auto t0 = Clock::now();
    int good = 0;
    double worst_mean = 0.0, worst_var = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(1000 + seed);
        oracle::Rows mu(2, oracle::Vec(8, 0.0)), var(2, oracle::Vec(8));
        const double step = 6.0 / std::sqrt(8.0);
        for (auto& v : mu[1]) v = step;
        for (auto& row : var)
            for (auto& v : row) v = 0.5 + 1.5 * rng.uniform();
        Matrix data(2000, 8);
        for (std::size_t i = 0; i < 2000; ++i) {
            const std::size_t c = rng.below(2);
            for (std::size_t j = 0; j < 8; ++j) data(i, j) = mu[c][j] + std::sqrt(var[c][j]) * rng.normal();
        }
        const auto g = em_fit(data, 2, cfg_for(seed));
        double best_m = INFINITY, best_v = INFINITY;
        for (std::size_t p = 0; p < 2; ++p) {
            double em = 0.0, ev = 0.0;
            for (std::size_t c = 0; c < 2; ++c) {
                for (std::size_t j = 0; j < 8; ++j) {
                    em = std::max(em, std::abs(g.means(c, j) - mu[c ^ p][j]));
                    ev = std::max(ev, std::abs(g.variances(c, j) / var[c ^ p][j] - 1.0));
                }
            }
            if (em < best_m) {
                best_m = em;
                best_v = ev;
            }
        }
        worst_mean = std::max(worst_mean, best_m);
        worst_var = std::max(worst_var, best_v);
        good += best_m <= 0.15 && best_v <= 0.25;
    }
    const double secs = seconds_since(t0);
    return {good >= 9 && secs < 30.0,
            fmt("%d/10 seeds within 0.15 / 25%% (worst mean err %.3f, worst var err %.1f%%), %.1fs < 30s",
                good, worst_mean, 100 * worst_var, secs)};
}

struct SeedResult {
    double gmm_rmse, km_rmse;
    std::vector<double> gmm_util, km_util;
    ConvergenceTrace gmm_trace, km_trace;
};

std::vector<SeedResult> default_suite;

void run_default_suite() {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = default_data(seed);
        const auto g = fit(s.x, Method::kRqGmm, 2, 8, cfg_for(seed));
        const auto k = fit(s.x, Method::kRqKmeans, 2, 8, cfg_for(seed));
        const auto qg = evaluate(s.x, g), qk = evaluate(s.x, k);
        default_suite.push_back({qg.rmse, qk.rmse, qg.utilization_per_level, qk.utilization_per_level,
                                 convergence_trace(g), convergence_trace(k)});
    }
}

Outcome method_ordering() {
    const auto t0 = Clock::now();
    if (default_suite.empty()) run_default_suite();
    int rmse_wins = 0, util_wins = 0;
    std::string per_seed;
    for (const auto& r : default_suite) {
        rmse_wins += r.gmm_rmse <= r.km_rmse;
        bool util_ok = true;
        for (std::size_t l = 0; l < r.gmm_util.size(); ++l) util_ok &= r.gmm_util[l] >= r.km_util[l];
        util_wins += util_ok;
        per_seed += fmt(" %.3f/%.3f", r.gmm_rmse, r.km_rmse);
    }
    const double secs = seconds_since(t0);
    return {rmse_wins >= 8 && util_wins > 5 && secs < 120.0,
            fmt("RMSE gmm<=kmeans in %d/10 (need 8), utilization in %d/10 (need majority); "
                "gmm/kmeans RMSE per seed:%s",
                rmse_wins, util_wins, per_seed.c_str())};
}

// Iterations until within 1% of the level's final RMSE, summed over levels.
int iterations_to_settle(const ConvergenceTrace& tr) {
    int total = 0;
    for (const auto& s : tr.rmse_per_level) {
        const double target = 1.01 * s.back();
        std::size_t t = 0;
        while (s[t] > target) ++t;
        total += static_cast<int>(t) + 1;
    }
    return total;
}

Outcome convergence_speed() {
    if (default_suite.empty()) run_default_suite();
    int faster = 0, km_bad = 0;
    std::string per_seed;
    for (const auto& r : default_suite) {
        const int ig = iterations_to_settle(r.gmm_trace), ik = iterations_to_settle(r.km_trace);
        faster += ig <= ik;
        per_seed += fmt(" %d/%d", ig, ik);
        for (const auto& s : r.km_trace.rmse_per_level)
            for (std::size_t t = 1; t < s.size(); ++t) km_bad += s[t] > s[t - 1] * (1.0 + 1e-9);
    }
    return {faster >= 7 && km_bad == 0,
            fmt("gmm settles no later in %d/10 (need 7), kmeans trace increases %d; "
                "gmm/kmeans iterations per seed:%s",
                faster, km_bad, per_seed.c_str())};
}

Outcome rmse_in_levels() {
    int bad = 0;
    double worst = -INFINITY;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = default_data(seed);
        for (auto m : {Method::kRqGmm, Method::kRqKmeans}) {
            double prev = INFINITY;
            for (int L = 1; L <= 3; ++L) {
                const double r = evaluate(s.x, fit(s.x, m, L, 8, cfg_for(seed))).rmse;
                if (std::isfinite(prev)) worst = std::max(worst, r - prev);
                bad += r > prev + 1e-3;
                prev = r;
            }
        }
    }
    return {bad == 0, fmt("%d violations over 10 seeds x 2 methods (largest step change %+.3g)", bad, worst)};
}

Outcome utilization() {
    int full = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = default_data(seed);  // N = 5000 >= 100 * 8
        for (auto m : {Method::kRqGmm, Method::kRqKmeans}) {
            const auto q = evaluate(s.x, fit(s.x, m, 2, 8, cfg_for(seed)));
            for (double u : q.utilization_per_level) {
                ++total;
                full += u == 1.0;
            }
        }
    }
    return {full == total, fmt("%d/%d levels at 100%% utilization", full, total)};
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rqgmm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
    return code;
}

Outcome determinism() {
    const int saved_threads = threads();
    const fs::path dir = fs::temp_directory_path() / ("rqgmm_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto p = [&](const char* n) { return (dir / n).string(); };
    auto same = [&](const char* a, const char* b) { return io::read_file(p(a)) == io::read_file(p(b)); };
    int checks = 0, bad = 0;
    auto expect = [&](bool c) {
        ++checks;
        bad += !c;
    };

    expect(cli({"synth", "--out", p("x1.emb"), "--with-ids", "--seed", "5"}) == 0);
    expect(cli({"synth", "--out", p("x2.emb"), "--with-ids", "--seed", "5"}) == 0);
    expect(same("x1.emb", "x2.emb"));
    for (const char* method : {"rq-gmm", "rq-kmeans", "flat-vq"}) {
        const std::vector<std::string> base{"fit", "--data", p("x1.emb"), "--method", method,
                                            "--k", "8", "--seed", "3"};
        auto a = base, b = base, c = base;
        a.insert(a.begin(), {"--threads", "1"});
        a.insert(a.end(), {"--out", p("m1.rqm")});
        b.insert(b.begin(), {"--threads", "4"});
        b.insert(b.end(), {"--out", p("m4.rqm")});
        c.insert(c.end(), {"--out", p("m0.rqm")});
        expect(cli(a) == 0 && cli(b) == 0 && cli(c) == 0);
        expect(same("m1.rqm", "m4.rqm") && same("m1.rqm", "m0.rqm"));
        expect(cli({"--threads", "1", "encode", "--model", p("m1.rqm"), "--data", p("x1.emb"),
                    "--out", p("i1.tsv")}) == 0);
        expect(cli({"--threads", "4", "encode", "--model", p("m4.rqm"), "--data", p("x1.emb"),
                    "--out", p("i4.tsv")}) == 0);
        expect(same("i1.tsv", "i4.tsv"));

        // Round trips.
        const auto model_bytes = io::read_file(p("m1.rqm"));
        expect(io::serialize_model(io::read_model(p("m1.rqm"))) == model_bytes);
        const auto ids = io::read_file(p("i1.tsv"));
        expect(io::serialize_id_table(io::read_id_table(p("i1.tsv"))) == ids);
    }
    for (const char* dtype : {"f32", "f64"}) {
        expect(cli({"synth", "--out", p("y.emb"), "--dtype", dtype, "--n", "300", "--with-ids"}) == 0);
        const auto bytes = io::read_file(p("y.emb"));
        const auto f = io::read_embeddings(p("y.emb"));
        expect(io::serialize_embeddings(f.data, f.dtype, f.ids) == bytes);
    }
    set_threads(saved_threads);
    fs::remove_all(dir);
    return {bad == 0, fmt("%d/%d byte-identity and round-trip checks hold", checks - bad, checks)};
}

// Min over repetitions of single-threaded batch encode time.
double encode_seconds(std::size_t L, std::size_t K, std::size_t D) {
    Rng rng(L * 1000003 + K * 1009 + D);
    std::vector<Level> levels;
    for (std::size_t l = 0; l < L; ++l) {
        Matrix c(K, D);
        for (double& v : c.values()) v = rng.normal();
        KmeansLevel km;
        km.centroids = Codebook(std::move(c));
        levels.emplace_back(std::move(km));
    }
    const RqModel model(Method::kRqKmeans, std::move(levels));
    Matrix x(2000, D);
    for (double& v : x.values()) v = rng.normal();
    double best = INFINITY;
    for (int rep = 0; rep < 7; ++rep) {
        const auto t0 = Clock::now();
        const auto codes = encode_batch_serial(x, model);
        best = std::min(best, seconds_since(t0));
        if (codes.empty()) std::abort();
    }
    return best;
}

Outcome encode_complexity() {
    constexpr std::size_t L = 2, K = 64, D = 32;
    const double base = encode_seconds(L, K, D);
    const double rl = encode_seconds(2 * L, K, D) / base;
    const double rk = encode_seconds(L, 2 * K, D) / base;
    const double rd = encode_seconds(L, K, 2 * D) / base;
    auto linear = [](double r) { return r >= 2.0 / 1.5 && r <= 2.0 * 1.5; };
    return {linear(rl) && linear(rk) && linear(rd),
            fmt("doubling ratios L %.2f, K %.2f, D %.2f (linear = 2, allowed [1.33, 3.00])", rl, rk, rd)};
}

}  // namespace

int main() {
    report("em-monotonicity", em_monotonicity);
    report("kmeans-monotonicity", kmeans_monotonicity);
    report("oracle-equivalence", oracle_equivalence);
    report("parameter-recovery", parameter_recovery);
    report("method-ordering", method_ordering);
    report("convergence-speed", convergence_speed);
    report("rmse-vs-levels", rmse_in_levels);
    report("utilization", utilization);
    report("determinism", determinism);
    report("encode-complexity", encode_complexity);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
