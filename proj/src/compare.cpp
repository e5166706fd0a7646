#include "rqgmm/compare.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rqgmm/error.hpp"

namespace rqgmm {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean_utilization(const QualityReport& q) {
    if (q.utilization_per_level.empty()) return 0.0;
    return std::accumulate(q.utilization_per_level.begin(), q.utilization_per_level.end(), 0.0) /
           static_cast<double>(q.utilization_per_level.size());
}

}  // namespace

ComparisonReport compare(const SynthSpec& spec, std::span<const Method> methods, int levels, int k,
                         std::span<const std::uint64_t> seeds, const FitConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (methods.empty() || seeds.empty()) throw InputError("compare: need at least one method and seed");

    ComparisonReport rep;
    rep.spec = spec;
    rep.levels = levels;
    rep.k = k;
    rep.cfg = cfg;
    rep.seeds.assign(seeds.begin(), seeds.end());

    std::vector<SynthData> data;
    data.reserve(seeds.size());
    for (auto s : seeds) {
        SynthSpec sp = spec;
        sp.seed = s;
        data.push_back(generate(sp));
    }

    for (Method m : methods) {
        for (std::size_t si = 0; si < seeds.size(); ++si) {
            CompareCell cell;
            cell.method = m;
            cell.seed = seeds[si];
            FitConfig c = cfg;
            c.seed = seeds[si];
            try {
                const int L = m == Method::kFlatVq ? 1 : levels;
                const auto t0 = std::chrono::steady_clock::now();
                const RqModel model = fit(data[si].x, m, L, k, c);
                cell.fit_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                for (const auto& lr : model.report().levels) cell.iterations.push_back(lr.iterations);
                cell.quality = evaluate(data[si].x, model);
                cell.ok = true;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            rep.cells.push_back(std::move(cell));
        }
    }

    const std::size_t S = seeds.size();
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodSummary sum;
        sum.method = methods[mi];
        std::vector<double> rmse, iters, secs;
        std::vector<std::vector<double>> util;
        for (std::size_t si = 0; si < S; ++si) {
            const auto& cell = rep.cells[mi * S + si];
            if (!cell.ok) {
                ++sum.failures;
                continue;
            }
            rmse.push_back(cell.quality.rmse);
            secs.push_back(cell.fit_seconds);
            iters.push_back(std::accumulate(cell.iterations.begin(), cell.iterations.end(), 0.0));
            util.resize(std::max(util.size(), cell.quality.utilization_per_level.size()));
            for (std::size_t l = 0; l < cell.quality.utilization_per_level.size(); ++l) {
                util[l].push_back(cell.quality.utilization_per_level[l]);
            }
        }
        sum.median_rmse = median(rmse);
        sum.median_iterations = median(iters);
        sum.median_fit_seconds = median(secs);
        for (auto& u : util) sum.median_utilization.push_back(median(u));
        rep.summaries.push_back(std::move(sum));
    }

    for (std::size_t si = 0; si < S; ++si) {
        double best_rmse = std::numeric_limits<double>::infinity();
        double best_util = -1.0;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto& cell = rep.cells[mi * S + si];
            if (!cell.ok) continue;
            best_rmse = std::min(best_rmse, cell.quality.rmse);
            best_util = std::max(best_util, mean_utilization(cell.quality));
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto& cell = rep.cells[mi * S + si];
            if (!cell.ok) continue;
            if (cell.quality.rmse == best_rmse) ++rep.summaries[mi].rmse_wins;
            if (mean_utilization(cell.quality) == best_util) ++rep.summaries[mi].utilization_wins;
        }
    }
    return rep;
}

std::string to_tsv(const ComparisonReport& report, bool include_timings) {
    std::ostringstream os;
    os.precision(17);
    os << "method\tseed\tstatus\trmse";
    for (int l = 0; l < report.levels; ++l) os << "\tutil_l" << l + 1;
    for (int l = 0; l < report.levels; ++l) os << "\titers_l" << l + 1;
    if (include_timings) os << "\tfit_seconds";
    os << '\n';
    for (const auto& cell : report.cells) {
        os << to_string(cell.method) << '\t' << cell.seed << '\t' << (cell.ok ? "ok" : "failed")
           << '\t';
        if (cell.ok) os << cell.quality.rmse;
        for (int l = 0; l < report.levels; ++l) {
            os << '\t';
            if (cell.ok && static_cast<std::size_t>(l) < cell.quality.utilization_per_level.size()) {
                os << cell.quality.utilization_per_level[static_cast<std::size_t>(l)];
            }
        }
        for (int l = 0; l < report.levels; ++l) {
            os << '\t';
            if (cell.ok && static_cast<std::size_t>(l) < cell.iterations.size()) {
                os << cell.iterations[static_cast<std::size_t>(l)];
            }
        }
        if (include_timings) os << '\t' << cell.fit_seconds;
        os << '\n';
    }
    return os.str();
}

std::string to_json(const ComparisonReport& report, bool include_timings) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["kind"] = "rqgmm-comparison";
    j["version"] = 1;
    const auto& s = report.spec;
    j["spec"] = {{"n", s.n},
                 {"d", s.d},
                 {"coarse_k", s.coarse_k},
                 {"fine_k", s.fine_k},
                 {"coarse_scale", s.coarse_scale},
                 {"fine_scale", s.fine_scale},
                 {"noise_sigma", s.noise_sigma},
                 {"heteroscedastic", s.heteroscedastic}};
    j["levels"] = report.levels;
    j["k"] = report.k;
    j["max_iters"] = report.cfg.max_iters;
    j["tol"] = report.cfg.tol;
    j["seeds"] = report.seeds;
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.cells) {
        ordered_json o;
        o["method"] = std::string(to_string(c.method));
        o["seed"] = c.seed;
        o["ok"] = c.ok;
        if (!c.ok) {
            o["error"] = c.error;
        } else {
            o["rmse"] = c.quality.rmse;
            o["utilization"] = c.quality.utilization_per_level;
            o["histogram"] = c.quality.code_histogram_per_level;
            o["iterations"] = c.iterations;
        }
        if (include_timings) o["fit_seconds"] = c.fit_seconds;
        cells.push_back(std::move(o));
    }
    j["cells"] = std::move(cells);
    ordered_json sums = ordered_json::array();
    for (const auto& m : report.summaries) {
        ordered_json o;
        o["method"] = std::string(to_string(m.method));
        o["median_rmse"] = m.median_rmse;
        o["median_utilization"] = m.median_utilization;
        o["rmse_wins"] = m.rmse_wins;
        o["utilization_wins"] = m.utilization_wins;
        o["median_iterations"] = m.median_iterations;
        if (include_timings) o["median_fit_seconds"] = m.median_fit_seconds;
        o["failures"] = m.failures;
        sums.push_back(std::move(o));
    }
    j["summary"] = std::move(sums);
    return j.dump(2) + "\n";
}

}  // namespace rqgmm
