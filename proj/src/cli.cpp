#include "rqgmm/cli.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rqgmm/compare.hpp"
#include "rqgmm/error.hpp"
#include "rqgmm/io.hpp"
#include "rqgmm/parallel.hpp"
#include "rqgmm/pipeline.hpp"
#include "rqgmm/synth.hpp"

namespace rqgmm::cli {

namespace {

struct Options {
    int threads = 0;

    std::string data_path;
    std::string model_path;
    std::string out_path;
    std::string trace_path;
    std::string json_path;
    std::string truth_path;
    std::string ids_path;
    std::string base_path;

    std::string method = "rq-gmm";
    int levels = 2;
    int k = 128;
    int max_iters = 30;
    double tol = 1e-6;
    std::uint64_t seed = 0;

    SynthSpec synth;
    bool homoscedastic = false;
    std::string dtype = "f32";
    bool with_ids = false;

    std::vector<std::string> methods{"rq-gmm", "rq-kmeans"};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::string tsv_path;
    bool no_timings = false;

    std::string missing = "fail";
};

FitConfig fit_config(const Options& o) {
    FitConfig c;
    c.max_iters = o.max_iters;
    c.tol = o.tol;
    c.seed = o.seed;
    return c;
}

std::vector<std::string> row_keys(const io::EmbeddingFile& f) {
    if (!f.ids.empty()) return f.ids;
    std::vector<std::string> keys(f.data.n());
    for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = std::to_string(i);
    return keys;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        io::write_file(path, content);
    }
}

std::string fit_report_json(const RqModel& model) {
    nlohmann::ordered_json j;
    j["kind"] = "rqgmm-fit-report";
    j["method"] = std::string(to_string(model.method()));
    j["levels"] = model.num_levels();
    j["k"] = model.k();
    j["dim"] = model.dim();
    nlohmann::ordered_json lv = nlohmann::ordered_json::array();
    for (const auto& lr : model.report().levels) {
        nlohmann::ordered_json o;
        o["iterations"] = lr.iterations;
        o["converged"] = lr.converged;
        o["reseeds"] = lr.reseeds;
        o["train_rmse"] = lr.train_rmse;
        o["utilization"] = lr.utilization;
        o["wall_seconds"] = lr.wall_seconds;
        o["warnings"] = lr.warnings;
        lv.push_back(std::move(o));
    }
    j["per_level"] = std::move(lv);
    return j.dump(2) + "\n";
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
    SynthSpec spec = o.synth;
    spec.heteroscedastic = !o.homoscedastic;
    spec.seed = o.seed;
    const SynthData d = generate(spec);
    std::vector<std::string> ids;
    if (o.with_ids) {
        ids.resize(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) ids[i] = "item" + std::to_string(i);
    }
    io::write_embeddings(o.out_path, d.x, o.dtype == "f64" ? io::DType::kF64 : io::DType::kF32, ids);
    if (!o.truth_path.empty()) {
        io::TextTable t{{"item_key", "coarse", "fine"}, {}};
        for (std::size_t i = 0; i < spec.n; ++i) {
            t.rows.push_back({o.with_ids ? ids[i] : std::to_string(i),
                              std::to_string(d.coarse_labels[i]), std::to_string(d.fine_labels[i])});
        }
        io::write_file(o.truth_path, io::serialize_table(t));
    }
    err << "synth: wrote " << spec.n << " x " << spec.d << " embeddings to " << o.out_path << '\n';
    (void)out;
    return kOk;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
    const io::EmbeddingFile f = io::read_embeddings(o.data_path);
    const Method method = parse_method(o.method);
    const int levels = method == Method::kFlatVq ? 1 : o.levels;
    err << "fit: " << o.method << " L=" << levels << " K=" << o.k << " on " << f.data.n() << " x "
        << f.data.d() << '\n';
    const RqModel model = fit(f.data, method, levels, o.k, fit_config(o));
    for (std::size_t l = 0; l < model.report().levels.size(); ++l) {
        const auto& lr = model.report().levels[l];
        err << "  level " << l + 1 << ": " << lr.iterations << " iterations"
            << (lr.converged ? " (converged)" : "") << ", rmse " << lr.train_rmse
            << ", utilization " << lr.utilization << '\n';
        for (const auto& w : lr.warnings) err << "  warning: level " << l + 1 << ": " << w << '\n';
    }
    io::write_model(o.out_path, model);
    if (!o.trace_path.empty()) io::write_file(o.trace_path, to_tsv(convergence_trace(model)));
    out << fit_report_json(model);
    return kOk;
}

int cmd_encode(const Options& o, std::ostream& out, std::ostream&) {
    const RqModel model = io::read_model(o.model_path);
    const io::EmbeddingFile f = io::read_embeddings(o.data_path);
    if (f.data.d() != model.dim()) {
        throw FormatError(FormatErrorKind::kInconsistent, o.data_path, -1,
                          "embeddings have d=" + std::to_string(f.data.d()) + " but model " +
                              o.model_path + " expects D=" + std::to_string(model.dim()));
    }
    auto table = io::make_id_table(row_keys(f), encode_batch(f.data, model), model.num_levels());
    emit(o.out_path, io::serialize_id_table(table), out);
    return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
    const RqModel model = io::read_model(o.model_path);
    const io::EmbeddingFile f = io::read_embeddings(o.data_path);
    if (f.data.d() != model.dim()) {
        throw FormatError(FormatErrorKind::kInconsistent, o.data_path, -1,
                          "embeddings have d=" + std::to_string(f.data.d()) + " but model " +
                              o.model_path + " expects D=" + std::to_string(model.dim()));
    }
    const QualityReport q = evaluate(f.data, model);
    const auto name = to_string(model.method());
    out << io::quality_to_text(q, name);
    if (!o.json_path.empty()) io::write_file(o.json_path, io::quality_to_json(q, name));
    return kOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
    std::vector<Method> methods;
    for (const auto& m : o.methods) methods.push_back(parse_method(m));
    SynthSpec spec = o.synth;
    spec.heteroscedastic = !o.homoscedastic;
    const auto rep = compare(spec, methods, o.levels, o.k, o.seeds, fit_config(o));
    for (const auto& c : rep.cells) {
        if (!c.ok) err << "compare: " << to_string(c.method) << " seed " << c.seed << " failed: " << c.error << '\n';
    }
    const bool timings = !o.no_timings;
    if (!o.tsv_path.empty()) io::write_file(o.tsv_path, to_tsv(rep, timings));
    if (!o.json_path.empty()) io::write_file(o.json_path, to_json(rep, timings));
    std::ostringstream s;
    s.precision(6);
    s << "method\tmedian_rmse\trmse_wins\tutilization_wins\tmedian_iterations\tfailures\n";
    for (const auto& m : rep.summaries) {
        s << to_string(m.method) << '\t' << m.median_rmse << '\t' << m.rmse_wins << '\t'
          << m.utilization_wins << '\t' << m.median_iterations << '\t' << m.failures << '\n';
    }
    out << s.str();
    return kOk;
}

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

int cmd_inspect(const Options& o, std::ostream& out, std::ostream&) {
    const RqModel model = io::read_model(o.model_path);
    out << "method      " << to_string(model.method()) << '\n'
        << "levels      " << model.num_levels() << '\n'
        << "k           " << model.k() << '\n'
        << "dim         " << model.dim() << '\n';
    const auto& rep = model.report();
    if (rep.max_iters > 0) {
        out << "fit         seed=" << rep.seed << " max_iters=" << rep.max_iters
            << " tol=" << rep.tol << '\n';
    }
    for (std::size_t l = 0; l < model.num_levels(); ++l) {
        std::vector<double> w;
        if (const auto* g = std::get_if<GmmLevel>(&model.level(l))) {
            w = g->weights;
        } else if (l < rep.levels.size() && !rep.levels[l].counts.empty()) {
            double total = 0.0;
            for (auto c : rep.levels[l].counts) total += static_cast<double>(c);
            for (auto c : rep.levels[l].counts) w.push_back(static_cast<double>(c) / total);
        }
        out << "level " << l + 1 << "     K=" << model.k();
        if (!w.empty()) {
            out << " weight_entropy=" << entropy(w) << " (max " << std::log(static_cast<double>(model.k()))
                << ")";
        }
        if (l < rep.levels.size()) {
            const auto& lr = rep.levels[l];
            out << " iterations=" << lr.iterations << (lr.converged ? " converged" : "")
                << " train_rmse=" << lr.train_rmse << " utilization=" << lr.utilization;
        }
        out << '\n';
    }
    return kOk;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream&) {
    const io::IdTable ids = io::read_id_table(o.ids_path);
    const io::TextTable base = io::parse_table(io::read_file(o.base_path), o.base_path);
    const auto policy =
        o.missing == "fill" ? io::MissingKeyPolicy::kFillSentinel : io::MissingKeyPolicy::kFail;
    emit(o.out_path, io::serialize_table(io::export_features(ids, base, policy)), out);
    return kOk;
}

void add_fit_options(CLI::App* sub, Options& o) {
    sub->add_option("--method", o.method, "rq-gmm | rq-kmeans | flat-vq")
        ->check(CLI::IsMember({"rq-gmm", "rq-kmeans", "flat-vq"}))
        ->capture_default_str();
    sub->add_option("--levels", o.levels, "Residual levels L")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k", o.k, "Codes per level K")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-iters", o.max_iters, "Iteration cap per level")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tol", o.tol, "Relative convergence threshold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
}

void add_synth_options(CLI::App* sub, Options& o) {
    sub->add_option("--n", o.synth.n, "Samples")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--d", o.synth.d, "Dimensionality")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--coarse-k", o.synth.coarse_k, "Level-1 clusters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--fine-k", o.synth.fine_k, "Level-2 offset clusters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--coarse-scale", o.synth.coarse_scale)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--fine-scale", o.synth.fine_scale)->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--noise-sigma", o.synth.noise_sigma)->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_flag("--homoscedastic", o.homoscedastic, "Equal noise scale for every cluster");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Residual-quantization semantic IDs (RQ-GMM / RQ-KMeans)", "rqgmm"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "Optional TOML/INI file supplying defaults; flags win");
    app.add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)")
        ->envname("RQGMM_THREADS")
        ->check(CLI::NonNegativeNumber);

    auto* synth = app.add_subcommand("synth", "Generate synthetic hierarchical embeddings");
    synth->add_option("--out", o.out_path, "Embedding file to write")->required();
    synth->add_option("--truth", o.truth_path, "Ground-truth label table to write");
    synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    synth->add_option("--dtype", o.dtype)->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
    synth->add_flag("--with-ids", o.with_ids, "Store item keys item0..item{n-1}");
    add_synth_options(synth, o);

    auto* fitc = app.add_subcommand("fit", "Fit a residual quantizer");
    fitc->add_option("--data", o.data_path, "Embedding file")->required();
    fitc->add_option("--out", o.out_path, "Model file to write")->required();
    fitc->add_option("--trace", o.trace_path, "Write per-iteration RMSE series (TSV)");
    add_fit_options(fitc, o);

    auto* enc = app.add_subcommand("encode", "Assign semantic IDs");
    enc->add_option("--model", o.model_path)->required();
    enc->add_option("--data", o.data_path)->required();
    enc->add_option("--out", o.out_path, "ID table (default: stdout)");

    auto* ev = app.add_subcommand("eval", "Reconstruction RMSE and codebook utilization");
    ev->add_option("--model", o.model_path)->required();
    ev->add_option("--data", o.data_path)->required();
    ev->add_option("--json", o.json_path, "Also write the report as JSON");

    auto* cmp = app.add_subcommand("compare", "Multi-seed method comparison on synthetic data");
    add_fit_options(cmp, o);
    add_synth_options(cmp, o);
    cmp->add_option("--methods", o.methods)->delimiter(',')->capture_default_str();
    cmp->add_option("--seeds", o.seeds)->delimiter(',')->capture_default_str();
    cmp->add_option("--tsv", o.tsv_path, "Per-cell table");
    cmp->add_option("--json", o.json_path, "Full report");
    cmp->add_flag("--no-timings", o.no_timings, "Omit wall-clock fields (byte-stable output)");

    auto* ins = app.add_subcommand("inspect", "Summarize a model file");
    ins->add_option("--model", o.model_path)->required();

    auto* exp = app.add_subcommand("export", "Join semantic IDs onto a feature table");
    exp->add_option("--ids", o.ids_path, "ID table")->required();
    exp->add_option("--base", o.base_path, "Base feature table with an item_key column")->required();
    exp->add_option("--out", o.out_path, "Joined table (default: stdout)");
    exp->add_option("--missing", o.missing, "fail | fill (-1 sentinel)")
        ->check(CLI::IsMember({"fail", "fill"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }
    if (o.threads > 0) set_threads(o.threads);

    try {
        if (*synth) return cmd_synth(o, out, err);
        if (*fitc) return cmd_fit(o, out, err);
        if (*enc) return cmd_encode(o, out, err);
        if (*ev) return cmd_eval(o, out, err);
        if (*cmp) return cmd_compare(o, out, err);
        if (*ins) return cmd_inspect(o, out, err);
        if (*exp) return cmd_export(o, out, err);
    } catch (const FitError& e) {
        err << "fit failed: " << e.what() << '\n';
        return kFitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace rqgmm::cli
