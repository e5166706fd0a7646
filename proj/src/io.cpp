#include "rqgmm/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "rqgmm/error.hpp"

namespace rqgmm::io {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kEmbMagic = "RQEMB";
constexpr std::string_view kModelMagic = "RQMDL";

template <typename U>
U to_little(U v) {
    if constexpr (std::endian::native == std::endian::big) {
        U out = 0;
        for (std::size_t b = 0; b < sizeof(U); ++b) {
            out = static_cast<U>((out << 8) | ((v >> (8 * b)) & 0xFF));
        }
        return out;
    } else {
        return v;
    }
}

void put_f64(std::string& out, double v) {
    const auto bits = to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.append(buf, 8);
}

void put_f32(std::string& out, float v) {
    const auto bits = to_little(std::bit_cast<std::uint32_t>(v));
    char buf[4];
    std::memcpy(buf, &bits, 4);
    out.append(buf, 4);
}

double get_f64(const char* p) {
    std::uint64_t bits;
    std::memcpy(&bits, p, 8);
    return std::bit_cast<double>(to_little(bits));
}

float get_f32(const char* p) {
    std::uint32_t bits;
    std::memcpy(&bits, p, 4);
    return std::bit_cast<float>(to_little(bits));
}

void check_key(const std::string& key, const std::string& name, std::int64_t index) {
    if (key.find_first_of("\t\n\r") != std::string::npos) {
        throw FormatError(FormatErrorKind::kBadKey, name, -1,
                          "item key #" + std::to_string(index) +
                              " contains a tab or line break");
    }
}

// Splits off the JSON header line and checks magic + version.
struct Header {
    ordered_json json;
    std::size_t size = 0;  // bytes including the terminating '\n'
};

Header parse_header(std::string_view bytes, const std::string& name, std::string_view magic) {
    const std::string prefix = "{\"magic\":\"" + std::string(magic) + "\"";
    if (bytes.substr(0, prefix.size()) != prefix) {
        throw FormatError(FormatErrorKind::kBadMagic, name, 0,
                          "file does not start with the " + std::string(magic) + " header");
    }
    const auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                          "header line is not terminated");
    }
    Header h;
    h.size = nl + 1;
    try {
        h.json = ordered_json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0, e.what());
    }
    if (!h.json.is_object() || !h.json.contains("version") ||
        !h.json["version"].is_number_integer()) {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0, "missing integer 'version'");
    }
    if (h.json["version"].get<std::int64_t>() != kFormatVersion) {
        throw FormatError(FormatErrorKind::kUnsupportedVersion, name, 0,
                          "version " + h.json["version"].dump() + " is not supported (expected " +
                              std::to_string(kFormatVersion) + ")");
    }
    return h;
}

template <typename T>
T header_field(const ordered_json& j, const char* key, const std::string& name) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                          std::string("missing or ill-typed header field '") + key + "'");
    }
}

std::int64_t positive_dim(const ordered_json& j, const char* key, const std::string& name) {
    const auto v = header_field<std::int64_t>(j, key, name);
    if (v < 1) {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                          std::string("header field '") + key + "' must be >= 1");
    }
    return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::kIo, path.string(), -1, "cannot open for reading");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::kIo, path.string(), -1, "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrorKind::kIo, path.string(), -1, "write failed");
}

// ---------------------------------------------------------------- embeddings

std::string serialize_embeddings(const EmbeddingMatrix& data, DType dtype,
                                 const std::vector<std::string>& ids) {
    if (!ids.empty() && ids.size() != data.n()) {
        throw InputError("id count " + std::to_string(ids.size()) + " does not match n=" +
                         std::to_string(data.n()));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        check_key(ids[i], "<embeddings>", static_cast<std::int64_t>(i));
    }
    ordered_json h;
    h["magic"] = kEmbMagic;
    h["version"] = kFormatVersion;
    h["n"] = data.n();
    h["d"] = data.d();
    h["dtype"] = dtype == DType::kF32 ? "f32" : "f64";
    h["row_major"] = true;
    h["has_ids"] = !ids.empty();
    std::string out = h.dump();
    out += '\n';
    const std::size_t width = dtype == DType::kF32 ? 4 : 8;
    out.reserve(out.size() + data.values().size() * width);
    for (double v : data.values()) {
        if (dtype == DType::kF32) {
            put_f32(out, static_cast<float>(v));
        } else {
            put_f64(out, v);
        }
    }
    for (const auto& id : ids) {
        out += id;
        out += '\n';
    }
    return out;
}

EmbeddingFile parse_embeddings(std::string_view bytes, const std::string& name) {
    const Header h = parse_header(bytes, name, kEmbMagic);
    const auto n = positive_dim(h.json, "n", name);
    const auto d = positive_dim(h.json, "d", name);
    const auto dtype_name = header_field<std::string>(h.json, "dtype", name);
    const bool has_ids = h.json.contains("has_ids") && header_field<bool>(h.json, "has_ids", name);
    if (h.json.contains("row_major") && !header_field<bool>(h.json, "row_major", name)) {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                          "only row_major=true is supported");
    }
    DType dtype;
    if (dtype_name == "f32") {
        dtype = DType::kF32;
    } else if (dtype_name == "f64") {
        dtype = DType::kF64;
    } else {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                          "dtype must be f32 or f64, got '" + dtype_name + "'");
    }
    const std::size_t width = dtype == DType::kF32 ? 4 : 8;
    const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
    const std::size_t expected = count * width;
    const std::size_t available = bytes.size() - h.size;
    if (has_ids ? available < expected : available != expected) {
        throw FormatError(FormatErrorKind::kSizeMismatch, name, static_cast<std::int64_t>(h.size),
                          "payload is " + std::to_string(available) + " bytes, expected " +
                              std::to_string(expected) + " for n=" + std::to_string(n) +
                              ", d=" + std::to_string(d) + ", dtype=" + dtype_name);
    }
    std::vector<double> values(count);
    const char* p = bytes.data() + h.size;
    for (std::size_t i = 0; i < count; ++i, p += width) {
        const double v = width == 4 ? static_cast<double>(get_f32(p)) : get_f64(p);
        if (!std::isfinite(v)) {
            throw FormatError(FormatErrorKind::kNonFinite, name,
                              static_cast<std::int64_t>(h.size + i * width),
                              "non-finite value at row " + std::to_string(i / d) + ", column " +
                                  std::to_string(i % d));
        }
        values[i] = v;
    }

    EmbeddingFile f{EmbeddingMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(d),
                                    std::move(values)),
                    dtype,
                    {}};
    if (has_ids) {
        std::size_t pos = h.size + expected;
        while (pos < bytes.size()) {
            const auto nl = bytes.find('\n', pos);
            if (nl == std::string_view::npos) {
                throw FormatError(FormatErrorKind::kTruncated, name, static_cast<std::int64_t>(pos),
                                  "last item key is not newline-terminated");
            }
            f.ids.emplace_back(bytes.substr(pos, nl - pos));
            pos = nl + 1;
        }
        if (f.ids.size() != static_cast<std::size_t>(n)) {
            throw FormatError(FormatErrorKind::kInconsistent, name,
                              static_cast<std::int64_t>(h.size + expected),
                              "found " + std::to_string(f.ids.size()) + " item keys for n=" +
                                  std::to_string(n));
        }
    }
    return f;
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) {
    return parse_embeddings(read_file(path), path.string());
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& data, DType dtype,
                      const std::vector<std::string>& ids) {
    write_file(path, serialize_embeddings(data, dtype, ids));
}

// --------------------------------------------------------------------- model

std::string serialize_model(const RqModel& model) {
    const bool gmm = model.method() == Method::kRqGmm;
    ordered_json h;
    h["magic"] = kModelMagic;
    h["version"] = kFormatVersion;
    h["method"] = std::string(to_string(model.method()));
    h["levels"] = model.num_levels();
    h["k"] = model.k();
    h["dim"] = model.dim();
    const FitReport& rep = model.report();
    ordered_json fit;
    fit["seed"] = rep.seed;
    fit["max_iters"] = rep.max_iters;
    fit["tol"] = rep.tol;
    ordered_json levels = ordered_json::array();
    for (const auto& lr : rep.levels) {
        ordered_json o;
        o["iterations"] = lr.iterations;
        o["converged"] = lr.converged;
        o["reseeds"] = lr.reseeds;
        o["train_rmse"] = lr.train_rmse;
        o["utilization"] = lr.utilization;
        o["counts"] = lr.counts;
        levels.push_back(std::move(o));
    }
    fit["levels"] = std::move(levels);
    h["fit"] = std::move(fit);

    std::string out = h.dump();
    out += '\n';
    for (std::size_t l = 0; l < model.num_levels(); ++l) {
        for (double v : model.means(l).values()) put_f64(out, v);
        if (gmm) {
            const auto& g = std::get<GmmLevel>(model.level(l));
            for (double v : g.variances.values()) put_f64(out, v);
            for (double v : g.weights) put_f64(out, v);
        }
    }
    return out;
}

RqModel parse_model(std::string_view bytes, const std::string& name) {
    const Header h = parse_header(bytes, name, kModelMagic);
    Method method;
    try {
        method = parse_method(header_field<std::string>(h.json, "method", name));
    } catch (const InputError& e) {
        throw FormatError(FormatErrorKind::kInconsistent, name, 0, e.what());
    }
    const auto L = static_cast<std::size_t>(positive_dim(h.json, "levels", name));
    const auto K = static_cast<std::size_t>(positive_dim(h.json, "k", name));
    const auto D = static_cast<std::size_t>(positive_dim(h.json, "dim", name));
    if (method == Method::kFlatVq && L != 1) {
        throw FormatError(FormatErrorKind::kInconsistent, name, 0,
                          "flat-vq model must have exactly 1 level, header says " +
                              std::to_string(L));
    }

    FitReport rep;
    if (h.json.contains("fit")) {
        const auto& f = h.json["fit"];
        rep.seed = header_field<std::uint64_t>(f, "seed", name);
        rep.max_iters = header_field<int>(f, "max_iters", name);
        rep.tol = header_field<double>(f, "tol", name);
        if (f.contains("levels")) {
            for (const auto& o : f["levels"]) {
                LevelReport lr;
                lr.iterations = header_field<int>(o, "iterations", name);
                lr.converged = header_field<bool>(o, "converged", name);
                lr.reseeds = header_field<int>(o, "reseeds", name);
                lr.train_rmse = header_field<double>(o, "train_rmse", name);
                lr.utilization = header_field<double>(o, "utilization", name);
                lr.counts = header_field<std::vector<std::int64_t>>(o, "counts", name);
                rep.levels.push_back(std::move(lr));
            }
            if (rep.levels.size() != L) {
                throw FormatError(FormatErrorKind::kInconsistent, name, 0,
                                  "fit report lists " + std::to_string(rep.levels.size()) +
                                      " levels, header says " + std::to_string(L));
            }
        }
    }

    const bool gmm = method == Method::kRqGmm;
    const std::size_t block_values = gmm ? 2 * K * D + K : K * D;
    const std::size_t block_bytes = block_values * 8;
    std::size_t pos = h.size;
    auto read_block = [&](std::size_t level, std::size_t count) {
        if (bytes.size() - pos < count * 8) {
            throw FormatError(FormatErrorKind::kTruncated, name, static_cast<std::int64_t>(pos),
                              "level " + std::to_string(level + 1) + " parameter block is truncated (" +
                                  std::to_string(bytes.size() - h.size - level * block_bytes) +
                                  " of " + std::to_string(block_bytes) + " bytes present)");
        }
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i, pos += 8) {
            v[i] = get_f64(bytes.data() + pos);
            if (!std::isfinite(v[i])) {
                throw FormatError(FormatErrorKind::kNonFinite, name, static_cast<std::int64_t>(pos),
                                  "non-finite parameter in level " + std::to_string(level + 1));
            }
        }
        return v;
    };

    std::vector<Level> levels;
    for (std::size_t l = 0; l < L; ++l) {
        // Truncation is reported for the level as a whole before decoding any of it.
        if (bytes.size() - pos < block_bytes) read_block(l, block_values);
        Matrix means(K, D, read_block(l, K * D));
        if (gmm) {
            GmmLevel g;
            g.means = std::move(means);
            g.variances = Matrix(K, D, read_block(l, K * D));
            g.weights = read_block(l, K);
            double wsum = 0.0;
            for (double w : g.weights) {
                if (w < 0.0) {
                    throw FormatError(FormatErrorKind::kInconsistent, name, -1,
                                      "negative mixing weight in level " + std::to_string(l + 1));
                }
                wsum += w;
            }
            if (std::abs(wsum - 1.0) > 1e-9) {
                throw FormatError(FormatErrorKind::kInconsistent, name, -1,
                                  "mixing weights of level " + std::to_string(l + 1) +
                                      " do not sum to 1");
            }
            for (double v : g.variances.values()) {
                if (!(v > 0.0)) {
                    throw FormatError(FormatErrorKind::kInconsistent, name, -1,
                                      "non-positive variance in level " + std::to_string(l + 1));
                }
            }
            if (!rep.levels.empty()) g.iterations = rep.levels[l].iterations;
            levels.emplace_back(std::move(g));
        } else {
            KmeansLevel km;
            km.centroids = Codebook(std::move(means));
            if (!rep.levels.empty()) {
                km.counts = rep.levels[l].counts;
                km.iterations = rep.levels[l].iterations;
            }
            levels.emplace_back(std::move(km));
        }
    }
    if (pos != bytes.size()) {
        throw FormatError(FormatErrorKind::kSizeMismatch, name, static_cast<std::int64_t>(pos),
                          std::to_string(bytes.size() - pos) + " unexpected trailing bytes");
    }
    return RqModel(method, std::move(levels), std::move(rep));
}

RqModel read_model(const std::filesystem::path& path) {
    return parse_model(read_file(path), path.string());
}

void write_model(const std::filesystem::path& path, const RqModel& model) {
    write_file(path, serialize_model(model));
}

// ------------------------------------------------------------------- tables

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto t = line.find('\t', start);
        if (t == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, t - start));
        start = t + 1;
    }
}

}  // namespace

TextTable parse_table(std::string_view text, const std::string& name) {
    TextTable t;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto end = nl == std::string_view::npos ? text.size() : nl;
        const auto fields = split_tabs(text.substr(pos, end - pos));
        if (line_no == 0) {
            t.header = fields;
        } else {
            if (fields.size() != t.header.size()) {
                throw FormatError(FormatErrorKind::kMalformedHeader, name,
                                  static_cast<std::int64_t>(pos),
                                  "line " + std::to_string(line_no + 1) + " has " +
                                      std::to_string(fields.size()) + " fields, header has " +
                                      std::to_string(t.header.size()));
            }
            t.rows.push_back(fields);
        }
        ++line_no;
        pos = end + 1;
    }
    if (line_no == 0) throw FormatError(FormatErrorKind::kMalformedHeader, name, 0, "empty table");
    return t;
}

std::string serialize_table(const TextTable& table) {
    std::string out;
    auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i].find_first_of("\t\n\r") != std::string::npos) {
                throw FormatError(FormatErrorKind::kBadKey, "<table>", -1,
                                  "field '" + fields[i] + "' contains a tab or line break");
            }
            if (i) out += '\t';
            out += fields[i];
        }
        out += '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
    return out;
}

IdTable make_id_table(std::vector<std::string> keys, std::vector<int> codes, std::size_t levels) {
    if (levels == 0 || codes.size() != keys.size() * levels) {
        throw InputError("id table: " + std::to_string(codes.size()) + " codes for " +
                         std::to_string(keys.size()) + " keys x " + std::to_string(levels) +
                         " levels");
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
        check_key(keys[i], "<id table>", static_cast<std::int64_t>(i));
    }
    return IdTable{levels, std::move(keys), std::move(codes)};
}

std::string serialize_id_table(const IdTable& table) {
    std::string out = "item_key";
    for (std::size_t l = 0; l < table.levels; ++l) out += "\tsid_" + std::to_string(l + 1);
    out += '\n';
    for (std::size_t i = 0; i < table.keys.size(); ++i) {
        check_key(table.keys[i], "<id table>", static_cast<std::int64_t>(i));
        out += table.keys[i];
        for (int c : table.row(i)) {
            out += '\t';
            out += std::to_string(c);
        }
        out += '\n';
    }
    return out;
}

IdTable parse_id_table(std::string_view text, const std::string& name, std::optional<int> k) {
    const TextTable t = parse_table(text, name);
    if (t.header.size() < 2 || t.header[0] != "item_key") {
        throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                          "id table header must be item_key followed by sid_1..sid_L");
    }
    IdTable out;
    out.levels = t.header.size() - 1;
    for (std::size_t l = 0; l < out.levels; ++l) {
        if (t.header[l + 1] != "sid_" + std::to_string(l + 1)) {
            throw FormatError(FormatErrorKind::kMalformedHeader, name, 0,
                              "unexpected id column '" + t.header[l + 1] + "'");
        }
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out.keys.push_back(t.rows[r][0]);
        for (std::size_t l = 0; l < out.levels; ++l) {
            const std::string& f = t.rows[r][l + 1];
            std::size_t used = 0;
            int code = -1;
            try {
                code = std::stoi(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f.size() || f.empty() || code < 0 || (k && code >= *k)) {
                throw FormatError(FormatErrorKind::kInconsistent, name, -1,
                                  "row " + std::to_string(r + 1) + " level " +
                                      std::to_string(l + 1) + ": invalid code '" + f + "'");
            }
            out.codes.push_back(code);
        }
    }
    return out;
}

void write_id_table(const std::filesystem::path& path, const IdTable& table) {
    write_file(path, serialize_id_table(table));
}

IdTable read_id_table(const std::filesystem::path& path, std::optional<int> k) {
    return parse_id_table(read_file(path), path.string(), k);
}

TextTable export_features(const IdTable& ids, const TextTable& base, MissingKeyPolicy policy) {
    std::size_t key_col = base.header.size();
    for (std::size_t c = 0; c < base.header.size(); ++c) {
        if (base.header[c] == "item_key") {
            key_col = c;
            break;
        }
    }
    if (key_col == base.header.size()) {
        throw FormatError(FormatErrorKind::kMalformedHeader, "<base features>", 0,
                          "base feature table has no item_key column");
    }
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(ids.keys.size());
    for (std::size_t i = 0; i < ids.keys.size(); ++i) {
        if (!index.emplace(ids.keys[i], i).second) {
            throw FormatError(FormatErrorKind::kInconsistent, "<id table>", -1,
                              "duplicate item key '" + ids.keys[i] + "'");
        }
    }
    TextTable out;
    out.header = base.header;
    for (std::size_t l = 0; l < ids.levels; ++l) out.header.push_back("sid_" + std::to_string(l + 1));
    out.rows.reserve(base.rows.size());
    for (std::size_t r = 0; r < base.rows.size(); ++r) {
        auto row = base.rows[r];
        const auto it = index.find(row[key_col]);
        if (it == index.end()) {
            if (policy == MissingKeyPolicy::kFail) {
                throw FormatError(FormatErrorKind::kMissingKey, "<base features>", -1,
                                  "item key '" + row[key_col] + "' (row " + std::to_string(r + 1) +
                                      ") has no semantic id");
            }
            for (std::size_t l = 0; l < ids.levels; ++l) row.push_back(std::to_string(kMissingCode));
        } else {
            for (int c : ids.row(it->second)) row.push_back(std::to_string(c));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ------------------------------------------------------------------ reports

std::string quality_to_json(const QualityReport& q, std::string_view method) {
    ordered_json j;
    j["kind"] = "rqgmm-quality";
    j["version"] = kFormatVersion;
    j["method"] = std::string(method);
    j["n_samples"] = q.n_samples;
    j["rmse"] = q.rmse;
    j["utilization"] = q.utilization_per_level;
    j["histogram"] = q.code_histogram_per_level;
    return j.dump(2) + "\n";
}

std::string quality_to_text(const QualityReport& q, std::string_view method) {
    std::ostringstream os;
    os.precision(6);
    os << "method\t" << method << '\n';
    os << "n_samples\t" << q.n_samples << '\n';
    os << "rmse\t" << q.rmse << '\n';
    for (std::size_t l = 0; l < q.utilization_per_level.size(); ++l) {
        os << "utilization_l" << l + 1 << '\t' << q.utilization_per_level[l] << '\n';
    }
    return os.str();
}

}  // namespace rqgmm::io
