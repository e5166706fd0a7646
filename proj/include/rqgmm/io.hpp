#pragma once

// On-disk formats. Byte layouts are described in docs/formats.md; every
// writer is deterministic (same value -> same bytes) and every reader rejects
// versions it does not know.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rqgmm/matrix.hpp"
#include "rqgmm/pipeline.hpp"

namespace rqgmm::io {

inline constexpr int kFormatVersion = 1;

enum class DType { kF32, kF64 };

struct EmbeddingFile {
    EmbeddingMatrix data;
    DType dtype = DType::kF32;
    std::vector<std::string> ids;  // empty, or one key per row
};

EmbeddingFile read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& data, DType dtype,
                      const std::vector<std::string>& ids = {});
// In-memory variants used by the file functions; `name` labels errors.
EmbeddingFile parse_embeddings(std::string_view bytes, const std::string& name);
std::string serialize_embeddings(const EmbeddingMatrix& data, DType dtype,
                                 const std::vector<std::string>& ids = {});

RqModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const RqModel& model);
RqModel parse_model(std::string_view bytes, const std::string& name);
std::string serialize_model(const RqModel& model);

// Semantic-ID table: header "item_key\tsid_1\t...\tsid_L", then one row per item.
struct IdTable {
    std::size_t levels = 0;
    std::vector<std::string> keys;
    std::vector<int> codes;  // keys.size() x levels, row-major

    std::span<const int> row(std::size_t i) const {
        return std::span<const int>(codes).subspan(i * levels, levels);
    }
};

IdTable make_id_table(std::vector<std::string> keys, std::vector<int> codes, std::size_t levels);
std::string serialize_id_table(const IdTable& table);
// `k`, when given, bounds the codes to [0, k).
IdTable parse_id_table(std::string_view text, const std::string& name,
                       std::optional<int> k = std::nullopt);
void write_id_table(const std::filesystem::path& path, const IdTable& table);
IdTable read_id_table(const std::filesystem::path& path, std::optional<int> k = std::nullopt);

// Generic tab-separated table with a header row.
struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

TextTable parse_table(std::string_view text, const std::string& name);
std::string serialize_table(const TextTable& table);

enum class MissingKeyPolicy { kFail, kFillSentinel };
inline constexpr int kMissingCode = -1;

// Left join: each row of `base` (keyed by its "item_key" column) gains
// columns sid_1..sid_L from `ids`.
TextTable export_features(const IdTable& ids, const TextTable& base,
                          MissingKeyPolicy policy = MissingKeyPolicy::kFail);

std::string quality_to_json(const QualityReport& q, std::string_view method);
std::string quality_to_text(const QualityReport& q, std::string_view method);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace rqgmm::io
