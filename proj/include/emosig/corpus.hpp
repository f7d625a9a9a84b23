#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace emosig {

struct Record {
    std::string text;
    std::set<std::string> labels;  // non-empty
    std::string dataset_id;

    friend bool operator==(const Record&, const Record&) = default;
};

enum class DatasetFormat { jsonl, csv };

// Describes how to read one labelled dataset file.
struct DatasetManifest {
    std::string id;
    DatasetFormat format = DatasetFormat::jsonl;
    std::string text_field = "text";
    std::string labels_field = "labels";
    std::string label_delimiter = ",";
    std::filesystem::path path;  // data file; relative paths resolve against the manifest's directory

    // `base_dir` resolves a relative "path" entry.
    static DatasetManifest from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
};

DatasetManifest load_dataset_manifest(const std::filesystem::path& path);

struct RowError {
    std::size_t line;
    std::string message;
};

struct IngestReport {
    std::string dataset_id;
    std::size_t rows_seen = 0;
    std::size_t records = 0;
    std::vector<RowError> skipped;

    nlohmann::json to_json() const;
};

struct IngestResult {
    std::vector<Record> records;
    IngestReport report;
};

// Rows missing a declared field (or with no labels) are skipped and reported;
// malformed JSON lines or CSV quoting raise FormatError.
IngestResult ingest(const std::filesystem::path& path, const DatasetManifest& manifest);
IngestResult ingest_text(std::string_view text, const DatasetManifest& manifest, const std::string& source);

// Raw label -> canonical emotion. Canonical names (alias targets plus the optional
// explicit list) map to themselves, which makes harmonize idempotent.
struct LabelMap {
    std::map<std::string, std::string> aliases;
    std::set<std::string> canonical;

    void validate() const;
    static LabelMap from_json(const nlohmann::json& j, const std::string& source = "label map");
    nlohmann::json to_json() const;
};

LabelMap load_label_map(const std::filesystem::path& path);

// The 30 canonical emotions shipped with the default map (best effort, not authoritative).
const std::vector<std::string>& default_canonical_emotions();
LabelMap default_label_map();

// Throws ValidationError naming every unmapped label.
std::vector<Record> harmonize(const std::vector<Record>& records, const LabelMap& map);

struct LabelGroup {
    std::string emotion;
    std::string dataset_id;
    std::vector<std::string> texts;
};

// One group per (emotion, dataset_id), sorted by emotion then dataset id. A record
// with k labels lands in k groups; text order follows input order.
std::vector<LabelGroup> group_by_label(const std::vector<Record>& records);

}  // namespace emosig
