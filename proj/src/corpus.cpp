#include "emosig/corpus.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig {

namespace {

std::set<std::string> clean_labels(const std::vector<std::string>& raw) {
    std::set<std::string> out;
    for (const auto& l : raw) {
        auto t = trim(l);
        if (!t.empty()) out.insert(lower_ascii(t));
    }
    return out;
}

std::vector<std::string> split_labels(std::string_view s, const std::string& delim) {
    if (delim.empty()) return {std::string(s)};
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(delim, start);
        parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + delim.size();
    }
    return parts;
}

void ingest_jsonl(std::string_view text, const DatasetManifest& m, const std::string& source, IngestResult& out) {
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty()) continue;
        ++out.report.rows_seen;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(source, line_no, e.byte, "invalid JSON line");
        }
        if (!row.is_object()) throw FormatError(source, line_no, 1, "JSON line is not an object");

        auto skip = [&](std::string msg) { out.report.skipped.push_back({line_no, std::move(msg)}); };
        if (!row.contains(m.text_field) || !row[m.text_field].is_string()) {
            skip(fmt::format("missing text field '{}'", m.text_field));
            continue;
        }
        if (!row.contains(m.labels_field)) {
            skip(fmt::format("missing labels field '{}'", m.labels_field));
            continue;
        }
        const auto& lf = row[m.labels_field];
        std::vector<std::string> raw_labels;
        if (lf.is_string()) {
            raw_labels = split_labels(lf.get<std::string>(), m.label_delimiter);
        } else if (lf.is_array() && std::all_of(lf.begin(), lf.end(), [](const auto& v) { return v.is_string(); })) {
            for (const auto& v : lf) raw_labels.push_back(v.get<std::string>());
        } else {
            skip(fmt::format("labels field '{}' must be a string or an array of strings", m.labels_field));
            continue;
        }
        auto labels = clean_labels(raw_labels);
        if (labels.empty()) {
            skip("no labels");
            continue;
        }
        out.records.push_back({row[m.text_field].get<std::string>(), std::move(labels), m.id});
    }
}

void ingest_csv(std::string_view text, const DatasetManifest& m, const std::string& source, IngestResult& out) {
    auto rows = parse_csv(text, source);
    if (rows.empty()) throw FormatError(source, 1, 1, "CSV file has no header row");
    const auto& header = rows.front().fields;
    auto column = [&](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    const auto text_col = column(m.text_field);
    const auto label_col = column(m.labels_field);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        ++out.report.rows_seen;
        auto skip = [&](std::string msg) { out.report.skipped.push_back({row.line, std::move(msg)}); };
        if (text_col < 0 || static_cast<std::size_t>(text_col) >= row.fields.size()) {
            skip(fmt::format("missing text field '{}'", m.text_field));
            continue;
        }
        if (label_col < 0 || static_cast<std::size_t>(label_col) >= row.fields.size()) {
            skip(fmt::format("missing labels field '{}'", m.labels_field));
            continue;
        }
        auto labels = clean_labels(split_labels(row.fields[label_col], m.label_delimiter));
        if (labels.empty()) {
            skip("no labels");
            continue;
        }
        out.records.push_back({row.fields[text_col], std::move(labels), m.id});
    }
}

}  // namespace

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("dataset manifest must be a JSON object");
    auto get_str = [&](const char* key, const std::string& fallback, bool required) {
        if (!j.contains(key)) {
            if (required) throw ConfigError(fmt::format("dataset manifest is missing \"{}\"", key));
            return fallback;
        }
        if (!j[key].is_string()) throw ConfigError(fmt::format("dataset manifest field \"{}\" must be a string", key));
        return j[key].get<std::string>();
    };
    DatasetManifest m;
    m.id = get_str("id", "", true);
    if (m.id.empty()) throw ConfigError("dataset manifest \"id\" is empty");
    if (m.id == "CONSOLIDATED") throw ConfigError("dataset id CONSOLIDATED is reserved");
    auto fmt_name = get_str("format", "jsonl", true);
    if (fmt_name == "jsonl")
        m.format = DatasetFormat::jsonl;
    else if (fmt_name == "csv")
        m.format = DatasetFormat::csv;
    else
        throw ConfigError(fmt::format("unknown dataset format '{}'", fmt_name));
    m.text_field = get_str("text_field", "text", false);
    m.labels_field = get_str("labels_field", "labels", false);
    m.label_delimiter = get_str("label_delimiter", ",", false);
    auto p = get_str("path", "", false);
    if (!p.empty()) {
        std::filesystem::path fp(p);
        m.path = fp.is_absolute() || base_dir.empty() ? fp : base_dir / fp;
    }
    return m;
}

DatasetManifest load_dataset_manifest(const std::filesystem::path& path) {
    auto j = parse_json_strict(read_text_file(path), path.string());
    return DatasetManifest::from_json(j, path.parent_path());
}

nlohmann::json IngestReport::to_json() const {
    nlohmann::json skipped_rows = nlohmann::json::array();
    for (const auto& e : skipped) skipped_rows.push_back({{"line", e.line}, {"message", e.message}});
    return {{"dataset_id", dataset_id}, {"rows_seen", rows_seen}, {"records", records}, {"skipped", skipped_rows}};
}

IngestResult ingest_text(std::string_view text, const DatasetManifest& manifest, const std::string& source) {
    IngestResult out;
    out.report.dataset_id = manifest.id;
    if (manifest.format == DatasetFormat::jsonl)
        ingest_jsonl(text, manifest, source, out);
    else
        ingest_csv(text, manifest, source, out);
    out.report.records = out.records.size();
    return out;
}

IngestResult ingest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    return ingest_text(read_text_file(path), manifest, path.string());
}

void LabelMap::validate() const {
    for (const auto& [raw, canon] : aliases) {
        if (raw.empty() || canon.empty()) throw ValidationError("label map contains an empty label");
        if (canon != lower_ascii(canon))
            throw ValidationError(fmt::format("canonical label '{}' must be lowercase", canon));
        if (auto it = aliases.find(canon); it != aliases.end() && it->second != canon)
            throw ValidationError(
                fmt::format("alias chain: '{}' -> '{}' -> '{}'", raw, canon, it->second));
    }
    for (const auto& c : canonical) {
        if (c.empty() || c != lower_ascii(c))
            throw ValidationError(fmt::format("canonical label '{}' must be non-empty lowercase", c));
        if (auto it = aliases.find(c); it != aliases.end() && it->second != c)
            throw ValidationError(fmt::format("canonical label '{}' is also an alias of '{}'", c, it->second));
    }
}

LabelMap LabelMap::from_json(const nlohmann::json& j, const std::string& source) {
    if (!j.is_object() || !j.contains("aliases") || !j["aliases"].is_object())
        throw ValidationError(fmt::format("{}: expected {{\"aliases\": {{...}}}}", source));
    LabelMap m;
    for (const auto& [raw, canon] : j["aliases"].items()) {
        if (!canon.is_string()) throw ValidationError(fmt::format("{}: alias '{}' must map to a string", source, raw));
        m.aliases.emplace(lower_ascii(trim(raw)), canon.get<std::string>());
    }
    if (j.contains("canonical")) {
        for (const auto& c : j["canonical"]) {
            if (!c.is_string()) throw ValidationError(fmt::format("{}: canonical entries must be strings", source));
            m.canonical.insert(c.get<std::string>());
        }
    }
    m.validate();
    return m;
}

nlohmann::json LabelMap::to_json() const {
    nlohmann::json j = {{"aliases", aliases}};
    if (!canonical.empty()) j["canonical"] = canonical;
    return j;
}

LabelMap load_label_map(const std::filesystem::path& path) {
    return LabelMap::from_json(parse_json_strict(read_text_file(path), path.string()), path.string());
}

const std::vector<std::string>& default_canonical_emotions() {
    static const std::vector<std::string> kEmotions = {
        "admiration", "amusement", "anger",       "annoyance",     "anticipation", "approval",
        "caring",     "confusion", "curiosity",   "desire",        "disappointment", "disapproval",
        "disgust",    "embarrassment", "excitement", "fear",       "gratitude",    "grief",
        "guilt",      "joy",       "love",        "nervousness",   "optimism",     "pride",
        "realization", "relief",   "remorse",     "sadness",       "surprise",     "trust"};
    return kEmotions;
}

LabelMap default_label_map() {
    LabelMap m;
    m.canonical.insert(default_canonical_emotions().begin(), default_canonical_emotions().end());
    m.aliases = {
        {"joyful", "joy"},          {"happy", "joy"},               {"happiness", "joy"},
        {"angry", "anger"},         {"rage", "anger"},              {"furious", "anger"},
        {"sad", "sadness"},         {"sorrow", "sadness"},          {"fearful", "fear"},
        {"afraid", "fear"},         {"scared", "fear"},             {"terrified", "fear"},
        {"surprised", "surprise"},  {"disgusted", "disgust"},       {"ashamed", "remorse"},
        {"shame", "remorse"},       {"guilty", "guilt"},            {"proud", "pride"},
        {"excited", "excitement"},  {"grateful", "gratitude"},      {"thankful", "gratitude"},
        {"nervous", "nervousness"}, {"anxious", "nervousness"},     {"anxiety", "nervousness"},
        {"embarrassed", "embarrassment"}, {"annoyed", "annoyance"}, {"disappointed", "disappointment"},
        {"confused", "confusion"},  {"curious", "curiosity"},       {"trusting", "trust"},
        {"anticipating", "anticipation"}, {"hopeful", "optimism"},  {"hope", "optimism"},
        {"loving", "love"},         {"caring", "caring"},           {"relieved", "relief"},
        {"admiring", "admiration"}, {"amused", "amusement"},        {"desirous", "desire"},
        {"grieving", "grief"},      {"sentimental", "love"},        {"apprehensive", "nervousness"},
    };
    m.validate();
    return m;
}

std::vector<Record> harmonize(const std::vector<Record>& records, const LabelMap& map) {
    std::set<std::string> canonical = map.canonical;
    for (const auto& [raw, canon] : map.aliases) canonical.insert(canon);

    std::set<std::string> unmapped;
    std::vector<Record> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        Record h{r.text, {}, r.dataset_id};
        for (const auto& l : r.labels) {
            if (auto it = map.aliases.find(l); it != map.aliases.end())
                h.labels.insert(it->second);
            else if (canonical.count(l))
                h.labels.insert(l);
            else
                unmapped.insert(l);
        }
        out.push_back(std::move(h));
    }
    if (!unmapped.empty()) {
        std::string names;
        for (const auto& u : unmapped) names += (names.empty() ? "" : ", ") + u;
        throw ValidationError(fmt::format("unmapped labels: {}", names));
    }
    return out;
}

std::vector<LabelGroup> group_by_label(const std::vector<Record>& records) {
    std::map<std::pair<std::string, std::string>, LabelGroup> groups;
    for (const auto& r : records) {
        for (const auto& l : r.labels) {
            auto& g = groups[{l, r.dataset_id}];
            if (g.texts.empty()) {
                g.emotion = l;
                g.dataset_id = r.dataset_id;
            }
            g.texts.push_back(r.text);
        }
    }
    std::vector<LabelGroup> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) out.push_back(std::move(g));
    return out;
}

}  // namespace emosig
