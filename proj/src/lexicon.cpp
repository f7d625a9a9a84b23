#include "emosig/lexicon.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig {

namespace {

bool has_space(std::string_view w) {
    return std::any_of(w.begin(), w.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

std::set<std::string> normalize_words(const std::set<std::string>& words, std::string_view what) {
    std::set<std::string> out;
    for (const auto& raw : words) {
        if (raw.empty()) throw ValidationError(fmt::format("{}: empty word", what));
        if (has_space(raw))
            throw ValidationError(fmt::format("{}: multi-word entry '{}' is not supported", what, raw));
        out.insert(lower_ascii(raw));
    }
    return out;
}

}  // namespace

std::set<std::string> default_negators() {
    return {"not", "no", "never", "none", "cannot", "n't", "without"};
}

Lexicon::Lexicon(std::map<CategoryName, std::set<std::string>> categories, std::set<std::string> negators,
                 std::size_t negation_window)
    : negation_window_(negation_window) {
    if (negation_window_ < 1) throw ValidationError("negation_window must be >= 1");
    for (auto& [name, words] : categories) {
        if (name.empty()) throw ValidationError("empty category name");
        if (words.empty()) throw ValidationError(fmt::format("category '{}' has no words", name));
        categories_.emplace(name, normalize_words(words, fmt::format("category '{}'", name)));
    }
    negators_ = normalize_words(negators, "negators");

    names_.reserve(categories_.size());
    for (const auto& [name, words] : categories_) {
        std::size_t slot = names_.size();
        names_.push_back(name);
        for (const auto& w : words) index_[w].push_back(slot);
    }
    for (const auto& [w, slots] : index_) max_per_word_ = std::max(max_per_word_, slots.size());
}

std::set<CategoryName> Lexicon::categories_of(std::string_view word) const {
    std::set<CategoryName> out;
    for (std::size_t slot : category_slots(lower_ascii(word))) out.insert(names_[slot]);
    return out;
}

std::span<const std::size_t> Lexicon::category_slots(std::string_view lowered_word) const {
    auto it = index_.find(std::string(lowered_word));
    if (it == index_.end()) return {};
    return it->second;
}

bool Lexicon::is_negator(std::string_view lowered_word) const {
    return negators_.find(std::string(lowered_word)) != negators_.end();
}

nlohmann::json Lexicon::to_json() const {
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [name, words] : categories_) cats[name] = words;
    return {{"categories", cats}, {"negators", negators_}, {"negation_window", negation_window_}};
}

Lexicon lexicon_from_json(std::string_view text, const std::string& source) {
    auto j = parse_json_strict(text, source);
    if (!j.is_object()) throw FormatError(source, 1, 1, "lexicon must be a JSON object");
    if (!j.contains("categories") || !j["categories"].is_object())
        throw ValidationError(fmt::format("{}: missing \"categories\" object", source));

    std::map<CategoryName, std::set<std::string>> categories;
    for (const auto& [name, list] : j["categories"].items()) {
        if (!list.is_array())
            throw ValidationError(fmt::format("{}: category '{}' must be an array of strings", source, name));
        std::set<std::string> words;
        for (const auto& w : list) {
            if (!w.is_string())
                throw ValidationError(fmt::format("{}: category '{}' has a non-string entry", source, name));
            words.insert(w.get<std::string>());
        }
        categories.emplace(name, std::move(words));
    }

    std::set<std::string> negators = default_negators();
    if (j.contains("negators")) {
        negators.clear();
        for (const auto& w : j["negators"]) {
            if (!w.is_string()) throw ValidationError(fmt::format("{}: negators must be strings", source));
            negators.insert(w.get<std::string>());
        }
    }
    std::size_t window = kDefaultNegationWindow;
    if (j.contains("negation_window")) {
        const auto& w = j["negation_window"];
        if (!w.is_number_integer() || w.get<long long>() < 1)
            throw ValidationError(fmt::format("{}: negation_window must be a positive integer", source));
        window = w.get<std::size_t>();
    }
    try {
        return Lexicon(std::move(categories), std::move(negators), window);
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", source, e.what()));
    }
}

Lexicon lexicon_from_tsv(std::string_view text, const std::string& source,
                         std::optional<std::string_view> negators_text) {
    std::map<CategoryName, std::set<std::string>> categories;
    std::size_t line_no = 0;
    for (const auto& raw_line : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw_line;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') continue;
        auto cols = split(line, '\t');
        if (cols.size() != 2)
            throw FormatError(source, line_no, 1, fmt::format("expected 2 tab-separated fields, got {}", cols.size()));
        auto word = trim(cols[0]);
        auto cat = trim(cols[1]);
        if (cat.empty()) throw ValidationError(fmt::format("{}:{}: empty category field", source, line_no));
        if (word.empty()) throw ValidationError(fmt::format("{}:{}: empty word field", source, line_no));
        categories[std::string(cat)].insert(std::string(word));
    }

    std::set<std::string> negators = default_negators();
    if (negators_text) {
        negators.clear();
        for (const auto& l : split(*negators_text, '\n')) {
            auto w = trim(l);
            if (!w.empty() && w.front() != '#') negators.insert(std::string(w));
        }
    }
    try {
        return Lexicon(std::move(categories), std::move(negators), kDefaultNegationWindow);
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", source, e.what()));
    }
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconFormat format) {
    const std::string text = read_text_file(path);
    if (format == LexiconFormat::json) return lexicon_from_json(text, path.string());

    auto neg_path = path.parent_path() / "negators.txt";
    if (std::filesystem::exists(neg_path)) {
        const std::string neg = read_text_file(neg_path);
        return lexicon_from_tsv(text, path.string(), std::string_view(neg));
    }
    return lexicon_from_tsv(text, path.string());
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    return load_lexicon(path, path.extension() == ".tsv" ? LexiconFormat::tsv : LexiconFormat::json);
}

std::string to_canonical_json(const Lexicon& lexicon) { return dump_canonical(lexicon.to_json()); }

GiConversion convert_gi_spreadsheet(std::string_view csv, const std::string& source) {
    auto rows = parse_csv(csv, source);
    if (rows.empty()) throw FormatError(source, 1, 1, "empty spreadsheet");
    const auto& header = rows.front().fields;
    if (header.empty() || trim(header[0]) != "Entry")
        throw FormatError(source, rows.front().line, 1, "first column must be 'Entry'");

    static const std::set<std::string> kNonCategory = {"Entry", "Source", "Othtags", "Defined"};
    std::map<CategoryName, std::set<std::string>> categories;
    std::size_t skipped = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& fields = rows[r].fields;
        std::string entry(trim(fields.empty() ? std::string_view{} : std::string_view(fields[0])));
        if (auto hash = entry.find('#'); hash != std::string::npos) entry.erase(hash);
        if (entry.empty() || has_space(entry)) {
            ++skipped;
            continue;
        }
        entry = lower_ascii(entry);
        for (std::size_t c = 1; c < fields.size() && c < header.size(); ++c) {
            std::string col(trim(header[c]));
            if (col.empty() || kNonCategory.count(col) || trim(fields[c]).empty()) continue;
            categories[col + "_GI"].insert(entry);
        }
    }
    if (categories.empty()) throw ValidationError(fmt::format("{}: no category assignments found", source));
    return {Lexicon(std::move(categories)), skipped};
}

}  // namespace emosig
