#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace emosig {

// GI-style category name, e.g. "Hostile_GI". Toy lexica may use any non-empty name.
using CategoryName = std::string;

enum class LexiconFormat { json, tsv };

std::set<std::string> default_negators();
inline constexpr std::size_t kDefaultNegationWindow = 3;

// Immutable category lexicon. Categories iterate in ascending name order; that
// order defines the slot index used by token vectors and CSV columns.
class Lexicon {
public:
    // Lowercases and dedups words, then validates: non-empty category names,
    // non-empty categories, single-token words, negation_window >= 1.
    Lexicon(std::map<CategoryName, std::set<std::string>> categories,
            std::set<std::string> negators = default_negators(),
            std::size_t negation_window = kDefaultNegationWindow);

    const std::map<CategoryName, std::set<std::string>>& categories() const noexcept { return categories_; }
    const std::vector<CategoryName>& category_names() const noexcept { return names_; }
    std::size_t category_count() const noexcept { return names_.size(); }
    const std::set<std::string>& negators() const noexcept { return negators_; }
    std::size_t negation_window() const noexcept { return negation_window_; }

    std::set<CategoryName> categories_of(std::string_view word) const;

    // Slot indices (ascending) of the categories containing an already-lowercased word.
    std::span<const std::size_t> category_slots(std::string_view lowered_word) const;

    bool is_negator(std::string_view lowered_word) const;
    std::size_t max_categories_per_word() const noexcept { return max_per_word_; }

    nlohmann::json to_json() const;

    friend bool operator==(const Lexicon& a, const Lexicon& b) {
        return a.categories_ == b.categories_ && a.negators_ == b.negators_ &&
               a.negation_window_ == b.negation_window_;
    }

private:
    std::map<CategoryName, std::set<std::string>> categories_;
    std::vector<CategoryName> names_;
    std::set<std::string> negators_;
    std::size_t negation_window_;
    std::unordered_map<std::string, std::vector<std::size_t>> index_;
    std::size_t max_per_word_ = 0;
};

Lexicon load_lexicon(const std::filesystem::path& path, LexiconFormat format);

// Format by extension: ".tsv" is TSV, everything else JSON.
Lexicon load_lexicon(const std::filesystem::path& path);

Lexicon lexicon_from_json(std::string_view text, const std::string& source);

// `negators_text` is the sibling negators.txt content; defaults apply when absent.
Lexicon lexicon_from_tsv(std::string_view text, const std::string& source,
                         std::optional<std::string_view> negators_text = std::nullopt);

std::string to_canonical_json(const Lexicon& lexicon);

struct GiConversion {
    Lexicon lexicon;
    std::size_t skipped_entries = 0;  // multi-word or empty entries
};

// Converts a General Inquirer spreadsheet exported as CSV (header row "Entry,Source,
// <Category>...,Othtags,Defined"). Sense suffixes like "ABOUT#1" collapse onto the
// bare word and every marked column <C> becomes category "<C>_GI".
GiConversion convert_gi_spreadsheet(std::string_view csv, const std::string& source);

}  // namespace emosig
