#include "emosig/fusion/synthetic.hpp"

#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "emosig/error.hpp"
#include "emosig/fusion/rng.hpp"

namespace emosig::fusion {

namespace {

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gl", "kr", "pl", "st", "tr", "sk"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ee"};

std::string pseudo_word(Rng& rng) {
    const std::size_t syllables = 2 + rng.below(2);
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
        w += kOnsets[rng.below(std::size(kOnsets))];
        w += kVowels[rng.below(std::size(kVowels))];
    }
    return w;
}

std::vector<std::string> draw_pool(std::size_t n, Rng& rng, std::set<std::string>& used) {
    std::vector<std::string> out;
    while (out.size() < n) {
        std::string w = pseudo_word(rng);
        if (used.insert(w).second) out.push_back(std::move(w));
    }
    return out;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (sentences == 0) throw ConfigError("synthetic corpus needs at least one sentence");
    if (label_category_words == 0 || distractor_category_words == 0) throw ConfigError("category pools must be non-empty");
    if (min_content == 0 || min_content > max_content) throw ConfigError("bad content word range");
    if (min_fillers > max_fillers) throw ConfigError("bad filler range");
    if (!(label_share > 0.0) || label_share > 1.0) throw ConfigError("label_share must be in (0, 1]");
}

const std::vector<std::pair<std::string, std::string>>& synthetic_label_categories() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"anger", "Hostile_GI"}, {"joy", "Pleasur_GI"},      {"sadness", "Pain_GI"},
        {"desire", "Need_GI"},   {"admiration", "Virtue_GI"}, {"excitement", "Arousal_GI"}};
    return v;
}

const std::vector<std::string>& synthetic_distractor_categories() {
    static const std::vector<std::string> v = {"Active_GI", "Strong_GI", "Iav_GI", "Object_GI"};
    return v;
}

const std::vector<std::string>& synthetic_fillers() {
    static const std::vector<std::string> v = {"the", "a",   "an",   "this", "that", "it",     "was",  "is",
                                               "we",  "they", "i",   "you",  "he",   "she",    "my",   "our",
                                               "to",  "of",  "in",   "on",   "at",   "with",   "for",  "and",
                                               "so",  "very", "just", "then", "today", "again", "there", "here"};
    return v;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::set<std::string> used(synthetic_fillers().begin(), synthetic_fillers().end());

    std::map<CategoryName, std::set<std::string>> categories;
    std::vector<std::vector<std::string>> label_pools;
    std::vector<std::string> off_label;  // distractor and neutral words
    for (const auto& [label, cat] : synthetic_label_categories()) {
        label_pools.push_back(draw_pool(spec.label_category_words, rng, used));
        categories[cat] = {label_pools.back().begin(), label_pools.back().end()};
    }
    for (const auto& cat : synthetic_distractor_categories()) {
        auto pool = draw_pool(spec.distractor_category_words, rng, used);
        categories[cat] = {pool.begin(), pool.end()};
        off_label.insert(off_label.end(), pool.begin(), pool.end());
    }
    auto neutral = draw_pool(spec.neutral_words, rng, used);
    off_label.insert(off_label.end(), neutral.begin(), neutral.end());

    SyntheticCorpus out{Lexicon(categories, default_negators(), kDefaultNegationWindow), {}};
    const auto& labels = synthetic_label_categories();
    for (std::size_t i = 0; i < spec.sentences; ++i) {
        const std::size_t li = rng.below(labels.size());
        const std::size_t content = spec.min_content + rng.below(spec.max_content - spec.min_content + 1);
        const auto from_label = static_cast<std::size_t>(std::ceil(spec.label_share * static_cast<double>(content) - 1e-9));
        // Distractors are uniform over every word outside the label's own category.
        std::vector<std::string> words;
        for (std::size_t k = 0; k < from_label; ++k) words.push_back(label_pools[li][rng.below(label_pools[li].size())]);
        for (std::size_t k = from_label; k < content; ++k) {
            const std::size_t other_label_words = (labels.size() - 1) * spec.label_category_words;
            std::size_t r = rng.below(other_label_words + off_label.size());
            if (r < other_label_words) {
                std::size_t lj = r / spec.label_category_words;
                if (lj >= li) ++lj;
                words.push_back(label_pools[lj][r % spec.label_category_words]);
            } else {
                words.push_back(off_label[r - other_label_words]);
            }
        }
        const std::size_t fillers = spec.min_fillers + rng.below(spec.max_fillers - spec.min_fillers + 1);
        for (std::size_t k = 0; k < fillers; ++k) words.push_back(synthetic_fillers()[rng.below(synthetic_fillers().size())]);
        rng.shuffle(words.begin(), words.end());

        SyntheticRow row;
        for (const auto& w : words) {
            if (!row.text.empty()) row.text += ' ';
            row.text += w;
        }
        row.text += " .";
        row.label = labels[li].first;
        const std::size_t m = i % 20;
        row.split = m < 14 ? "train" : (m < 17 ? "validation" : "test");
        row.content_words = content;
        row.label_words = from_label;
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string SyntheticCorpus::corpus_jsonl() const {
    std::string s;
    for (const auto& r : rows) {
        nlohmann::json j = {{"text", r.text}, {"labels", {r.label}}, {"split", r.split}};
        s += j.dump();
        s += '\n';
    }
    return s;
}

std::string SyntheticCorpus::lexicon_json() const { return to_canonical_json(lexicon); }

}  // namespace emosig::fusion
