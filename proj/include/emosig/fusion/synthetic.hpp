#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "emosig/lexicon.hpp"

namespace emosig::fusion {

struct SyntheticSpec {
    std::size_t sentences = 1000;
    std::size_t label_category_words = 400;
    std::size_t distractor_category_words = 200;
    std::size_t neutral_words = 300;
    std::size_t min_content = 5;
    std::size_t max_content = 8;
    std::size_t min_fillers = 2;
    std::size_t max_fillers = 5;
    double label_share = 0.6;  // minimum fraction of content words from the label's category
    std::uint64_t seed = 2024;

    void validate() const;
};

// (label, GI category it draws from), six pairs.
const std::vector<std::pair<std::string, std::string>>& synthetic_label_categories();
const std::vector<std::string>& synthetic_distractor_categories();
const std::vector<std::string>& synthetic_fillers();

struct SyntheticRow {
    std::string text;
    std::string label;
    std::string split;  // index mod 20: 0-13 train, 14-16 validation, 17-19 test
    std::size_t content_words = 0;
    std::size_t label_words = 0;
};

struct SyntheticCorpus {
    Lexicon lexicon;
    std::vector<SyntheticRow> rows;

    std::string corpus_jsonl() const;
    std::string lexicon_json() const;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec = {});

}  // namespace emosig::fusion
