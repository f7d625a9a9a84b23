#include "emosig/fusion/vocab.hpp"

#include <algorithm>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig::fusion {

Vocabulary::Vocabulary() {
    add("[CLS]");
    add("[PAD]");
    add("[UNK]");
}

void Vocabulary::add(const std::string& word) {
    if (index_.emplace(word, words_.size()).second) words_.push_back(word);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_lists) {
    Vocabulary v;
    for (const auto& tokens : token_lists)
        for (const auto& t : tokens) v.add(lower_ascii(t));
    return v;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
    if (words.size() < 3 || words[kCls] != "[CLS]" || words[kPad] != "[PAD]" || words[kUnk] != "[UNK]")
        throw ValidationError("vocabulary must start with [CLS], [PAD], [UNK]");
    Vocabulary v;
    for (std::size_t i = 3; i < words.size(); ++i) v.add(words[i]);
    if (v.size() != words.size()) throw ValidationError("vocabulary contains duplicate words");
    return v;
}

std::size_t Vocabulary::id(const std::string& word) const {
    auto it = index_.find(lower_ascii(word));
    return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const std::vector<std::string>& tokens, std::size_t max_seq) const {
    std::vector<std::size_t> ids{kCls};
    for (const auto& t : tokens) {
        if (ids.size() >= max_seq) break;
        ids.push_back(id(t));
    }
    return ids;
}

}  // namespace emosig::fusion
