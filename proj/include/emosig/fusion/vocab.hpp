#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace emosig::fusion {

// Word-level vocabulary with reserved slots 0=[CLS], 1=[PAD], 2=[UNK].
class Vocabulary {
public:
    static constexpr std::size_t kCls = 0;
    static constexpr std::size_t kPad = 1;
    static constexpr std::size_t kUnk = 2;

    Vocabulary();

    // Words in first-seen order over the given token lists.
    static Vocabulary build(const std::vector<std::vector<std::string>>& token_lists);
    static Vocabulary from_words(const std::vector<std::string>& words);

    std::size_t size() const noexcept { return words_.size(); }
    std::size_t id(const std::string& word) const;
    const std::string& word(std::size_t id) const { return words_.at(id); }
    const std::vector<std::string>& words() const noexcept { return words_; }

    // [CLS] followed by token ids, truncated to max_seq entries in total.
    std::vector<std::size_t> encode(const std::vector<std::string>& tokens, std::size_t max_seq) const;

private:
    void add(const std::string& word);

    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace emosig::fusion
