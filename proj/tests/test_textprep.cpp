#include <doctest.h>

#include <filesystem>

#include "emosig/error.hpp"
#include "emosig/fusion/rng.hpp"
#include "emosig/textprep.hpp"

using namespace emosig;

namespace {

NormalizationConfig bundled() {
    const std::filesystem::path res(EMOSIG_RESOURCE_DIR);
    return load_normalization(res / "emoticons.tsv", res / "slang.tsv");
}

std::string random_text(fusion::Rng& rng) {
    static const std::vector<std::string> pieces = {
        "#", "Best", "Day", "Ever", ":)", ":", ")", "(", ":-(", "XD", "<3", "idk", "IDK", "tbh", "u", "r",
        "lol", " ", " ", " ", "\t", "\n", "\xC2\xA0", "\xE2\x80\x83", "don't", "n't", "A", "b", "7", "_",
        "<", ">", "smile", "<smile>", "'", ".", ",", "!", "?", "#HashTag2024", "caf\xC3\xA9", "^_^", "=)"};
    std::string s;
    const std::size_t n = rng.below(16);
    for (std::size_t i = 0; i < n; ++i) s += pieces[rng.below(pieces.size())];
    return s;
}

}  // namespace

TEST_CASE("normalize examples") {
    NormalizationConfig cfg;
    cfg.emoticon_map = {{":)", "<smile>"}};
    CHECK(normalize("LOVE This #BestDayEver :)", cfg) == "love this best day ever <smile>");
    CHECK(normalize("", cfg).empty());

    NormalizationConfig slang;
    slang.slang_map = {{"idk", "i do not know"}, {"tbh", "to be honest"}};
    CHECK(normalize("idk tbh", slang) == "i do not know to be honest");
}

TEST_CASE("hashtag modes") {
    NormalizationConfig cfg;
    cfg.hashtag_mode = HashtagMode::strip_only;
    CHECK(normalize("#BestDayEver", cfg) == "bestdayever");
    cfg.hashtag_mode = HashtagMode::keep;
    CHECK(normalize("#BestDayEver", cfg) == "#bestdayever");
    cfg.hashtag_mode = HashtagMode::strip_and_split;
    CHECK(normalize("#Top10Songs", cfg) == "top 10 songs");
    CHECK(parse_hashtag_mode("strip_only") == HashtagMode::strip_only);
    CHECK_THROWS_AS(parse_hashtag_mode("split"), ConfigError);
}

TEST_CASE("config validation rejects unstable rules") {
    NormalizationConfig cfg;
    cfg.slang_map = {{"u", "you u"}};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    NormalizationConfig tab;
    tab.slang_map = {{"x", "a\tb"}};
    CHECK_THROWS_AS(tab.validate(), ConfigError);
    NormalizationConfig empty;
    empty.emoticon_map = {{"", "<x>"}};
    CHECK_THROWS_AS(empty.validate(), ConfigError);
}

TEST_CASE("normalize is idempotent on random strings") {
    const auto cfg = bundled();
    fusion::Rng rng(7);
    for (int i = 0; i < 1500; ++i) {
        const std::string x = random_text(rng);
        const std::string once = normalize(x, cfg);
        INFO("input: " << x);
        CHECK(normalize(once, cfg) == once);
    }
}

TEST_CASE("tokenize examples") {
    CHECK(tokenize("good, bad!").tokens == std::vector<std::string>{"good", ",", "bad", "!"});
    CHECK(tokenize("don't stop").tokens == std::vector<std::string>{"do", "n't", "stop"});
    CHECK(tokenize("   ").tokens.empty());
    CHECK(tokenize("hi <smile> (ok)").tokens == std::vector<std::string>{"hi", "<smile>", "(", "ok", ")"});
    CHECK(tokenize("a\xC2\xA0" "b").tokens == std::vector<std::string>{"a", "b"});
}

TEST_CASE("tokenize reaches a fixpoint on rejoined tokens") {
    fusion::Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto first = tokenize(random_text(rng)).tokens;
        std::string joined;
        for (const auto& t : first) joined += t + " ";
        CHECK(tokenize(joined).tokens == first);
    }
}

TEST_CASE("punctuation tokens") {
    CHECK(is_punctuation_token("..."));
    CHECK(is_punctuation_token("!?"));
    CHECK_FALSE(is_punctuation_token("n't"));
    CHECK_FALSE(is_punctuation_token(""));
    CHECK_FALSE(is_punctuation_token("<smile>x"));
}
