#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace emosig {

enum class HashtagMode { strip_and_split, strip_only, keep };

HashtagMode parse_hashtag_mode(std::string_view name);
std::string_view to_string(HashtagMode mode);

// Social-media text normalization settings. Emoticon and slang keys are matched
// case-insensitively; slang keys are stored lowercased.
struct NormalizationConfig {
    bool lowercase = true;
    HashtagMode hashtag_mode = HashtagMode::strip_and_split;
    std::map<std::string, std::string> emoticon_map;
    std::map<std::string, std::string> slang_map;

    // Rejects empty keys, tab/newline in expansions, and replacements that would
    // re-trigger a rule on a second pass (which would break idempotency).
    void validate() const;
};

// Reads `key<TAB>replacement` lines. Blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_replacement_tsv(std::string_view text, const std::string& source);
std::map<std::string, std::string> load_replacement_tsv(const std::filesystem::path& path);

// Loads emoticons.tsv and slang.tsv from a resource directory and validates.
NormalizationConfig load_normalization(const std::filesystem::path& emoticons, const std::filesystem::path& slang,
                                       HashtagMode mode = HashtagMode::strip_and_split, bool lowercase = true);

// Applies emoticon replacement (longest match first), hashtag handling, whole-token
// slang expansion and lowercasing, in that order, then collapses whitespace.
// normalize(normalize(x)) == normalize(x) for any validated config.
std::string normalize(std::string_view text, const NormalizationConfig& config);

struct TokenizedText {
    std::vector<std::string> tokens;
    std::string source;
};

// Splits on Unicode whitespace, peels leading/trailing ASCII punctuation into one
// token per character, and splits a trailing "n't" into its own token.
// Placeholders such as "<smile>" stay whole.
TokenizedText tokenize(std::string_view text);

// True when the token consists only of ASCII punctuation.
bool is_punctuation_token(std::string_view token);

// Byte length of the Unicode whitespace code point at `pos`, or 0 if none.
std::size_t unicode_space_at(std::string_view text, std::size_t pos);

}  // namespace emosig
