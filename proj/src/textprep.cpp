#include "emosig/textprep.hpp"

#include <algorithm>
#include <cstdint>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig {

namespace {

bool is_ascii_punct(char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) || (u >= 123 && u <= 126);
}

bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Bytes >= 0x80 belong to non-ASCII letters for boundary purposes.
bool is_word_byte(char c) { return is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80; }

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }

std::vector<std::string_view> split_unicode_ws(std::string_view text) {
    std::vector<std::string_view> chunks;
    std::size_t i = 0, start = 0;
    while (i < text.size()) {
        if (std::size_t w = unicode_space_at(text, i)) {
            if (i > start) chunks.push_back(text.substr(start, i - start));
            i += w;
            start = i;
        } else {
            ++i;
        }
    }
    if (start < text.size()) chunks.push_back(text.substr(start));
    return chunks;
}

std::string join(const std::vector<std::string_view>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(' ');
        out.append(parts[i]);
    }
    return out;
}

std::string_view strip_punct(std::string_view s) {
    while (!s.empty() && is_ascii_punct(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ascii_punct(s.back())) s.remove_suffix(1);
    return s;
}

struct EmoticonKey {
    std::string lowered;
    const std::string* replacement;
};

std::vector<EmoticonKey> emoticon_keys(const NormalizationConfig& config) {
    std::vector<EmoticonKey> keys;
    for (const auto& [k, v] : config.emoticon_map) keys.push_back({lower_ascii(k), &v});
    std::stable_sort(keys.begin(), keys.end(),
                     [](const EmoticonKey& a, const EmoticonKey& b) { return a.lowered.size() > b.lowered.size(); });
    return keys;
}

// True when a Unicode space code point ends right before byte `i`.
bool space_before(std::string_view text, std::size_t i) {
    for (std::size_t k = 1; k <= 3 && k <= i; ++k)
        if (unicode_space_at(text, i - k) == k) return true;
    return false;
}

// Keys whose edge character is alphanumeric must not touch a word character on that side.
bool emoticon_fits(std::string_view text, std::string_view lowered_text, std::size_t pos, const std::string& key) {
    if (lowered_text.compare(pos, key.size(), key) != 0) return false;
    if (is_ascii_alnum(key.front()) && pos > 0 && is_word_byte(text[pos - 1]) && !space_before(text, pos))
        return false;
    std::size_t end = pos + key.size();
    if (is_ascii_alnum(key.back()) && end < text.size() && is_word_byte(text[end]) && !unicode_space_at(text, end))
        return false;
    return true;
}

std::string replace_emoticons(std::string_view text, const std::vector<EmoticonKey>& keys) {
    if (keys.empty()) return std::string(text);
    const std::string lowered = lower_ascii(text);
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const EmoticonKey* hit = nullptr;
        for (const auto& k : keys) {
            if (k.lowered.size() <= text.size() - i && emoticon_fits(text, lowered, i, k.lowered)) {
                hit = &k;
                break;
            }
        }
        if (hit) {
            out.push_back(' ');
            out.append(*hit->replacement);
            out.push_back(' ');
            i += hit->lowered.size();
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

void append_split_hashtag(std::string& out, std::string_view body) {
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        if (!out.empty() && out.back() != ' ') out.push_back(' ');
        out.append(word);
        out.push_back(' ');
        word.clear();
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '_') {
            flush();
            continue;
        }
        if (!word.empty()) {
            char p = word.back();
            bool boundary = (is_lower(p) && is_upper(c)) || (is_alpha(p) && is_digit(c)) ||
                            (is_digit(p) && is_alpha(c)) ||
                            (is_upper(p) && is_upper(c) && i + 1 < body.size() && is_lower(body[i + 1]));
            if (boundary) flush();
        }
        word.push_back(c);
    }
    flush();
}

bool hashtag_start_ok(std::string_view text, std::size_t i) {
    if (i == 0) return true;
    char p = text[i - 1];
    if (p == '(' || p == '[' || p == '{' || p == '"' || p == '\'') return true;
    return space_before(text, i);
}

bool is_tag_byte(std::string_view text, std::size_t i) {
    return (is_word_byte(text[i]) || text[i] == '_') && !unicode_space_at(text, i);
}

std::string handle_hashtags(std::string_view text, HashtagMode mode) {
    if (mode == HashtagMode::keep) return std::string(text);
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    std::size_t tag_end = std::string_view::npos;  // a tag directly after another one also counts
    while (i < text.size()) {
        char c = text[i];
        if (c == '#' && i + 1 < text.size() && is_tag_byte(text, i + 1) &&
            (i == tag_end || hashtag_start_ok(text, i))) {
            std::size_t j = i + 1;
            while (j < text.size() && is_tag_byte(text, j)) ++j;
            tag_end = j;
            std::string_view body = text.substr(i + 1, j - i - 1);
            // Output words are space-isolated so later steps cannot glue them to neighbours.
            out.push_back(' ');
            if (mode == HashtagMode::strip_only) {
                out.append(body);
                out.push_back(' ');
            } else {
                append_split_hashtag(out, body);
            }
            i = j;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

const std::string* slang_lookup(const std::map<std::string, std::string>& slang, std::string_view chunk) {
    if (auto it = slang.find(lower_ascii(chunk)); it != slang.end()) return &it->second;
    return nullptr;
}

std::string expand_slang(std::string_view text, const std::map<std::string, std::string>& slang) {
    if (slang.empty()) return std::string(text);
    std::vector<std::string> pieces;
    for (auto chunk : split_unicode_ws(text)) {
        if (const auto* rep = slang_lookup(slang, chunk)) {
            pieces.push_back(*rep);
            continue;
        }
        auto core = strip_punct(chunk);
        const auto* rep = core.empty() ? nullptr : slang_lookup(slang, core);
        if (!rep) {
            pieces.emplace_back(chunk);
            continue;
        }
        auto lead = static_cast<std::size_t>(core.data() - chunk.data());
        std::string piece(chunk.substr(0, lead));
        piece += ' ';
        piece += *rep;
        auto rest = chunk.substr(lead + core.size());
        // A space before '#' would turn the remainder into a hashtag on the next pass.
        if (rest.empty() || rest.front() != '#') piece += ' ';
        piece += rest;
        pieces.push_back(std::move(piece));
    }
    std::string out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i) out.push_back(' ');
        out += pieces[i];
    }
    return out;
}

bool is_placeholder(std::string_view chunk) {
    if (chunk.size() < 3 || chunk.front() != '<' || chunk.back() != '>') return false;
    return std::all_of(chunk.begin() + 1, chunk.end() - 1, [](char c) { return is_ascii_alnum(c) || c == '_'; });
}

// Suffix length of a trailing "n't" (ASCII or U+2019 apostrophe), 0 if absent.
std::size_t negation_suffix(std::string_view core) {
    auto ends_with_ci = [&](std::string_view suffix) {
        if (core.size() <= suffix.size()) return false;
        return lower_ascii(core.substr(core.size() - suffix.size())) == suffix;
    };
    if (ends_with_ci("n't")) return 3;
    if (ends_with_ci("n\xE2\x80\x99t")) return 5;
    return 0;
}

void split_core(std::string_view core, std::vector<std::string>& out) {
    std::size_t suffix = negation_suffix(core);
    if (suffix == 0) {
        out.emplace_back(core);
        return;
    }
    std::string_view stem = core.substr(0, core.size() - suffix);
    std::string_view neg = core.substr(core.size() - suffix);
    std::vector<std::string> trailing;
    while (!stem.empty() && is_ascii_punct(stem.back())) {
        trailing.emplace_back(1, stem.back());
        stem.remove_suffix(1);
    }
    if (!stem.empty()) split_core(stem, out);
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
    // Keep the casing of the source but always use the ASCII apostrophe.
    out.push_back(suffix == 3 ? std::string(neg) : std::string{neg.front(), '\'', neg.back()});
}

}  // namespace

HashtagMode parse_hashtag_mode(std::string_view name) {
    if (name == "strip_and_split") return HashtagMode::strip_and_split;
    if (name == "strip_only") return HashtagMode::strip_only;
    if (name == "keep") return HashtagMode::keep;
    throw ConfigError(fmt::format("unknown hashtag mode '{}'", name));
}

std::string_view to_string(HashtagMode mode) {
    switch (mode) {
        case HashtagMode::strip_and_split: return "strip_and_split";
        case HashtagMode::strip_only: return "strip_only";
        case HashtagMode::keep: return "keep";
    }
    return "keep";
}

std::size_t unicode_space_at(std::string_view s, std::size_t pos) {
    auto b = [&](std::size_t k) -> std::uint8_t {
        return pos + k < s.size() ? static_cast<std::uint8_t>(s[pos + k]) : 0;
    };
    std::uint8_t c = b(0);
    if (c == ' ' || (c >= 0x09 && c <= 0x0D)) return 1;
    if (c == 0xC2 && (b(1) == 0x85 || b(1) == 0xA0)) return 2;
    if (c == 0xE1 && b(1) == 0x9A && b(2) == 0x80) return 3;  // U+1680
    if (c == 0xE2 && b(1) == 0x80) {
        std::uint8_t d = b(2);
        if ((d >= 0x80 && d <= 0x8A) || d == 0xA8 || d == 0xA9 || d == 0xAF) return 3;  // U+2000..200A, 2028, 2029, 202F
    }
    if (c == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) return 3;  // U+205F
    if (c == 0xE3 && b(1) == 0x80 && b(2) == 0x80) return 3;  // U+3000
    return 0;
}

void NormalizationConfig::validate() const {
    std::map<std::string, std::string> lowered_emoticons;
    for (const auto& [k, v] : emoticon_map) {
        if (k.empty()) throw ConfigError("empty emoticon key");
        if (k.find_first_of(" \t\n\r#") != std::string::npos)
            throw ConfigError(fmt::format("emoticon key '{}' contains whitespace or '#'", k));
        if (std::none_of(k.begin(), k.end(), is_ascii_punct))
            throw ConfigError(fmt::format("emoticon key '{}' has no punctuation character", k));
        if (v.find_first_of("\t\n") != std::string::npos)
            throw ConfigError(fmt::format("emoticon replacement for '{}' contains tab or newline", k));
        if (!lowered_emoticons.emplace(lower_ascii(k), v).second)
            throw ConfigError(fmt::format("emoticon key '{}' duplicates another key up to case", k));
    }
    for (const auto& [k, v] : slang_map) {
        if (k.empty()) throw ConfigError("empty slang key");
        if (k != lower_ascii(k)) throw ConfigError(fmt::format("slang key '{}' must be lowercase", k));
        if (std::none_of(k.begin(), k.end(), is_ascii_alnum))
            throw ConfigError(fmt::format("slang key '{}' has no alphanumeric character", k));
        if (k.find_first_of(" \t\n\r") != std::string::npos)
            throw ConfigError(fmt::format("slang key '{}' contains whitespace", k));
        if (v.find_first_of("\t\n") != std::string::npos)
            throw ConfigError(fmt::format("slang expansion for '{}' contains tab or newline", k));
    }

    auto check_output = [&](std::string_view what, std::string_view key, const std::string& text) {
        const std::string lowered = lower_ascii(text);
        for (const auto& [ek, ev] : lowered_emoticons) {
            if (lowered.find(ek) != std::string::npos)
                throw ConfigError(fmt::format("{} for '{}' contains emoticon '{}'", what, key, ek));
        }
        if (text.find('#') != std::string::npos)
            throw ConfigError(fmt::format("{} for '{}' contains '#'", what, key));
        for (auto tok : split_unicode_ws(text)) {
            if (slang_map.count(lower_ascii(tok)) || slang_map.count(lower_ascii(strip_punct(tok))))
                throw ConfigError(fmt::format("{} for '{}' contains slang key '{}'", what, key, tok));
        }
    };
    for (const auto& [k, v] : emoticon_map) check_output("emoticon replacement", k, v);
    for (const auto& [k, v] : slang_map) check_output("slang expansion", k, v);
}

std::map<std::string, std::string> parse_replacement_tsv(std::string_view text, const std::string& source) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos)
            throw FormatError(source, line_no, 1, "expected 'key<TAB>replacement'");
        std::string key(line.substr(0, tab));
        if (key.empty()) throw FormatError(source, line_no, 1, "empty key");
        if (!out.emplace(key, std::string(line.substr(tab + 1))).second)
            throw FormatError(source, line_no, 1, fmt::format("duplicate key '{}'", key));
    }
    return out;
}

std::map<std::string, std::string> load_replacement_tsv(const std::filesystem::path& path) {
    return parse_replacement_tsv(read_text_file(path), path.string());
}

NormalizationConfig load_normalization(const std::filesystem::path& emoticons, const std::filesystem::path& slang,
                                       HashtagMode mode, bool lowercase) {
    NormalizationConfig cfg;
    cfg.lowercase = lowercase;
    cfg.hashtag_mode = mode;
    cfg.emoticon_map = load_replacement_tsv(emoticons);
    for (auto& [k, v] : load_replacement_tsv(slang)) cfg.slang_map.emplace(lower_ascii(k), v);
    cfg.validate();
    return cfg;
}

std::string normalize(std::string_view text, const NormalizationConfig& config) {
    std::string s = replace_emoticons(text, emoticon_keys(config));
    s = handle_hashtags(s, config.hashtag_mode);
    s = expand_slang(s, config.slang_map);
    if (config.lowercase) s = lower_ascii(s);
    return join(split_unicode_ws(s));
}

TokenizedText tokenize(std::string_view text) {
    TokenizedText out;
    out.source = std::string(text);
    for (auto chunk : split_unicode_ws(text)) {
        if (is_placeholder(chunk)) {
            out.tokens.emplace_back(chunk);
            continue;
        }
        std::vector<std::string> trailing;
        while (!chunk.empty() && is_ascii_punct(chunk.front())) {
            out.tokens.emplace_back(1, chunk.front());
            chunk.remove_prefix(1);
        }
        while (!chunk.empty() && is_ascii_punct(chunk.back())) {
            trailing.emplace_back(1, chunk.back());
            chunk.remove_suffix(1);
        }
        if (!chunk.empty()) split_core(chunk, out.tokens);
        out.tokens.insert(out.tokens.end(), trailing.rbegin(), trailing.rend());
    }
    return out;
}

bool is_punctuation_token(std::string_view token) {
    return !token.empty() && std::all_of(token.begin(), token.end(), is_ascii_punct);
}

}  // namespace emosig
