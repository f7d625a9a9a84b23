#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include <json.hpp>

#include "emosig/lexicon.hpp"
#include "emosig/textprep.hpp"

namespace emosig {

struct EmotionSignature;

struct ExtractOptions {
    // Exclude punctuation-only tokens from the frequency denominator.
    bool content_tokens_only = false;
};

// Normalized per-category frequencies of one text. Only categories with a
// non-zero count are stored; absent categories read as 0.
struct FeatureVector {
    std::map<CategoryName, double> values;
    std::size_t token_count = 0;

    double value(const CategoryName& category) const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Text -> tokens -> features, with optional normalization in front.
struct TextPipeline {
    std::optional<NormalizationConfig> normalization;
    ExtractOptions options;

    TokenizedText prepare(std::string_view raw) const;
};

// One slot per lexicon category, in lexicon order.
struct TokenGIVector {
    std::vector<std::uint8_t> bits;
    bool negated = false;

    // Bits as consumed downstream: all zero when the token is negated.
    std::vector<std::uint8_t> effective_bits() const;

    friend bool operator==(const TokenGIVector&, const TokenGIVector&) = default;
};

// negated[i] is true when a negator occurs among the negation_window tokens before i.
std::vector<bool> negation_mask(const std::vector<std::string>& tokens, const Lexicon& lexicon);

FeatureVector extract(const TokenizedText& text, const Lexicon& lexicon, const ExtractOptions& options = {});

FeatureVector extract_text(std::string_view raw, const Lexicon& lexicon, const TextPipeline& pipeline = {});

std::vector<TokenGIVector> token_vectors(const TokenizedText& text, const Lexicon& lexicon);

// Sorted union of every category that appears in any signature. Throws on an empty list.
std::vector<CategoryName> projection_axes(const std::vector<EmotionSignature>& signatures);

// The sentence-level lexicon vector: fv's frequency on each projection axis.
std::vector<double> signature_projection(const FeatureVector& fv, const std::vector<EmotionSignature>& signatures);
std::vector<double> signature_projection(const FeatureVector& fv, const std::vector<CategoryName>& axes);

// Per-emotion aggregate: for each signature, the summed frequency of its categories.
std::vector<double> emotion_projection(const FeatureVector& fv, const std::vector<EmotionSignature>& signatures);

nlohmann::json to_json(const FeatureVector& fv);
FeatureVector feature_vector_from_json(const nlohmann::json& j);

// Header: "index,labels,token_count,<categories in lexicon order>".
std::string feature_csv_header(const Lexicon& lexicon);
std::string feature_csv_row(std::size_t index, const std::string& labels, const FeatureVector& fv,
                            const Lexicon& lexicon);

}  // namespace emosig
