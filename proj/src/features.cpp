#include "emosig/features.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"
#include "emosig/signatures.hpp"

namespace emosig {

double FeatureVector::value(const CategoryName& category) const {
    auto it = values.find(category);
    return it == values.end() ? 0.0 : it->second;
}

std::vector<std::uint8_t> TokenGIVector::effective_bits() const {
    if (!negated) return bits;
    return std::vector<std::uint8_t>(bits.size(), 0);
}

TokenizedText TextPipeline::prepare(std::string_view raw) const {
    if (normalization) return tokenize(normalize(raw, *normalization));
    return tokenize(raw);
}

FeatureVector extract_text(std::string_view raw, const Lexicon& lexicon, const TextPipeline& pipeline) {
    return extract(pipeline.prepare(raw), lexicon, pipeline.options);
}

std::vector<bool> negation_mask(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
    const std::size_t window = lexicon.negation_window();
    std::vector<bool> mask(tokens.size(), false);
    // Index of the most recent negator seen so far.
    std::size_t last_negator = 0;
    bool seen = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (seen && i - last_negator <= window) mask[i] = true;
        if (lexicon.is_negator(lower_ascii(tokens[i]))) {
            last_negator = i;
            seen = true;
        }
    }
    return mask;
}

FeatureVector extract(const TokenizedText& text, const Lexicon& lexicon, const ExtractOptions& options) {
    FeatureVector fv;
    std::size_t denom = text.tokens.size();
    if (options.content_tokens_only)
        denom = static_cast<std::size_t>(std::count_if(text.tokens.begin(), text.tokens.end(),
                                                       [](const std::string& t) { return !is_punctuation_token(t); }));
    if (denom == 0) return fv;

    const auto negated = negation_mask(text.tokens, lexicon);
    std::vector<std::size_t> counts(lexicon.category_count(), 0);
    for (std::size_t i = 0; i < text.tokens.size(); ++i) {
        if (negated[i]) continue;
        for (std::size_t slot : lexicon.category_slots(lower_ascii(text.tokens[i]))) ++counts[slot];
    }
    fv.token_count = denom;
    const auto& names = lexicon.category_names();
    for (std::size_t slot = 0; slot < counts.size(); ++slot) {
        if (counts[slot] > 0)
            fv.values.emplace(names[slot], static_cast<double>(counts[slot]) / static_cast<double>(denom));
    }
    return fv;
}

std::vector<TokenGIVector> token_vectors(const TokenizedText& text, const Lexicon& lexicon) {
    const auto negated = negation_mask(text.tokens, lexicon);
    std::vector<TokenGIVector> out;
    out.reserve(text.tokens.size());
    for (std::size_t i = 0; i < text.tokens.size(); ++i) {
        TokenGIVector v{std::vector<std::uint8_t>(lexicon.category_count(), 0), negated[i]};
        for (std::size_t slot : lexicon.category_slots(lower_ascii(text.tokens[i]))) v.bits[slot] = 1;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<CategoryName> projection_axes(const std::vector<EmotionSignature>& signatures) {
    if (signatures.empty()) throw ValidationError("signature projection needs at least one signature");
    std::set<CategoryName> axes;
    for (const auto& sig : signatures)
        for (const auto& f : sig.features) axes.insert(f.category);
    return {axes.begin(), axes.end()};
}

std::vector<double> signature_projection(const FeatureVector& fv, const std::vector<CategoryName>& axes) {
    std::vector<double> out;
    out.reserve(axes.size());
    for (const auto& c : axes) out.push_back(fv.value(c));
    return out;
}

std::vector<double> signature_projection(const FeatureVector& fv, const std::vector<EmotionSignature>& signatures) {
    return signature_projection(fv, projection_axes(signatures));
}

std::vector<double> emotion_projection(const FeatureVector& fv, const std::vector<EmotionSignature>& signatures) {
    if (signatures.empty()) throw ValidationError("emotion projection needs at least one signature");
    std::vector<double> out;
    out.reserve(signatures.size());
    for (const auto& sig : signatures) {
        double sum = 0.0;
        for (const auto& f : sig.features) sum += fv.value(f.category);
        out.push_back(sum);
    }
    return out;
}

nlohmann::json to_json(const FeatureVector& fv) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [c, v] : fv.values) j[c] = v;
    j["token_count"] = fv.token_count;
    return j;
}

FeatureVector feature_vector_from_json(const nlohmann::json& j) {
    FeatureVector fv;
    for (const auto& [k, v] : j.items()) {
        if (k == "token_count")
            fv.token_count = v.get<std::size_t>();
        else
            fv.values.emplace(k, v.get<double>());
    }
    return fv;
}

std::string feature_csv_header(const Lexicon& lexicon) {
    std::string out = "index,labels,token_count";
    for (const auto& c : lexicon.category_names()) {
        out += ',';
        out += csv_escape(c);
    }
    return out;
}

std::string feature_csv_row(std::size_t index, const std::string& labels, const FeatureVector& fv,
                            const Lexicon& lexicon) {
    std::string out = fmt::format("{},{},{}", index, csv_escape(labels), fv.token_count);
    for (const auto& c : lexicon.category_names()) {
        out += ',';
        // Shortest round-trip representation.
        out += fmt::format("{}", fv.value(c));
    }
    return out;
}

}  // namespace emosig
