#include "emosig/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig {

namespace {

constexpr double kRoundingSlack = 1e-9;

std::vector<std::string> merged_provenance(const std::vector<EmotionSignature>& signatures) {
    std::set<std::string> ids;
    for (const auto& s : signatures) {
        if (s.provenance.empty())
            ids.insert(s.dataset_id);
        else
            ids.insert(s.provenance.begin(), s.provenance.end());
    }
    return {ids.begin(), ids.end()};
}

void require_single_emotion(const std::vector<EmotionSignature>& signatures) {
    if (signatures.empty()) throw ValidationError("consolidate needs at least one signature");
    for (const auto& s : signatures) {
        if (s.emotion != signatures.front().emotion)
            throw ValidationError(fmt::format("cannot consolidate mixed emotions '{}' and '{}'",
                                              signatures.front().emotion, s.emotion));
    }
}

}  // namespace

std::vector<CategoryName> EmotionSignature::category_set() const {
    std::vector<CategoryName> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.category);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t retained_count(std::size_t nonzero, double fraction) {
    if (nonzero == 0) return 0;
    auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(nonzero) - kRoundingSlack));
    return std::clamp<std::size_t>(k, 1, nonzero);
}

bool meets_fraction(std::size_t count, std::size_t total, double fraction) {
    return static_cast<double>(count) >= fraction * static_cast<double>(total) - kRoundingSlack;
}

void sort_features(std::vector<SignatureFeature>& features) {
    std::sort(features.begin(), features.end(), [](const SignatureFeature& a, const SignatureFeature& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.category < b.category;
    });
}

EmotionSignature build_signature(const std::string& emotion, const std::string& dataset_id,
                                 const std::vector<FeatureVector>& vectors, double top_fraction) {
    if (vectors.empty())
        throw ValidationError(fmt::format("label group '{}' / '{}' is empty", emotion, dataset_id));
    std::map<CategoryName, double> sums;
    for (const auto& fv : vectors)
        for (const auto& [c, v] : fv.values) sums[c] += v;

    std::vector<SignatureFeature> ranked;
    const double n = static_cast<double>(vectors.size());
    for (const auto& [c, s] : sums) {
        double mean = s / n;
        if (mean > 0.0) ranked.push_back({c, mean});
    }
    if (ranked.empty())
        throw ValidationError(fmt::format("no signal: no text of '{}' / '{}' matches any category", emotion, dataset_id));
    sort_features(ranked);
    ranked.resize(retained_count(ranked.size(), top_fraction));
    return {emotion, dataset_id, std::move(ranked), {dataset_id}};
}

EmotionSignature build_signature(const LabelGroup& group, const Lexicon& lexicon, const TextPipeline& pipeline,
                                 double top_fraction) {
    std::vector<FeatureVector> vectors;
    vectors.reserve(group.texts.size());
    for (const auto& t : group.texts) vectors.push_back(extract_text(t, lexicon, pipeline));
    return build_signature(group.emotion, group.dataset_id, vectors, top_fraction);
}

EmotionSignature consolidate(const std::vector<EmotionSignature>& signatures, double presence) {
    require_single_emotion(signatures);
    std::map<CategoryName, std::pair<std::size_t, double>> seen;  // count, weight sum
    for (const auto& s : signatures) {
        for (const auto& f : s.features) {
            auto& [count, sum] = seen[f.category];
            ++count;
            sum += f.weight;
        }
    }
    std::vector<SignatureFeature> kept;
    for (const auto& [c, cs] : seen) {
        if (meets_fraction(cs.first, signatures.size(), presence))
            kept.push_back({c, cs.second / static_cast<double>(cs.first)});
    }
    sort_features(kept);
    return {signatures.front().emotion, kConsolidated, std::move(kept), merged_provenance(signatures)};
}

EmotionSignature consolidate_by_texts(const std::vector<EmotionSignature>& signatures,
                                      const std::vector<FeatureVector>& pooled_texts, double presence) {
    require_single_emotion(signatures);
    if (pooled_texts.empty()) throw ValidationError("text-level consolidation needs the emotion's texts");
    std::map<CategoryName, std::pair<std::size_t, double>> seen;
    for (const auto& s : signatures) {
        for (const auto& f : s.features) {
            auto& [count, sum] = seen[f.category];
            ++count;
            sum += f.weight;
        }
    }
    std::vector<SignatureFeature> kept;
    for (const auto& [c, cs] : seen) {
        std::size_t present = 0;
        for (const auto& fv : pooled_texts)
            if (fv.value(c) > 0.0) ++present;
        if (meets_fraction(present, pooled_texts.size(), presence))
            kept.push_back({c, cs.second / static_cast<double>(cs.first)});
    }
    sort_features(kept);
    return {signatures.front().emotion, kConsolidated, std::move(kept), merged_provenance(signatures)};
}

std::string signature_to_json_text(const EmotionSignature& sig) {
    auto q = [](const std::string& s) { return nlohmann::json(s).dump(); };
    std::string out = "{\n";
    out += fmt::format("  \"emotion\": {},\n", q(sig.emotion));
    out += fmt::format("  \"dataset_id\": {},\n", q(sig.dataset_id));
    out += "  \"provenance\": [";
    for (std::size_t i = 0; i < sig.provenance.size(); ++i) out += (i ? ", " : "") + q(sig.provenance[i]);
    out += "],\n  \"features\": [";
    for (std::size_t i = 0; i < sig.features.size(); ++i) {
        out += i ? ",\n" : "\n";
        out += fmt::format("    {{\"category\": {}, \"weight\": {}}}", q(sig.features[i].category),
                           format_fixed(sig.features[i].weight, 6));
    }
    out += sig.features.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

EmotionSignature signature_from_json(const nlohmann::json& j, const std::string& source) {
    try {
        EmotionSignature sig;
        sig.emotion = j.at("emotion").get<std::string>();
        sig.dataset_id = j.at("dataset_id").get<std::string>();
        if (j.contains("provenance")) sig.provenance = j["provenance"].get<std::vector<std::string>>();
        for (const auto& f : j.at("features"))
            sig.features.push_back({f.at("category").get<std::string>(), f.at("weight").get<double>()});
        if (sig.emotion.empty()) throw ValidationError(fmt::format("{}: empty emotion", source));
        return sig;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("{}: malformed signature ({})", source, e.what()));
    }
}

EmotionSignature load_signature(const std::filesystem::path& path) {
    return signature_from_json(parse_json_strict(read_text_file(path), path.string()), path.string());
}

}  // namespace emosig
