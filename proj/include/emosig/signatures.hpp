#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emosig/corpus.hpp"
#include "emosig/features.hpp"
#include "emosig/lexicon.hpp"

namespace emosig {

inline const std::string kConsolidated = "CONSOLIDATED";
inline constexpr double kDefaultTopFraction = 0.10;
inline constexpr double kDefaultPresenceFraction = 0.50;

struct SignatureFeature {
    CategoryName category;
    double weight;

    friend bool operator==(const SignatureFeature&, const SignatureFeature&) = default;
};

// The retained categories of one emotion, in rank order (weight descending,
// ties by ascending category name).
struct EmotionSignature {
    std::string emotion;
    std::string dataset_id;
    std::vector<SignatureFeature> features;
    std::vector<std::string> provenance;

    std::vector<CategoryName> category_set() const;  // sorted

    friend bool operator==(const EmotionSignature&, const EmotionSignature&) = default;
};

// ceil(fraction * nonzero), computed so that exact products such as 0.1 * 30 are
// not pushed over an integer by binary rounding. Never below 1 when nonzero > 0.
std::size_t retained_count(std::size_t nonzero, double fraction);

// count >= fraction * total, with the same rounding guard.
bool meets_fraction(std::size_t count, std::size_t total, double fraction);

// Orders features by weight descending, then by name.
void sort_features(std::vector<SignatureFeature>& features);

// Core builder over per-text feature vectors of one label group. Weight of a
// category is its mean frequency over all texts (texts without a match count as 0).
EmotionSignature build_signature(const std::string& emotion, const std::string& dataset_id,
                                 const std::vector<FeatureVector>& vectors, double top_fraction = kDefaultTopFraction);

EmotionSignature build_signature(const LabelGroup& group, const Lexicon& lexicon, const TextPipeline& pipeline = {},
                                 double top_fraction = kDefaultTopFraction);

// Cross-dataset consolidation: keep categories present in at least `presence` of
// the input signatures; weight is the mean over the signatures containing it.
EmotionSignature consolidate(const std::vector<EmotionSignature>& signatures,
                             double presence = kDefaultPresenceFraction);

// Alternative reading of the presence rule: candidates are the categories of the
// per-dataset signatures, kept when non-zero in at least `presence` of the
// emotion's texts pooled across datasets.
EmotionSignature consolidate_by_texts(const std::vector<EmotionSignature>& signatures,
                                      const std::vector<FeatureVector>& pooled_texts,
                                      double presence = kDefaultPresenceFraction);

// Signature JSON with weights at 6 decimal places, features in rank order.
std::string signature_to_json_text(const EmotionSignature& signature);
EmotionSignature signature_from_json(const nlohmann::json& j, const std::string& source = "signature");
EmotionSignature load_signature(const std::filesystem::path& path);

}  // namespace emosig
