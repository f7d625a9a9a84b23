#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "emosig/signatures.hpp"

namespace emosig {

inline constexpr double kDefaultStrongThreshold = 0.7;
inline constexpr double kDefaultUniversalThreshold = 0.9;

// |A ∩ B| / |A ∪ B| over the signatures' category sets; weights are ignored.
double jaccard(const EmotionSignature& a, const EmotionSignature& b);

// Same coefficient over two sorted, duplicate-free category lists.
double jaccard_sorted(const std::vector<CategoryName>& a, const std::vector<CategoryName>& b);

struct SimilarityMatrix {
    std::vector<std::string> labels;
    std::vector<double> values;  // row-major, labels.size()^2

    std::size_t size() const noexcept { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }

    std::string to_csv() const;  // 4 decimal places
    nlohmann::json to_json() const;
};

struct PairScore {
    std::string first;
    std::string second;
    double jaccard;
};

// Requires >= 2 signatures with distinct emotions; keeps the input order.
SimilarityMatrix similarity_matrix(const std::vector<EmotionSignature>& signatures);

// Upper triangle, row-major: n(n-1)/2 entries.
std::vector<PairScore> pairs(const SimilarityMatrix& matrix);

struct OverlapReport {
    double strong_threshold = kDefaultStrongThreshold;
    double universal_threshold = kDefaultUniversalThreshold;
    std::size_t signature_count = 0;
    std::size_t pair_count = 0;
    std::vector<PairScore> strong_pairs;                              // J > threshold, J descending
    std::vector<std::pair<CategoryName, double>> universal_features;  // fraction > threshold
    std::vector<std::pair<CategoryName, std::string>> unique_features;

    nlohmann::json to_json() const;
    std::string summary() const;
};

OverlapReport overlap_report(const std::vector<EmotionSignature>& signatures,
                             double strong_threshold = kDefaultStrongThreshold,
                             double universal_threshold = kDefaultUniversalThreshold);

// Long-format plot data: emotion, category, rank (1-based), weight.
std::string signature_plot_tsv(const std::vector<EmotionSignature>& signatures);

}  // namespace emosig
