#include "emosig/analysis.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <set>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig {

double jaccard_sorted(const std::vector<CategoryName>& a, const std::vector<CategoryName>& b) {
    std::vector<CategoryName> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    const std::size_t uni = a.size() + b.size() - inter.size();
    if (uni == 0) throw ValidationError("jaccard of two empty sets is undefined");
    return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

double jaccard(const EmotionSignature& a, const EmotionSignature& b) {
    if (a.features.empty() || b.features.empty())
        throw ValidationError(fmt::format("jaccard needs non-empty signatures ('{}' vs '{}')", a.emotion, b.emotion));
    return jaccard_sorted(a.category_set(), b.category_set());
}

SimilarityMatrix similarity_matrix(const std::vector<EmotionSignature>& signatures) {
    if (signatures.size() < 2) throw ValidationError("need >= 2 signatures to compare");
    std::set<std::string> names;
    for (const auto& s : signatures) {
        if (!names.insert(s.emotion).second) throw ValidationError(fmt::format("duplicate emotion '{}'", s.emotion));
        if (s.features.empty()) throw ValidationError(fmt::format("signature '{}' is empty", s.emotion));
    }
    const std::size_t n = signatures.size();
    std::vector<std::vector<CategoryName>> sets;
    sets.reserve(n);
    for (const auto& s : signatures) sets.push_back(s.category_set());

    SimilarityMatrix m;
    m.values.assign(n * n, 0.0);
    for (const auto& s : signatures) m.labels.push_back(s.emotion);
    for (std::size_t i = 0; i < n; ++i) {
        m.values[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = jaccard_sorted(sets[i], sets[j]);
            m.values[i * n + j] = v;
            m.values[j * n + i] = v;
        }
    }
    return m;
}

std::vector<PairScore> pairs(const SimilarityMatrix& m) {
    std::vector<PairScore> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) out.push_back({m.labels[i], m.labels[j], m.at(i, j)});
    return out;
}

std::string SimilarityMatrix::to_csv() const {
    std::string out = "emotion";
    for (const auto& l : labels) out += "," + csv_escape(l);
    out += "\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out += csv_escape(labels[i]);
        for (std::size_t j = 0; j < size(); ++j) out += "," + format_fixed(at(i, j), 4);
        out += "\n";
    }
    return out;
}

nlohmann::json SimilarityMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < size(); ++j) row.push_back(at(i, j));
        rows.push_back(std::move(row));
    }
    return {{"labels", labels}, {"values", rows}};
}

OverlapReport overlap_report(const std::vector<EmotionSignature>& signatures, double strong_threshold,
                             double universal_threshold) {
    const auto matrix = similarity_matrix(signatures);
    OverlapReport r;
    r.strong_threshold = strong_threshold;
    r.universal_threshold = universal_threshold;
    r.signature_count = signatures.size();

    auto all = pairs(matrix);
    r.pair_count = all.size();
    for (const auto& p : all)
        if (p.jaccard > strong_threshold) r.strong_pairs.push_back(p);
    std::stable_sort(r.strong_pairs.begin(), r.strong_pairs.end(),
                     [](const PairScore& a, const PairScore& b) { return a.jaccard > b.jaccard; });

    std::map<CategoryName, std::vector<std::string>> holders;
    for (const auto& s : signatures)
        for (const auto& c : s.category_set()) holders[c].push_back(s.emotion);
    const double n = static_cast<double>(signatures.size());
    for (const auto& [c, emotions] : holders) {
        double fraction = static_cast<double>(emotions.size()) / n;
        if (fraction > universal_threshold) r.universal_features.emplace_back(c, fraction);
        if (emotions.size() == 1) r.unique_features.emplace_back(c, emotions.front());
    }
    std::stable_sort(r.universal_features.begin(), r.universal_features.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return r;
}

nlohmann::json OverlapReport::to_json() const {
    nlohmann::json strong = nlohmann::json::array();
    for (const auto& p : strong_pairs) strong.push_back({{"a", p.first}, {"b", p.second}, {"jaccard", p.jaccard}});
    nlohmann::json universal = nlohmann::json::array();
    for (const auto& [c, f] : universal_features) universal.push_back({{"category", c}, {"fraction", f}});
    nlohmann::json unique = nlohmann::json::array();
    for (const auto& [c, e] : unique_features) unique.push_back({{"category", c}, {"emotion", e}});
    return {{"strong_threshold", strong_threshold},
            {"universal_threshold", universal_threshold},
            {"signature_count", signature_count},
            {"pair_count", pair_count},
            {"strong_pairs", strong},
            {"universal_features", universal},
            {"unique_features", unique}};
}

std::string OverlapReport::summary() const {
    std::string out = fmt::format("{} signatures, {} pairs, {} with J > {}\n", signature_count, pair_count,
                                  strong_pairs.size(), strong_threshold);
    for (const auto& p : strong_pairs) out += fmt::format("  {} ~ {}  J={:.4f}\n", p.first, p.second, p.jaccard);
    out += fmt::format("universal features (> {:.0f}% of emotions): {}\n", universal_threshold * 100,
                       universal_features.size());
    for (const auto& [c, f] : universal_features) out += fmt::format("  {}  {:.1f}%\n", c, f * 100);
    out += fmt::format("unique features: {}\n", unique_features.size());
    for (const auto& [c, e] : unique_features) out += fmt::format("  {} -> {}\n", c, e);
    return out;
}

std::string signature_plot_tsv(const std::vector<EmotionSignature>& signatures) {
    std::string out = "emotion\tcategory\trank\tweight\n";
    for (const auto& s : signatures)
        for (std::size_t i = 0; i < s.features.size(); ++i)
            out += fmt::format("{}\t{}\t{}\t{}\n", s.emotion, s.features[i].category, i + 1,
                               format_fixed(s.features[i].weight, 6));
    return out;
}

}  // namespace emosig
