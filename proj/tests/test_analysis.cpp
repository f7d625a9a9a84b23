#include <doctest.h>

#include "emosig/analysis.hpp"
#include "emosig/error.hpp"
#include "support.hpp"

using namespace emosig;

namespace {

EmotionSignature sig(const std::string& emotion, std::vector<std::string> cats) {
    EmotionSignature s{emotion, kConsolidated, {}, {"d"}};
    double w = 0.5;
    for (auto& c : cats) s.features.push_back({c, w -= 0.01});
    return s;
}

}  // namespace

TEST_CASE("jaccard examples") {
    CHECK(jaccard(sig("a", {"x", "y"}), sig("b", {"y", "x"})) == 1.0);
    CHECK(jaccard(sig("a", {"x"}), sig("b", {"y"})) == 0.0);
    CHECK(jaccard(sig("a", {"a", "b", "c"}), sig("b", {"b", "c", "d"})) == 0.5);
    CHECK_THROWS_AS(jaccard(sig("a", {}), sig("b", {"x"})), Error);
}

TEST_CASE("jaccard axioms on random sets") {
    fusion::Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        auto a = gen::category_set(rng, 20, 0.3);
        auto b = gen::category_set(rng, 20, 0.3);
        if (a.empty() || b.empty()) continue;
        const double ab = jaccard_sorted(a, b);
        CHECK(ab == jaccard_sorted(b, a));
        CHECK(jaccard_sorted(a, a) == 1.0);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK((ab == 1.0) == (a == b));
    }
}

TEST_CASE("pair count law") {
    for (std::size_t n = 2; n <= 30; ++n) {
        std::vector<EmotionSignature> sigs;
        for (std::size_t i = 0; i < n; ++i) sigs.push_back(sig("e" + std::to_string(i), {"c" + std::to_string(i % 3)}));
        auto m = similarity_matrix(sigs);
        CHECK(pairs(m).size() == n * (n - 1) / 2);
    }
}

TEST_CASE("similarity matrix is symmetric with unit diagonal") {
    auto m = similarity_matrix({sig("a", {"x", "y"}), sig("b", {"x", "y"}), sig("c", {"z"})});
    CHECK(m.at(0, 1) == 1.0);
    CHECK(m.at(1, 0) == 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(m.at(i, i) == 1.0);
    CHECK(m.at(0, 2) == m.at(2, 0));
    CHECK_THROWS_AS(similarity_matrix({sig("a", {"x"})}), Error);
    CHECK_THROWS_AS(similarity_matrix({sig("a", {"x"}), sig("a", {"y"})}), Error);
}

TEST_CASE("matrix csv uses four decimals") {
    auto m = similarity_matrix({sig("a", {"x", "y", "z"}), sig("b", {"x"})});
    const auto csv = m.to_csv();
    CHECK(csv.find("0.3333") != std::string::npos);
    CHECK(csv.find("0.33333") == std::string::npos);
}

TEST_CASE("overlap report on toy signatures") {
    auto r = overlap_report({sig("a", {"a", "b"}), sig("b", {"a", "b"}), sig("c", {"c"})});
    CHECK(r.pair_count == 3);
    REQUIRE(r.strong_pairs.size() == 1);
    CHECK(r.strong_pairs[0].first == "a");
    CHECK(r.strong_pairs[0].second == "b");
    REQUIRE(r.unique_features.size() == 1);
    CHECK(r.unique_features[0] == std::pair<CategoryName, std::string>{"c", "c"});
    CHECK(r.universal_features.empty());
}

TEST_CASE("unique and universal features") {
    std::vector<EmotionSignature> sigs;
    for (int i = 0; i < 10; ++i) sigs.push_back(sig("e" + std::to_string(i), {"Active_GI", "Strong_GI"}));
    sigs[0].features.push_back({"Hostile_GI", 0.1});
    sigs[0].emotion = "anger";
    sigs[9].features.pop_back();  // Strong_GI now in 9 of 10: not over 90%
    auto r = overlap_report(sigs);
    REQUIRE(r.universal_features.size() == 1);
    CHECK(r.universal_features[0].first == "Active_GI");
    REQUIRE(r.unique_features.size() == 1);
    CHECK(r.unique_features[0] == std::pair<CategoryName, std::string>{"Hostile_GI", "anger"});
}

TEST_CASE("strong threshold is strict") {
    // J = 3/4 exactly
    auto a = sig("a", {"w", "x", "y"});
    auto b = sig("b", {"w", "x", "y", "z"});
    CHECK(overlap_report({a, b}, 0.75).strong_pairs.empty());
    CHECK(overlap_report({a, b}, 0.7).strong_pairs.size() == 1);
}

TEST_CASE("plot tsv lists ranks") {
    const auto tsv = signature_plot_tsv({sig("a", {"x", "y"})});
    CHECK(tsv.find("a\tx\t1\t") != std::string::npos);
    CHECK(tsv.find("a\ty\t2\t") != std::string::npos);
}
