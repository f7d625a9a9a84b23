#pragma once

// Independent reference implementations and random input generators shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "emosig/features.hpp"
#include "emosig/fusion/metrics.hpp"
#include "emosig/fusion/rng.hpp"
#include "emosig/lexicon.hpp"
#include "emosig/signatures.hpp"

namespace oracle {

inline std::string lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool all_punct(const std::string& t) {
    if (t.empty()) return false;
    for (unsigned char c : t)
        if (!(c >= 33 && c <= 126) || std::isalnum(c)) return false;
    return true;
}

// Explicit tokens x categories double loop with a backwards window scan.
inline emosig::FeatureVector extract(const std::vector<std::string>& tokens, const emosig::Lexicon& lex,
                                     bool content_only = false) {
    emosig::FeatureVector fv;
    std::size_t denom = 0;
    for (const auto& t : tokens)
        if (!content_only || !all_punct(t)) ++denom;
    fv.token_count = denom;
    if (denom == 0) return fv;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        bool negated = false;
        for (std::size_t back = 1; back <= lex.negation_window() && back <= i; ++back) {
            const std::string prev = lower(tokens[i - back]);
            for (const auto& n : lex.negators())
                if (n == prev) negated = true;
        }
        if (negated) continue;
        const std::string w = lower(tokens[i]);
        for (const auto& [name, words] : lex.categories()) {
            for (const auto& entry : words)
                if (entry == w) ++counts[name];
        }
    }
    for (const auto& [name, c] : counts) fv.values[name] = static_cast<double>(c) / static_cast<double>(denom);
    return fv;
}

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Per-label 2x2 confusion tables from membership tests, then the textbook ratios.
inline emosig::fusion::EvalResult evaluate(const std::vector<std::vector<std::size_t>>& pred,
                                           const std::vector<std::vector<std::size_t>>& gold,
                                           const std::vector<std::string>& labels) {
    emosig::fusion::EvalResult r;
    double sf = 0, sp = 0, sr = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        Confusion c;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool p = std::find(pred[i].begin(), pred[i].end(), j) != pred[i].end();
            const bool g = std::find(gold[i].begin(), gold[i].end(), j) != gold[i].end();
            if (p && g) ++c.tp;
            else if (p) ++c.fp;
            else if (g) ++c.fn;
            else ++c.tn;
        }
        auto div = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
        emosig::fusion::LabelScores s;
        s.precision = div(c.tp, c.tp + c.fp);
        s.recall = div(c.tp, c.tp + c.fn);
        s.f1 = div(2 * c.tp, 2 * c.tp + c.fp + c.fn);
        r.per_label[labels[j]] = s;
        sf += s.f1;
        sp += s.precision;
        sr += s.recall;
    }
    const double L = static_cast<double>(labels.size());
    r.macro_f1 = sf / L;
    r.macro_precision = sp / L;
    r.macro_recall = sr / L;
    r.seed_stats.macro_f1 = {r.macro_f1, 0.0};
    r.seed_stats.macro_precision = {r.macro_precision, 0.0};
    r.seed_stats.macro_recall = {r.macro_recall, 0.0};
    return r;
}

// Scalar early fusion with exact GELU: e + alpha * sigmoid(wg_e*e + wg_p*p + bg) * p, p = GELU(wp*x).
inline double early_fuse_scalar(double e, double x, double wp, double wg_e, double wg_p, double bg, double alpha) {
    const double z = wp * x;
    const double p = 0.5 * z * (1.0 + std::erf(z * 0.70710678118654752440));
    const double g = 1.0 / (1.0 + std::exp(-(wg_e * e + wg_p * p + bg)));
    return e + alpha * (g * p);
}

// ceil(f * n) for f = k/10 using integers only.
inline std::size_t ceil_tenths(std::size_t n, std::size_t tenths) { return (n * tenths + 9) / 10; }

// Checks a signature against the retention law recomputed from the raw vectors:
// size == ceil(0.10 * nonzero), and every retained category outranks every
// discarded one (higher weight, or equal weight and smaller name).
inline bool retention_law_holds(const std::vector<emosig::FeatureVector>& vectors, const emosig::EmotionSignature& sig) {
    std::map<std::string, double> sums;
    for (const auto& fv : vectors)
        for (const auto& [c, v] : fv.values) sums[c] += v;
    std::map<std::string, double> weight;
    for (const auto& [c, s] : sums)
        if (s > 0) weight[c] = s / static_cast<double>(vectors.size());
    if (sig.features.size() != ceil_tenths(weight.size(), 1)) return false;
    std::set<std::string> kept;
    for (const auto& f : sig.features) {
        if (!weight.count(f.category) || weight[f.category] != f.weight) return false;
        kept.insert(f.category);
    }
    for (const auto& k : kept)
        for (const auto& [c, w] : weight) {
            if (kept.count(c)) continue;
            if (weight[k] < w || (weight[k] == w && k > c)) return false;
        }
    return true;
}

}  // namespace oracle

namespace gen {

// Random token lists over lexicon words, negators, unknown words and punctuation.
inline std::vector<std::string> tokens(emosig::fusion::Rng& rng, const emosig::Lexicon& lex, std::size_t max_len) {
    std::vector<std::string> vocab;
    for (const auto& [name, words] : lex.categories()) vocab.insert(vocab.end(), words.begin(), words.end());
    std::vector<std::string> negators(lex.negators().begin(), lex.negators().end());
    static const std::vector<std::string> other = {"zebra", "table", "the", "a", "of", "GOOD", "Bad", "walk"};
    static const std::vector<std::string> punct = {",", ".", "!", "?", "...", ";"};
    std::vector<std::string> out;
    const std::size_t n = rng.below(max_len + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        if (u < 0.55) out.push_back(vocab[rng.below(vocab.size())]);
        else if (u < 0.70) out.push_back(negators[rng.below(negators.size())]);
        else if (u < 0.85) out.push_back(other[rng.below(other.size())]);
        else out.push_back(punct[rng.below(punct.size())]);
    }
    return out;
}

inline std::vector<std::string> category_set(emosig::fusion::Rng& rng, std::size_t universe, double p) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < universe; ++i)
        if (rng.bernoulli(p)) out.push_back("C" + std::to_string(100 + i));
    return out;
}

// Feature vectors for one label group. Values come from a coarse grid so ties are common.
inline std::vector<emosig::FeatureVector> group_vectors(emosig::fusion::Rng& rng, std::size_t universe) {
    std::vector<emosig::FeatureVector> out(1 + rng.below(12));
    const double density = 0.05 + 0.5 * rng.uniform();
    for (auto& fv : out) {
        fv.token_count = 8;
        for (std::size_t c = 0; c < universe; ++c)
            if (rng.bernoulli(density)) fv.values["C" + std::to_string(100 + c)] = static_cast<double>(1 + rng.below(4)) / 8.0;
    }
    // Guarantee some signal.
    if (out[0].values.empty()) out[0].values["C100"] = 0.125;
    return out;
}

}  // namespace gen
