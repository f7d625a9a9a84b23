// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emosig/analysis.hpp"
#include "emosig/corpus.hpp"
#include "emosig/features.hpp"
#include "emosig/fusion/gradcheck.hpp"
#include "emosig/fusion/model.hpp"
#include "emosig/fusion/train.hpp"
#include "emosig/fusion/train_config.hpp"
#include "emosig/io_util.hpp"
#include "emosig/signatures.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace emosig;
using namespace emosig::fusion;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path kResources(EMOSIG_RESOURCE_DIR);

Outcome extract_oracle() {
    const auto lex = load_lexicon(kResources / "sample_lexicon.json");
    const auto t0 = Clock::now();
    Rng rng(2001);
    std::size_t mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const auto tokens = gen::tokens(rng, lex, 30);
        const bool content = (i % 2) == 1;
        if (!(extract({tokens, ""}, lex, {content}) == oracle::extract(tokens, lex, content))) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {lex.category_count() == 10 && mismatches == 0 && secs < 5.0,
            fmt::format("200 inputs, {} categories, {} mismatches, {:.3f}s (limit 5s)", lex.category_count(),
                        mismatches, secs)};
}

Outcome negation_rule() {
    const Lexicon lex({{"Positiv", {"good"}}, {"Negativ", {"bad"}}}, {"not"}, 3);
    const auto a = extract_text("not good day", lex);
    const auto b = extract_text("good not bad", lex);
    const bool ok = a.value("Positiv") == 0.0 && b.value("Positiv") == 1.0 / 3.0 && b.value("Negativ") == 0.0;
    return {ok, fmt::format("'not good day' Positiv={}; 'good not bad' Positiv={} Negativ={}", a.value("Positiv"),
                            b.value("Positiv"), b.value("Negativ"))};
}

Outcome retention_law() {
    Rng rng(2003);
    std::size_t bad = 0;
    for (int i = 0; i < 100; ++i) {
        const auto vectors = gen::group_vectors(rng, 80);
        if (!oracle::retention_law_holds(vectors, build_signature("e", "d", vectors))) ++bad;
    }
    return {bad == 0, fmt::format("100 random groups, {} violations", bad)};
}

std::vector<EmotionSignature> thirty_signatures(Rng& rng) {
    std::vector<EmotionSignature> sigs;
    for (const auto& emotion : default_canonical_emotions()) {
        EmotionSignature s{emotion, kConsolidated, {}, {"d"}};
        auto cats = gen::category_set(rng, 12, 0.4);
        if (cats.empty()) cats.push_back("C100");
        for (const auto& c : cats) s.features.push_back({c, 0.1});
        sigs.push_back(std::move(s));
    }
    return sigs;
}

Outcome pair_count() {
    Rng rng(2004);
    const auto sigs = thirty_signatures(rng);
    const auto ps = pairs(similarity_matrix(sigs));
    std::set<std::pair<std::string, std::string>> distinct;
    for (const auto& p : ps) distinct.insert(std::minmax(p.first, p.second));
    const auto report = overlap_report(sigs);
    return {sigs.size() == 30 && ps.size() == 435 && distinct.size() == 435 && report.pair_count == 435,
            fmt::format("{} signatures -> {} pairs ({} distinct)", sigs.size(), ps.size(), distinct.size())};
}

Outcome jaccard_axioms() {
    Rng rng(2005);
    std::size_t bad = 0, checked = 0;
    auto as_sig = [](const std::string& e, const std::vector<std::string>& cats) {
        EmotionSignature s{e, "d", {}, {"d"}};
        for (const auto& c : cats) s.features.push_back({c, 0.1});
        return s;
    };
    while (checked < 1000) {
        const auto a = gen::category_set(rng, 15, rng.uniform());
        const auto b = rng.bernoulli(0.1) ? a : gen::category_set(rng, 15, rng.uniform());
        if (a.empty() || b.empty()) continue;
        ++checked;
        const auto sa = as_sig("a", a), sb = as_sig("b", b);
        const double ab = jaccard(sa, sb);
        const bool ok = ab == jaccard(sb, sa) && jaccard(sa, sa) == 1.0 && ab >= 0.0 && ab <= 1.0 &&
                        ((ab == 1.0) == (a == b));
        if (!ok) ++bad;
    }
    return {bad == 0, fmt::format("{} random pairs, {} violations", checked, bad)};
}

Outcome presence_boundary() {
    std::size_t bad = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        const std::size_t half_up = (n + 1) / 2;  // smallest count >= n/2
        std::vector<EmotionSignature> sigs;
        for (std::size_t i = 0; i < n; ++i) {
            EmotionSignature s{"joy", "d" + std::to_string(i), {{"Always", 0.3}}, {"d" + std::to_string(i)}};
            if (i < half_up) s.features.push_back({"Keep", 0.2});
            if (half_up > 0 && i + 1 < half_up) s.features.push_back({"Drop", 0.1});
            sigs.push_back(std::move(s));
        }
        const auto cats = consolidate(sigs).category_set();
        const bool keep = std::count(cats.begin(), cats.end(), "Keep") == 1;
        const bool drop = std::count(cats.begin(), cats.end(), "Drop") == 0;
        // With an even count, "Keep" sits exactly on one half.
        if (!keep || !drop) ++bad;
    }
    EmotionSignature a{"joy", "a", {{"X", 0.1}, {"Y", 0.1}}, {"a"}}, b{"joy", "b", {{"X", 0.1}}, {"b"}},
        c{"joy", "c", {{"Z", 0.1}}, {"c"}}, d{"joy", "d", {{"W", 0.1}}, {"d"}};
    const auto four = consolidate({a, b, c, d}).category_set();
    const bool example = four == std::vector<std::string>{"X"};
    return {bad == 0 && example,
            fmt::format("2 of 4 kept, 1 of 4 dropped: {}; sweep n=1..12 violations {}", example ? "yes" : "no", bad)};
}

Outcome fusion_identity() {
    Rng rng(2007);
    std::size_t bad = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t d = 1 + rng.below(16), gi = 1 + rng.below(10), n = 1 + rng.below(12);
        Rng init(rng.next());
        auto layer = init_early_fusion(gi, d, init);
        Matrix e(n, d), x(n, gi);
        for (Eigen::Index k = 0; k < e.size(); ++k) e.data()[k] = 3.0 * rng.normal();
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        for (Eigen::Index k = 0; k < layer.gate_bias.value.size(); ++k) layer.gate_bias.value.data()[k] = rng.normal();
        if (!(early_fuse(e, x, layer) == e)) ++bad;  // alpha == 0 at init
        layer.alpha.value(0, 0) = rng.normal() * 5.0;
        if (!(early_fuse(e, Matrix::Zero(n, gi), layer) == e)) ++bad;
        Matrix partial = x;
        const auto zero_row = static_cast<Eigen::Index>(rng.below(n));
        partial.row(zero_row).setZero();
        if (!(early_fuse(e, partial, layer).row(zero_row) == e.row(zero_row))) ++bad;
    }

    ToyEncoderConfig cfg;
    cfg.embed_dim = 16;
    cfg.ffn_dim = 32;
    cfg.seed = 9;
    const auto vocab = Vocabulary::build({{"a", "b", "c", "d"}});
    auto base = init_model(ModelKind::baseline, cfg, vocab, {"x", "y"}, {"G0", "G1", "G2"}, {}, 0.2);
    auto fused = init_model(ModelKind::early_fusion, cfg, vocab, {"x", "y"}, {"G0", "G1", "G2"}, {}, 0.3);
    std::size_t model_bad = 0;
    for (int i = 0; i < 20; ++i) {
        ModelInput in;
        in.token_ids = {Vocabulary::kCls};
        for (std::size_t k = 0; k < 1 + rng.below(8); ++k) in.token_ids.push_back(3 + rng.below(4));
        in.gi = Matrix::Zero(static_cast<Eigen::Index>(in.token_ids.size()), 3);
        for (Eigen::Index r = 1; r < in.gi.rows(); ++r)
            for (Eigen::Index c = 0; c < 3; ++c) in.gi(r, c) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        Tape t1, t2;
        auto a = forward(t1, base, in, false, nullptr);
        auto b = forward(t2, fused, in, false, nullptr);
        if (!(b.fused.value() == b.embeddings.value()) || !(a.logits.value() == b.logits.value())) ++model_bad;
    }
    return {bad == 0 && model_bad == 0,
            fmt::format("layer cases with differences {}; model forward mismatches {}", bad, model_bad)};
}

Outcome gradient_check() {
    const auto t0 = Clock::now();
    GradCheckSetup setup;
    const auto ef = grad_check_draws(ModelKind::early_fusion, setup, 20, 42);
    const auto le = grad_check_draws(ModelKind::lex_enhance, setup, 20, 42);
    const double secs = seconds_since(t0);
    return {ef.max_rel_error < 1e-4 && le.max_rel_error < 1e-4 && secs < 30.0,
            fmt::format("20 draws each: early_fusion {:.3e}, lex_enhance {:.3e} (limit 1e-4), {:.1f}s (limit 30s)",
                        ef.max_rel_error, le.max_rel_error, secs)};
}

struct SyntheticSetup {
    RunConfig run;
    PreparedCorpus data;
};

SyntheticSetup synthetic_setup() {
    auto run = load_run_config(kResources / "synthetic" / "run.toml");
    const auto lexicon = load_lexicon(run.lexicon);
    auto data = prepare_corpus(load_split_corpus(run.corpus), lexicon, run.pipeline(), run.train);
    return {std::move(run), std::move(data)};
}

Outcome synthetic_improvement() {
    const auto t0 = Clock::now();
    const auto s = synthetic_setup();
    std::map<ModelKind, double> f1;
    for (auto kind : {ModelKind::baseline, ModelKind::lex_enhance, ModelKind::early_fusion})
        f1[kind] = train(kind, s.data, s.run.train).result.seed_stats.macro_f1.mean;
    const double secs = seconds_since(t0);
    const double base = f1[ModelKind::baseline], lex = f1[ModelKind::lex_enhance], ef = f1[ModelKind::early_fusion];
    const bool seeds_ok = s.run.train.seeds == std::vector<std::uint64_t>{1, 2, 10, 21, 42};
    return {seeds_ok && lex >= base + 0.02 && ef >= base && secs < 300.0,
            fmt::format("mean macro-F1 baseline {:.4f}, lex_enhance {:.4f} (need >= {:.4f}), early_fusion {:.4f} "
                        "(need >= {:.4f}), {:.0f}s (limit 300s)",
                        base, lex, base + 0.02, ef, base, secs)};
}

Outcome metrics_oracle() {
    Rng rng(2010);
    std::size_t bad = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t L = 1 + rng.below(8), n = rng.below(40);
        std::vector<std::string> labels;
        for (std::size_t j = 0; j < L; ++j) labels.push_back("l" + std::to_string(j));
        std::vector<std::vector<std::size_t>> gold(n), pred(n);
        const double pg = rng.uniform(), pp = rng.uniform();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < L; ++j) {
                if (rng.bernoulli(pg)) gold[r].push_back(j);
                if (rng.bernoulli(pp)) pred[r].push_back(j);
            }
        if (!(evaluate_sets(pred, gold, labels) == oracle::evaluate(pred, gold, labels))) ++bad;
    }
    const auto worked = evaluate_sets({{0}, {0}, {}}, {{0}, {}, {1}}, {"A", "B"});
    const bool example = std::abs(worked.macro_f1 - 1.0 / 3.0) < 1e-15;
    return {bad == 0 && example, fmt::format("500 random cases, {} mismatches; worked example macro-F1 {:.17g}", bad,
                                             worked.macro_f1)};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + EMOSIG_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = read_text_file(entry.path());
    return files;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "emosig_acceptance_determinism";
    fs::remove_all(root);
    const std::string res = kResources.string();
    const std::string manifests = res + "/demo/tweets.manifest.json " + res + "/demo/sentences.manifest.json";

    // compare reads signatures produced once up front
    const fs::path sig_input = root / "signature_input";
    if (run_cli("--out " + sig_input.string() + " signatures " + manifests) != 0)
        return {false, "could not produce signatures for compare"};

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"extract", "extract " + manifests},
        {"signatures", "signatures " + manifests},
        {"compare", "compare " + sig_input.string()},
        {"train", "--seed 1 train --max-epochs 2"},
        {"gradcheck", "gradcheck --draws 3"},
        {"synth", "synth"},
        {"convert-gi", "convert-gi " + res + "/demo/gi_sample.csv"},
    };
    std::vector<std::string> failures;
    std::size_t files = 0;
    for (const auto& [name, args] : commands) {
        const fs::path out = root / name;
        const int first = run_cli("--out " + out.string() + " " + args);
        const auto a = fs::exists(out) ? snapshot(out) : std::map<std::string, std::string>{};
        fs::remove_all(out);
        const int second = run_cli("--out " + out.string() + " " + args);
        const auto b = fs::exists(out) ? snapshot(out) : std::map<std::string, std::string>{};
        files += a.size();
        if (first != 0 || second != 0 || a.empty() || a != b) failures.push_back(name);
    }

    // library training twice with a fixed seed
    auto s = synthetic_setup();
    s.run.train.seeds = {1};
    s.run.train.max_epochs = 3;
    std::size_t train_mismatch = 0;
    for (auto kind : {ModelKind::baseline, ModelKind::lex_enhance, ModelKind::early_fusion}) {
        const auto a = train(kind, s.data, s.run.train);
        const auto b = train(kind, s.data, s.run.train);
        if (!(a.result == b.result) || a.curve_csv() != b.curve_csv()) ++train_mismatch;
    }
    fs::remove_all(root);

    std::string failed;
    for (const auto& f : failures) failed += (failed.empty() ? "" : ",") + f;
    return {failures.empty() && train_mismatch == 0,
            fmt::format("{} commands, {} files byte-identical across reruns{}; library EvalResult mismatches {}",
                        commands.size(), files, failed.empty() ? "" : " except " + failed, train_mismatch)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"feature extraction oracle", extract_oracle},
        {"negation rule", negation_rule},
        {"retention law", retention_law},
        {"pair count", pair_count},
        {"jaccard axioms", jaccard_axioms},
        {"presence boundary", presence_boundary},
        {"fusion identity", fusion_identity},
        {"gradient check", gradient_check},
        {"synthetic improvement", synthetic_improvement},
        {"metrics oracle", metrics_oracle},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
