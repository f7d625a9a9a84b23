#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "emosig/analysis.hpp"
#include "emosig/corpus.hpp"
#include "emosig/error.hpp"
#include "emosig/features.hpp"
#include "emosig/io_util.hpp"
#include "emosig/lexicon.hpp"
#include "emosig/signatures.hpp"
#include "emosig/textprep.hpp"
#include "emosig/fusion/checkpoint.hpp"
#include "emosig/fusion/gradcheck.hpp"
#include "emosig/fusion/synthetic.hpp"
#include "emosig/fusion/train.hpp"
#include "emosig/fusion/train_config.hpp"

namespace fs = std::filesystem;

namespace emosig::cli {

namespace {

constexpr double kGradCheckTolerance = 1e-4;

struct Globals {
    std::string lexicon;
    std::string out = "emosig_out";
    std::optional<std::uint64_t> seed;
    std::string resources;
};

struct NormalizationFlags {
    bool disabled = false;
    std::string emoticons;
    std::string slang;
    std::string hashtag_mode = "strip_and_split";
};

struct Thresholds {
    double top_decile = kDefaultTopFraction;
    double presence = kDefaultPresenceFraction;
    double strong = kDefaultStrongThreshold;
    double universal = kDefaultUniversalThreshold;

    void validate() const {
        for (auto [name, v] : {std::pair{"top-decile", top_decile}, std::pair{"presence", presence},
                               std::pair{"strong", strong}, std::pair{"universal", universal}}) {
            if (!(v > 0.0 && v <= 1.0)) throw ConfigError(fmt::format("--{} must be in (0, 1], got {}", name, v));
        }
    }
    nlohmann::json to_json() const {
        return {{"top_decile", top_decile}, {"presence", presence}, {"strong_jaccard", strong}, {"universal", universal}};
    }
};

std::string resource_dir(const Globals& g) {
    if (!g.resources.empty()) return g.resources;
    if (const char* env = std::getenv("EMOSIG_RESOURCES"); env && *env) return env;
    return EMOSIG_DEFAULT_RESOURCE_DIR;
}

std::string lexicon_path(const Globals& g) {
    return g.lexicon.empty() ? (fs::path(resource_dir(g)) / "sample_lexicon.json").string() : g.lexicon;
}

// Any failure to obtain the lexicon is a configuration problem.
Lexicon open_lexicon(const std::string& path) {
    try {
        return load_lexicon(path);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(fmt::format("cannot load lexicon {}: {}", path, e.what()));
    }
}

TextPipeline make_pipeline(const Globals& g, const NormalizationFlags& nf, bool content_only) {
    TextPipeline p;
    p.options.content_tokens_only = content_only;
    if (nf.disabled) return p;
    const fs::path res(resource_dir(g));
    const std::string emo = nf.emoticons.empty() ? (res / "emoticons.tsv").string() : nf.emoticons;
    const std::string slang = nf.slang.empty() ? (res / "slang.tsv").string() : nf.slang;
    try {
        p.normalization = load_normalization(emo, slang, parse_hashtag_mode(nf.hashtag_mode));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return p;
}

nlohmann::json normalization_json(const Globals& g, const NormalizationFlags& nf) {
    if (nf.disabled) return nullptr;
    const fs::path res(resource_dir(g));
    return {{"emoticons", nf.emoticons.empty() ? (res / "emoticons.tsv").string() : nf.emoticons},
            {"slang", nf.slang.empty() ? (res / "slang.tsv").string() : nf.slang},
            {"hashtag_mode", nf.hashtag_mode}};
}

LabelMap open_label_map(const std::string& path) {
    if (path.empty()) return default_label_map();
    try {
        return load_label_map(path);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(fmt::format("cannot load label map {}: {}", path, e.what()));
    }
}

std::vector<DatasetManifest> open_manifests(const std::vector<std::string>& paths) {
    std::vector<DatasetManifest> out;
    for (const auto& p : paths) {
        try {
            out.push_back(load_dataset_manifest(p));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(fmt::format("cannot load dataset manifest {}: {}", p, e.what()));
        }
    }
    return out;
}

void write_out(const fs::path& path, const std::string& content) {
    write_text_file(path, content);
    fmt::print(stderr, "wrote {}\n", path.string());
}

void write_run_manifest(const Globals& g, const std::string& command, const std::vector<std::string>& datasets,
                        const std::string& label_map, const Thresholds& th, const nlohmann::json& normalization) {
    nlohmann::json m = {{"command", command},
                        {"lexicon", lexicon_path(g)},
                        {"datasets", datasets},
                        {"label_map", label_map.empty() ? nlohmann::json("default") : nlohmann::json(label_map)},
                        {"output_dir", g.out},
                        {"thresholds", th.to_json()},
                        {"normalization", normalization}};
    write_out(fs::path(g.out) / "run_manifest.json", dump_canonical(m));
}

struct Dataset {
    DatasetManifest manifest;
    std::vector<Record> records;
};

std::vector<Dataset> ingest_all(const Globals& g, const std::vector<std::string>& manifest_paths, const LabelMap& map) {
    std::vector<Dataset> out;
    for (auto& m : open_manifests(manifest_paths)) {
        auto result = ingest(m.path, m);
        write_out(fs::path(g.out) / "ingest" / (m.id + ".json"), dump_canonical(result.report.to_json()));
        if (!result.report.skipped.empty())
            fmt::print(stderr, "{}: skipped {} of {} rows\n", m.id, result.report.skipped.size(),
                       result.report.rows_seen);
        out.push_back({m, harmonize(result.records, map)});
    }
    return out;
}

std::string join_labels(const std::set<std::string>& labels) {
    std::string s;
    for (const auto& l : labels) {
        if (!s.empty()) s += ';';
        s += l;
    }
    return s;
}

int cmd_extract(const Globals& g, const std::vector<std::string>& manifests, const std::string& label_map_path,
                const NormalizationFlags& nf, bool content_only) {
    const Lexicon lex = open_lexicon(lexicon_path(g));
    const TextPipeline pipeline = make_pipeline(g, nf, content_only);
    const LabelMap map = open_label_map(label_map_path);
    write_run_manifest(g, "extract", manifests, label_map_path, Thresholds{}, normalization_json(g, nf));
    for (const auto& ds : ingest_all(g, manifests, map)) {
        std::string csv = feature_csv_header(lex) + "\n";
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            const auto& r = ds.records[i];
            const FeatureVector fv = extract_text(r.text, lex, pipeline);
            csv += feature_csv_row(i, join_labels(r.labels), fv, lex) + "\n";
            rows.push_back({{"index", i}, {"labels", r.labels}, {"features", to_json(fv)}});
        }
        write_out(fs::path(g.out) / (ds.manifest.id + ".features.csv"), csv);
        write_out(fs::path(g.out) / (ds.manifest.id + ".features.json"), dump_canonical(rows));
    }
    return 0;
}

int cmd_signatures(const Globals& g, const std::vector<std::string>& manifests, const std::string& label_map_path,
                   const NormalizationFlags& nf, bool content_only, const Thresholds& th,
                   const std::string& presence_mode) {
    th.validate();
    if (presence_mode != "signatures" && presence_mode != "texts")
        throw ConfigError(fmt::format("--presence-mode must be 'signatures' or 'texts', got '{}'", presence_mode));
    const Lexicon lex = open_lexicon(lexicon_path(g));
    const TextPipeline pipeline = make_pipeline(g, nf, content_only);
    const LabelMap map = open_label_map(label_map_path);
    write_run_manifest(g, "signatures", manifests, label_map_path, th, normalization_json(g, nf));

    std::vector<Record> all;
    for (auto& ds : ingest_all(g, manifests, map)) all.insert(all.end(), ds.records.begin(), ds.records.end());

    std::map<std::string, std::vector<EmotionSignature>> by_emotion;
    std::map<std::string, std::vector<FeatureVector>> pooled;
    for (const auto& group : group_by_label(all)) {
        std::vector<FeatureVector> vecs;
        vecs.reserve(group.texts.size());
        for (const auto& t : group.texts) vecs.push_back(extract_text(t, lex, pipeline));
        const bool any_signal =
            std::any_of(vecs.begin(), vecs.end(), [](const FeatureVector& fv) { return !fv.values.empty(); });
        if (!any_signal) {
            fmt::print(stderr, "warning: skipping {} / {}: no text matches any lexicon category\n", group.emotion,
                       group.dataset_id);
            continue;
        }
        auto sig = build_signature(group.emotion, group.dataset_id, vecs, th.top_decile);
        write_out(fs::path(g.out) / fmt::format("{}.{}.json", sig.emotion, sig.dataset_id),
                  signature_to_json_text(sig));
        by_emotion[group.emotion].push_back(std::move(sig));
        auto& pool = pooled[group.emotion];
        pool.insert(pool.end(), vecs.begin(), vecs.end());
    }
    for (const auto& [emotion, sigs] : by_emotion) {
        const auto c = presence_mode == "texts" ? consolidate_by_texts(sigs, pooled[emotion], th.presence)
                                                : consolidate(sigs, th.presence);
        write_out(fs::path(g.out) / fmt::format("{}.{}.json", emotion, kConsolidated), signature_to_json_text(c));
    }
    return 0;
}

std::vector<fs::path> expand_signature_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                const auto name = e.path().filename().string();
                const std::string suffix = "." + kConsolidated + ".json";
                if (e.is_regular_file() && name.size() > suffix.size() &&
                    name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
                    found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

int cmd_compare(const Globals& g, const std::vector<std::string>& inputs, const Thresholds& th) {
    th.validate();
    std::vector<EmotionSignature> sigs;
    for (const auto& f : expand_signature_inputs(inputs)) sigs.push_back(load_signature(f));
    const auto matrix = similarity_matrix(sigs);
    const auto report = overlap_report(sigs, th.strong, th.universal);
    write_out(fs::path(g.out) / "similarity_matrix.csv", matrix.to_csv());
    write_out(fs::path(g.out) / "similarity_matrix.json", dump_canonical(matrix.to_json()));
    std::string tsv = "first\tsecond\tjaccard\n";
    for (const auto& p : pairs(matrix)) tsv += fmt::format("{}\t{}\t{}\n", p.first, p.second, format_fixed(p.jaccard, 4));
    write_out(fs::path(g.out) / "pairs.tsv", tsv);
    write_out(fs::path(g.out) / "overlap_report.json", dump_canonical(report.to_json()));
    write_out(fs::path(g.out) / "signature_plot.tsv", signature_plot_tsv(sigs));
    fmt::print("{}\n", report.summary());
    return 0;
}

int cmd_train(const Globals& g, const std::string& config_path, const std::vector<std::string>& models,
              std::optional<std::size_t> max_epochs, bool checkpoints) {
    const std::string path =
        config_path.empty() ? (fs::path(resource_dir(g)) / "synthetic" / "run.toml").string() : config_path;
    fusion::RunConfig rc = fusion::load_run_config(path);
    if (!g.lexicon.empty()) rc.lexicon = g.lexicon;
    if (g.seed) rc.train.seeds = {*g.seed};
    if (max_epochs) rc.train.max_epochs = *max_epochs;
    rc.train.validate();

    std::vector<fusion::ModelKind> kinds;
    for (const auto& m : models) kinds.push_back(fusion::parse_model_kind(m));
    if (kinds.empty() && rc.model) kinds.push_back(*rc.model);
    if (kinds.empty())
        kinds = {fusion::ModelKind::baseline, fusion::ModelKind::lex_enhance, fusion::ModelKind::early_fusion};

    const Lexicon lex = open_lexicon(rc.lexicon.string());
    const TextPipeline pipeline = rc.pipeline();
    const auto corpus = fusion::load_split_corpus(rc.corpus);
    const auto data = fusion::prepare_corpus(corpus, lex, pipeline, rc.train);
    fmt::print(stderr, "corpus: {} train / {} validation / {} test, {} labels, vocab {}, s_dim {}\n",
               data.train.inputs.size(), data.validation.inputs.size(), data.test.inputs.size(), data.labels.size(),
               data.vocab.size(), data.s_axes.size());

    for (auto kind : kinds) {
        const auto name = std::string(fusion::to_string(kind));
        const auto result = fusion::train(kind, data, rc.train);
        write_out(fs::path(g.out) / (name + ".eval.json"), dump_canonical(result.to_json()));
        write_out(fs::path(g.out) / (name + ".epochs.csv"), result.curve_csv());
        if (checkpoints) {
            for (const auto& run : result.runs) {
                const auto ck = fs::path(g.out) / fmt::format("{}.seed{}.ckpt", name, run.seed);
                fusion::save_checkpoint(run.model, ck);
                fmt::print(stderr, "wrote {}\n", ck.string());
            }
        }
        const auto& s = result.result.seed_stats;
        fmt::print("{}: macro-F1 {:.4f} +/- {:.4f} over {} seed(s)\n", name, s.macro_f1.mean, s.macro_f1.std,
                   s.seeds.size());
    }
    return 0;
}

int cmd_gradcheck(const Globals& g, const std::vector<std::string>& models, std::size_t draws, double step) {
    if (draws == 0) throw ConfigError("--draws must be positive");
    if (!(step > 0.0)) throw ConfigError("--step must be positive");
    std::vector<std::string> names = models.empty() ? std::vector<std::string>{"early_fusion", "lex_enhance"} : models;
    std::vector<fusion::ModelKind> kinds;
    for (const auto& m : names) kinds.push_back(fusion::parse_model_kind(m));
    const std::uint64_t seed = g.seed.value_or(1);
    bool ok = true;
    for (auto kind : kinds) {
        const auto summary = fusion::grad_check_draws(kind, fusion::GradCheckSetup{}, draws, seed, step);
        const auto name = std::string(fusion::to_string(kind));
        write_out(fs::path(g.out) / ("gradcheck." + name + ".json"), dump_canonical(summary.to_json()));
        const bool pass = summary.max_rel_error < kGradCheckTolerance;
        ok = ok && pass;
        fmt::print("{}: max relative error {:.3e} over {} draws ({})\n", name, summary.max_rel_error, draws,
                   pass ? "ok" : "FAILED");
    }
    return ok ? 0 : 1;
}

int cmd_convert_gi(const Globals& g, const std::string& input) {
    std::string text;
    try {
        text = read_text_file(input);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const auto conv = convert_gi_spreadsheet(text, input);
    write_out(fs::path(g.out) / "lexicon.json", to_canonical_json(conv.lexicon));
    fmt::print("{} categories, {} entries skipped\n", conv.lexicon.category_count(), conv.skipped_entries);
    return 0;
}

int cmd_synth(const Globals& g) {
    fusion::SyntheticSpec spec;
    if (g.seed) spec.seed = *g.seed;
    const auto corpus = fusion::generate_synthetic(spec);
    write_out(fs::path(g.out) / "corpus.jsonl", corpus.corpus_jsonl());
    write_out(fs::path(g.out) / "lexicon.json", corpus.lexicon_json());
    return 0;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Emotion signature pipeline and lexicon fusion models"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--lexicon", g.lexicon, "Lexicon file (.json or .tsv)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Random seed");
    app.add_option("--resources", g.resources, "Resource directory (default: $EMOSIG_RESOURCES or the bundled one)");

    NormalizationFlags nf;
    auto add_norm = [&](CLI::App* sub) {
        sub->add_flag("--no-normalize", nf.disabled, "Skip text normalization");
        sub->add_option("--emoticons", nf.emoticons, "Emoticon replacement TSV");
        sub->add_option("--slang", nf.slang, "Slang expansion TSV");
        sub->add_option("--hashtag-mode", nf.hashtag_mode, "strip_and_split, strip_only or keep")
            ->capture_default_str();
    };
    std::vector<std::string> manifests;
    std::string label_map;
    bool content_only = false;
    Thresholds th;
    std::string presence_mode = "signatures";

    auto* extract = app.add_subcommand("extract", "Per-text category frequencies for each dataset");
    extract->add_option("manifests", manifests, "Dataset manifest files")->required();
    extract->add_option("--label-map", label_map, "Label harmonization map");
    extract->add_flag("--content-tokens-only", content_only, "Exclude punctuation from the denominator");
    add_norm(extract);

    auto* signatures = app.add_subcommand("signatures", "Per-dataset and consolidated emotion signatures");
    signatures->add_option("manifests", manifests, "Dataset manifest files")->required();
    signatures->add_option("--label-map", label_map, "Label harmonization map");
    signatures->add_flag("--content-tokens-only", content_only, "Exclude punctuation from the denominator");
    signatures->add_option("--top-decile", th.top_decile, "Fraction of non-zero categories kept")->capture_default_str();
    signatures->add_option("--presence", th.presence, "Cross-dataset presence fraction")->capture_default_str();
    signatures->add_option("--presence-mode", presence_mode, "signatures or texts")->capture_default_str();
    add_norm(signatures);

    std::vector<std::string> sig_inputs;
    auto* compare = app.add_subcommand("compare", "Jaccard matrix, overlap report and plot data");
    compare->add_option("signatures", sig_inputs, "Signature files or directories of *.CONSOLIDATED.json")->required();
    compare->add_option("--strong", th.strong, "Strong-overlap Jaccard threshold")->capture_default_str();
    compare->add_option("--universal", th.universal, "Universal-feature fraction")->capture_default_str();

    std::string config_path;
    std::vector<std::string> models;
    std::size_t max_epochs = 0;
    bool no_checkpoints = false;
    auto* train = app.add_subcommand("train", "Train baseline / lex_enhance / early_fusion models");
    train->add_option("--config", config_path, "Run config TOML (default: bundled synthetic run)");
    train->add_option("--model", models, "Model kind; repeatable (default: the config's model, else all three)");
    auto* epochs_opt = train->add_option("--max-epochs", max_epochs, "Override the epoch cap");
    train->add_flag("--no-checkpoints", no_checkpoints, "Do not write model checkpoints");

    std::size_t draws = 20;
    double step = fusion::kFiniteDifferenceStep;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of fusion and head gradients");
    gradcheck->add_option("--model", models, "early_fusion and/or lex_enhance; repeatable");
    gradcheck->add_option("--draws", draws, "Random parameter draws")->capture_default_str();
    gradcheck->add_option("--step", step, "Central-difference step")->capture_default_str();

    std::string gi_csv;
    auto* convert = app.add_subcommand("convert-gi", "Convert a General Inquirer spreadsheet (CSV) to lexicon JSON");
    convert->add_option("spreadsheet", gi_csv, "Spreadsheet CSV")->required();

    auto* synth = app.add_subcommand("synth", "Write the synthetic training corpus and its lexicon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (seed_opt->count() > 0) g.seed = seed;

    try {
        if (*extract) return cmd_extract(g, manifests, label_map, nf, content_only);
        if (*signatures) return cmd_signatures(g, manifests, label_map, nf, content_only, th, presence_mode);
        if (*compare) return cmd_compare(g, sig_inputs, th);
        if (*train)
            return cmd_train(g, config_path, models,
                             epochs_opt->count() > 0 ? std::optional<std::size_t>(max_epochs) : std::nullopt,
                             !no_checkpoints);
        if (*gradcheck) return cmd_gradcheck(g, models, draws, step);
        if (*convert) return cmd_convert_gi(g, gi_csv);
        if (*synth) return cmd_synth(g);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace emosig::cli
