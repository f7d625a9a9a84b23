#include "emosig/fusion/train_config.hpp"

#include <set>

#include <fmt/format.h>
#include <toml.hpp>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig::fusion {

namespace {

class Table {
public:
    Table(const toml::table& t, std::string where, std::string source)
        : t_(t), where_(std::move(where)), source_(std::move(source)) {}

    void allow(std::initializer_list<std::string_view> keys) const {
        std::set<std::string_view> ok(keys);
        for (const auto& [k, _] : t_) {
            if (!ok.count(k.str())) throw ConfigError(fmt::format("{}: unknown key '{}{}'", source_, where_, k.str()));
        }
    }

    template <class T>
    std::optional<T> get(std::string_view key) const {
        const toml::node* n = t_.get(key);
        if (!n) return std::nullopt;
        if constexpr (std::is_same_v<T, double>) {
            if (auto v = n->value<double>()) return *v;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
            if (n->is_integer()) return n->as_integer()->get();
        } else if constexpr (std::is_same_v<T, bool>) {
            if (n->is_boolean()) return n->as_boolean()->get();
        } else {
            if (n->is_string()) return n->as_string()->get();
        }
        throw ConfigError(fmt::format("{}: '{}{}' has the wrong type", source_, where_, key));
    }

    std::optional<std::size_t> count(std::string_view key) const {
        auto v = get<std::int64_t>(key);
        if (!v) return std::nullopt;
        if (*v < 0) throw ConfigError(fmt::format("{}: '{}{}' must be non-negative", source_, where_, key));
        return static_cast<std::size_t>(*v);
    }

    const toml::table* sub(std::string_view key) const {
        const toml::node* n = t_.get(key);
        if (!n) return nullptr;
        if (!n->is_table()) throw ConfigError(fmt::format("{}: '{}' must be a table", source_, key));
        return n->as_table();
    }

    const toml::table& raw() const { return t_; }

private:
    const toml::table& t_;
    std::string where_;
    std::string source_;
};

}  // namespace

TextPipeline RunConfig::pipeline() const {
    TextPipeline p;
    p.options.content_tokens_only = content_tokens_only;
    if (emoticons || slang) {
        NormalizationConfig cfg;
        cfg.hashtag_mode = hashtag_mode;
        if (emoticons) cfg.emoticon_map = load_replacement_tsv(*emoticons);
        if (slang) cfg.slang_map = load_replacement_tsv(*slang);
        cfg.validate();
        p.normalization = std::move(cfg);
    }
    return p;
}

RunConfig parse_run_config(std::string_view toml_text, const std::string& source,
                           const std::filesystem::path& base_dir) {
    toml::table doc;
    try {
        doc = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        throw FormatError(source, e.source().begin.line, e.source().begin.column, std::string(e.description()));
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() ? base_dir / path : path;
    };

    RunConfig rc;
    Table top(doc, "", source);
    top.allow({"model", "corpus", "lexicon", "emoticons", "slang", "hashtag_mode", "content_tokens_only", "train",
               "encoder"});
    if (auto m = top.get<std::string>("model")) rc.model = parse_model_kind(*m);
    auto corpus = top.get<std::string>("corpus");
    auto lexicon = top.get<std::string>("lexicon");
    if (!corpus) throw ConfigError(fmt::format("{}: missing 'corpus'", source));
    if (!lexicon) throw ConfigError(fmt::format("{}: missing 'lexicon'", source));
    rc.corpus = resolve(*corpus);
    rc.lexicon = resolve(*lexicon);
    if (auto e = top.get<std::string>("emoticons")) rc.emoticons = resolve(*e);
    if (auto s = top.get<std::string>("slang")) rc.slang = resolve(*s);
    if (auto h = top.get<std::string>("hashtag_mode")) rc.hashtag_mode = parse_hashtag_mode(*h);
    if (auto c = top.get<bool>("content_tokens_only")) rc.content_tokens_only = *c;

    auto& tc = rc.train;
    if (const toml::table* t = top.sub("train")) {
        Table tr(*t, "train.", source);
        tr.allow({"seeds", "learning_rate", "patience", "dropout_early_fusion", "dropout_lex_enhance",
                  "dropout_baseline", "max_epochs", "batch_size", "task_mode", "weight_decay", "top_fraction"});
        if (const toml::node* n = t->get("seeds")) {
            const toml::array* arr = n->as_array();
            if (!arr) throw ConfigError(fmt::format("{}: 'train.seeds' must be an array", source));
            tc.seeds.clear();
            for (const auto& s : *arr) {
                if (!s.is_integer() || s.as_integer()->get() < 0)
                    throw ConfigError(fmt::format("{}: seeds must be non-negative integers", source));
                tc.seeds.push_back(static_cast<std::uint64_t>(s.as_integer()->get()));
            }
        }
        if (auto v = tr.get<double>("learning_rate")) tc.learning_rate = *v;
        if (auto v = tr.count("patience")) tc.patience = *v;
        if (auto v = tr.get<double>("dropout_early_fusion")) tc.dropout_early_fusion = *v;
        if (auto v = tr.get<double>("dropout_lex_enhance")) tc.dropout_lex_enhance = *v;
        if (auto v = tr.get<double>("dropout_baseline")) tc.dropout_baseline = *v;
        if (auto v = tr.count("max_epochs")) tc.max_epochs = *v;
        if (auto v = tr.count("batch_size")) tc.batch_size = *v;
        if (auto v = tr.get<std::string>("task_mode")) tc.task_mode = parse_task_mode(*v);
        if (auto v = tr.get<double>("weight_decay")) tc.weight_decay = *v;
        if (auto v = tr.get<double>("top_fraction")) tc.top_fraction = *v;
    }
    if (const toml::table* t = top.sub("encoder")) {
        Table en(*t, "encoder.", source);
        en.allow({"embed_dim", "layers", "heads", "max_seq", "ffn_dim"});
        if (auto v = en.count("embed_dim")) tc.encoder.embed_dim = *v;
        if (auto v = en.count("layers")) tc.encoder.layers = *v;
        if (auto v = en.count("heads")) tc.encoder.heads = *v;
        if (auto v = en.count("max_seq")) tc.encoder.max_seq = *v;
        if (auto v = en.count("ffn_dim")) tc.encoder.ffn_dim = *v;
    }
    tc.validate();
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(text, path.string(), path.parent_path());
}

}  // namespace emosig::fusion
