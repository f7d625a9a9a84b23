#include "emosig/fusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig::fusion {

namespace {

constexpr std::uint64_t kOrderStream = 4;
constexpr std::uint64_t kDropoutStream = 5;

std::vector<std::size_t> label_indices(const Record& r, const std::vector<std::string>& labels) {
    std::vector<std::size_t> out;
    for (const auto& l : r.labels) {
        auto it = std::lower_bound(labels.begin(), labels.end(), l);
        out.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Matrix> snapshot(const FusionModel& m) {
    std::vector<Matrix> out;
    for (const Parameter* p : m.parameters()) out.push_back(p->value);
    return out;
}

void restore(FusionModel& m, const std::vector<Matrix>& values) {
    auto params = m.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

void TrainConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    for (double d : {dropout_early_fusion, dropout_lex_enhance, dropout_baseline})
        if (d < 0.0 || d >= 1.0) throw ConfigError("dropout rates must be in [0, 1)");
    if (!(top_fraction > 0.0) || top_fraction > 1.0) throw ConfigError("top_fraction must be in (0, 1]");
    encoder.validate();
}

double TrainConfig::head_dropout(ModelKind kind) const {
    switch (kind) {
        case ModelKind::baseline: return dropout_baseline;
        case ModelKind::lex_enhance: return dropout_lex_enhance;
        case ModelKind::early_fusion: return dropout_early_fusion;
    }
    return dropout_baseline;
}

SplitCorpus parse_split_corpus(std::string_view text, const std::string& source) {
    SplitCorpus out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        const std::string where = fmt::format("{}:{}", source, line_no);
        auto j = parse_json_strict(line, where);
        if (!j.is_object() || !j.contains("text") || !j["text"].is_string() || !j.contains("labels") ||
            !j["labels"].is_array() || !j.contains("split") || !j["split"].is_string())
            throw ValidationError(fmt::format("{}: expected text, labels[] and split", where));
        Record r;
        r.text = j["text"].get<std::string>();
        for (const auto& l : j["labels"]) {
            if (!l.is_string()) throw ValidationError(fmt::format("{}: labels must be strings", where));
            r.labels.insert(lower_ascii(trim(l.get<std::string>())));
        }
        if (r.labels.empty()) throw ValidationError(fmt::format("{}: no labels", where));
        const auto split = j["split"].get<std::string>();
        r.dataset_id = split;
        if (split == "train") out.train.push_back(std::move(r));
        else if (split == "validation") out.validation.push_back(std::move(r));
        else if (split == "test") out.test.push_back(std::move(r));
        else throw ValidationError(fmt::format("{}: unknown split '{}'", where, split));
    }
    return out;
}

SplitCorpus load_split_corpus(const std::filesystem::path& path) {
    return parse_split_corpus(read_text_file(path), path.string());
}

ModelInput encode_text(const std::vector<std::string>& tokens, const Vocabulary& vocab, const Lexicon& lexicon,
                       const std::vector<CategoryName>& s_axes, std::size_t max_seq, const ExtractOptions& options) {
    ModelInput in;
    in.token_ids = vocab.encode(tokens, max_seq);
    const auto n = static_cast<Eigen::Index>(in.token_ids.size());
    in.gi = Matrix::Zero(n, static_cast<Eigen::Index>(lexicon.category_count()));
    TokenizedText tt{tokens, {}};
    const auto vectors = token_vectors(tt, lexicon);
    for (Eigen::Index i = 1; i < n; ++i) {
        const auto bits = vectors[static_cast<std::size_t>(i - 1)].effective_bits();
        for (std::size_t c = 0; c < bits.size(); ++c) in.gi(i, static_cast<Eigen::Index>(c)) = bits[c];
    }
    if (!s_axes.empty()) {
        const auto s = signature_projection(extract(tt, lexicon, options), s_axes);
        in.s = Eigen::Map<const Matrix>(s.data(), 1, static_cast<Eigen::Index>(s.size()));
    }
    return in;
}

void standardize_s(EncodedSplit& split, const std::vector<double>& mean, const std::vector<double>& scale) {
    for (auto& in : split.inputs) {
        if (static_cast<std::size_t>(in.s.cols()) != mean.size() || mean.size() != scale.size())
            throw ValidationError("standardize_s: dimension mismatch");
        for (Eigen::Index j = 0; j < in.s.cols(); ++j) {
            const auto u = static_cast<std::size_t>(j);
            in.s(0, j) = (in.s(0, j) - mean[u]) / scale[u];
        }
    }
}

PreparedCorpus prepare_corpus(const SplitCorpus& corpus, const Lexicon& lexicon, const TextPipeline& pipeline,
                              const TrainConfig& config) {
    config.validate();
    if (corpus.train.empty()) throw ValidationError("training split is empty");
    if (corpus.validation.empty()) throw ValidationError("validation split is empty");
    if (corpus.test.empty()) throw ValidationError("test split is empty");

    PreparedCorpus out;
    std::set<std::string> labels;
    for (const auto* split : {&corpus.train, &corpus.validation, &corpus.test}) {
        for (const auto& r : *split) {
            if (config.task_mode == TaskMode::single_label && r.labels.size() != 1)
                throw ValidationError(fmt::format("single_label task but a text has {} labels", r.labels.size()));
            labels.insert(r.labels.begin(), r.labels.end());
        }
    }
    out.labels.assign(labels.begin(), labels.end());
    out.gi_categories = lexicon.category_names();
    out.max_seq = config.encoder.max_seq;

    auto tokens_of = [&](const std::vector<Record>& rs) {
        std::vector<std::vector<std::string>> t;
        t.reserve(rs.size());
        for (const auto& r : rs) t.push_back(pipeline.prepare(r.text).tokens);
        return t;
    };
    const auto train_tokens = tokens_of(corpus.train);
    out.vocab = Vocabulary::build(train_tokens);

    std::map<std::string, std::vector<FeatureVector>> groups;
    for (std::size_t i = 0; i < corpus.train.size(); ++i) {
        auto fv = extract(TokenizedText{train_tokens[i], {}}, lexicon, pipeline.options);
        for (const auto& l : corpus.train[i].labels) groups[l].push_back(fv);
    }
    for (const auto& [label, vecs] : groups)
        out.signatures.push_back(build_signature(label, "train", vecs, config.top_fraction));
    out.s_axes = projection_axes(out.signatures);

    auto encode_split = [&](const std::vector<Record>& rs, const std::vector<std::vector<std::string>>& toks) {
        EncodedSplit s;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            s.inputs.push_back(encode_text(toks[i], out.vocab, lexicon, out.s_axes, out.max_seq, pipeline.options));
            s.gold.push_back(label_indices(rs[i], out.labels));
        }
        return s;
    };
    out.train = encode_split(corpus.train, train_tokens);
    out.validation = encode_split(corpus.validation, tokens_of(corpus.validation));
    out.test = encode_split(corpus.test, tokens_of(corpus.test));

    const std::size_t k = out.s_axes.size();
    const double n = static_cast<double>(out.train.inputs.size());
    out.s_mean.assign(k, 0.0);
    out.s_scale.assign(k, 0.0);
    for (const auto& in : out.train.inputs)
        for (std::size_t j = 0; j < k; ++j) out.s_mean[j] += in.s(0, static_cast<Eigen::Index>(j));
    for (auto& m : out.s_mean) m /= n;
    for (const auto& in : out.train.inputs) {
        for (std::size_t j = 0; j < k; ++j) {
            const double d = in.s(0, static_cast<Eigen::Index>(j)) - out.s_mean[j];
            out.s_scale[j] += d * d;
        }
    }
    for (auto& s : out.s_scale) s = s > 0.0 ? std::sqrt(s / n) : 1.0;
    for (auto* split : {&out.train, &out.validation, &out.test}) standardize_s(*split, out.s_mean, out.s_scale);
    return out;
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
    if (patience < 1) throw ConfigError("patience must be at least 1");
}

bool EarlyStopper::update(double score) {
    ++epoch_;
    if (best_epoch_ == 0 || score > best_) {
        best_ = score;
        best_epoch_ = epoch_;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

AdamW::AdamW(std::vector<Parameter*> params, double lr, double weight_decay, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {
    for (const Parameter* p : params_) {
        m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
}

void AdamW::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

void AdamW::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        Matrix& m = m_[k];
        Matrix& v = v_[k];
        for (Eigen::Index i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.data()[i];
            double& mi = m.data()[i];
            double& vi = v.data()[i];
            mi = b1_ * mi + (1.0 - b1_) * g;
            vi = b2_ * vi + (1.0 - b2_) * g * g;
            const double mhat = mi / c1;
            const double vhat = vi / c2;
            double& w = p.value.data()[i];
            if (p.decay) w -= lr_ * wd_ * w;
            w -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

EvalResult evaluate_model(const FusionModel& model, const EncodedSplit& split, const std::vector<std::string>& labels,
                          TaskMode mode) {
    std::vector<std::vector<double>> scores;
    scores.reserve(split.inputs.size());
    for (const auto& in : split.inputs) scores.push_back(predict(model, in, mode));
    return evaluate(scores, split.gold, labels, mode);
}

SeedRun train_seed(ModelKind kind, const PreparedCorpus& data, const TrainConfig& config, std::uint64_t seed,
                   std::vector<EpochRecord>* curve) {
    config.validate();
    if (data.train.inputs.empty() || data.validation.inputs.empty() || data.test.inputs.empty())
        throw ValidationError("train: every split must be non-empty");

    ToyEncoderConfig enc = config.encoder;
    enc.seed = seed;
    SeedRun run;
    run.seed = seed;
    run.model = init_model(kind, enc, data.vocab, data.labels, data.gi_categories, data.s_axes,
                           config.head_dropout(kind));
    FusionModel& model = run.model;
    AdamW opt(model.parameters(), config.learning_rate, config.weight_decay);
    Rng order_rng(derive_seed(seed, kOrderStream));
    Rng dropout_rng(derive_seed(seed, kDropoutStream));
    EarlyStopper stopper(config.patience);
    std::vector<Matrix> best = snapshot(model);

    std::vector<std::size_t> order(data.train.inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t L = data.labels.size();

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        order_rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const double inv = 1.0 / static_cast<double>(stop - start);
            opt.zero_grad();
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                Tape tape;
                auto tr = forward(tape, model, data.train.inputs[idx], true, &dropout_rng);
                Var l = loss(tr.logits, data.train.gold[idx], L, config.task_mode);
                const double lv = l.value()(0, 0);
                if (!std::isfinite(lv))
                    throw NumericError(fmt::format("non-finite loss {} ({} model, seed {}, epoch {}, example {})", lv,
                                                   to_string(kind), seed, epoch, idx));
                loss_sum += lv;
                tape.backward(ad::scale(l, inv));
            }
            opt.step();
        }
        const EvalResult val = evaluate_model(model, data.validation, data.labels, config.task_mode);
        const bool improved = stopper.update(val.macro_f1);
        if (improved) best = snapshot(model);
        if (curve) {
            curve->push_back({seed, epoch, loss_sum / static_cast<double>(order.size()), val.macro_f1,
                              val.macro_precision, val.macro_recall, improved});
        }
        run.epochs_run = epoch;
        if (stopper.should_stop()) break;
    }
    restore(model, best);
    run.best_epoch = stopper.best_epoch();
    run.test = evaluate_model(model, data.test, data.labels, config.task_mode);
    return run;
}

TrainResult train(ModelKind kind, const PreparedCorpus& data, const TrainConfig& config) {
    config.validate();
    TrainResult out;
    out.kind = kind;
    std::vector<EvalResult> results;
    for (auto seed : config.seeds) {
        out.runs.push_back(train_seed(kind, data, config, seed, &out.curve));
        results.push_back(out.runs.back().test);
    }
    out.result = aggregate_seeds(results, config.seeds);
    return out;
}

std::string TrainResult::curve_csv() const {
    std::string s = "seed,epoch,train_loss,val_macro_f1,val_macro_precision,val_macro_recall,improved\n";
    for (const auto& e : curve) {
        s += fmt::format("{},{},{},{},{},{},{}\n", e.seed, e.epoch, e.train_loss, e.val_macro_f1,
                         e.val_macro_precision, e.val_macro_recall, e.improved ? 1 : 0);
    }
    return s;
}

nlohmann::json TrainResult::to_json() const {
    nlohmann::json runs_json = nlohmann::json::array();
    for (const auto& r : runs) {
        runs_json.push_back(
            {{"seed", r.seed}, {"best_epoch", r.best_epoch}, {"epochs_run", r.epochs_run}, {"test", r.test.to_json()}});
    }
    return {{"model", std::string(to_string(kind))}, {"result", result.to_json()}, {"runs", runs_json}};
}

}  // namespace emosig::fusion
