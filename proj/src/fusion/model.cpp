#include "emosig/fusion/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emosig/error.hpp"

namespace emosig::fusion {

namespace {

constexpr std::uint64_t kEncoderStream = 1;
constexpr std::uint64_t kHeadStream = 2;
constexpr std::uint64_t kFusionStream = 3;

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = stddev * rng.normal();
    return m;
}

// Xavier-normal.
Parameter weight(std::string name, Eigen::Index in, Eigen::Index out, Rng& rng) {
    const double sd = std::sqrt(2.0 / static_cast<double>(in + out));
    return Parameter(std::move(name), normal_matrix(in, out, sd, rng));
}

Parameter zeros(std::string name, Eigen::Index rows, Eigen::Index cols) {
    return Parameter(std::move(name), Matrix::Zero(rows, cols), false);
}

Parameter ones(std::string name, Eigen::Index cols) {
    return Parameter(std::move(name), Matrix::Ones(1, cols), false);
}

Var linear(Tape& t, Var x, Parameter& w, Parameter& b) { return ad::add_row(ad::matmul(x, t.param(w)), t.param(b)); }

Var attention(Tape& t, Var x, EncoderLayer& L, std::size_t heads) {
    Var q = linear(t, x, L.wq, L.bq);
    Var k = linear(t, x, L.wk, L.bk);
    Var v = linear(t, x, L.wv, L.bv);
    const Eigen::Index d = x.cols();
    const Eigen::Index dh = d / static_cast<Eigen::Index>(heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Var> outs;
    for (std::size_t h = 0; h < heads; ++h) {
        const Eigen::Index off = static_cast<Eigen::Index>(h) * dh;
        Var qh = ad::slice_cols(q, off, dh);
        Var kh = ad::slice_cols(k, off, dh);
        Var vh = ad::slice_cols(v, off, dh);
        Var w = ad::softmax_rows(ad::scale(ad::matmul(qh, ad::transpose(kh)), scale));
        outs.push_back(ad::matmul(w, vh));
    }
    return linear(t, ad::concat_cols(outs), L.wo, L.bo);
}

Var encoder_block(Tape& t, Var x, EncoderLayer& L, std::size_t heads) {
    Var a = ad::layer_norm_rows(ad::add(x, attention(t, x, L, heads)), t.param(L.ln1_gamma), t.param(L.ln1_beta));
    Var f = linear(t, ad::gelu(linear(t, a, L.w1, L.b1)), L.w2, L.b2);
    return ad::layer_norm_rows(ad::add(a, f), t.param(L.ln2_gamma), t.param(L.ln2_beta));
}

Var head_forward(Tape& t, Var z, ClassifierHead& head, bool training, Rng* rng) {
    if (training && head.dropout_rate > 0.0) {
        if (rng == nullptr) throw std::logic_error("training forward pass needs an Rng for dropout");
        z = ad::dropout(z, dropout_mask(z.rows(), z.cols(), head.dropout_rate, *rng));
    }
    return linear(t, z, head.weights, head.bias);
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
    if (name == "baseline") return ModelKind::baseline;
    if (name == "lex_enhance") return ModelKind::lex_enhance;
    if (name == "early_fusion") return ModelKind::early_fusion;
    throw ConfigError(fmt::format("unknown model kind '{}' (expected baseline, lex_enhance or early_fusion)", name));
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::baseline: return "baseline";
        case ModelKind::lex_enhance: return "lex_enhance";
        case ModelKind::early_fusion: return "early_fusion";
    }
    return "baseline";
}

void ToyEncoderConfig::validate() const {
    if (embed_dim == 0) throw ConfigError("embed_dim must be positive");
    if (heads == 0 || embed_dim % heads != 0)
        throw ConfigError(fmt::format("embed_dim {} is not divisible by heads {}", embed_dim, heads));
    if (max_seq < 2) throw ConfigError("max_seq must be at least 2");
    if (ffn_dim == 0) throw ConfigError("ffn_dim must be positive");
}

std::vector<Parameter*> FusionModel::parameters() {
    std::vector<Parameter*> out{&encoder.token_embedding, &encoder.position_embedding, &encoder.ln_gamma,
                                &encoder.ln_beta};
    for (auto& L : encoder.layers) {
        for (Parameter* p : {&L.wq, &L.bq, &L.wk, &L.bk, &L.wv, &L.bv, &L.wo, &L.bo, &L.ln1_gamma, &L.ln1_beta, &L.w1,
                             &L.b1, &L.w2, &L.b2, &L.ln2_gamma, &L.ln2_beta})
            out.push_back(p);
    }
    if (fusion) {
        for (Parameter* p : {&fusion->projection, &fusion->gate_weight, &fusion->gate_bias, &fusion->alpha})
            out.push_back(p);
    }
    out.push_back(&head.weights);
    out.push_back(&head.bias);
    return out;
}

std::vector<const Parameter*> FusionModel::parameters() const {
    auto mut = const_cast<FusionModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

EarlyFusionLayer init_early_fusion(std::size_t gi_dim, std::size_t embed_dim, Rng& rng) {
    if (gi_dim == 0 || embed_dim == 0) throw ConfigError("early fusion needs positive GI and embedding dimensions");
    const auto g = static_cast<Eigen::Index>(gi_dim);
    const auto d = static_cast<Eigen::Index>(embed_dim);
    EarlyFusionLayer f;
    f.projection = weight("fusion.projection", g, d, rng);
    f.gate_weight = weight("fusion.gate_weight", 2 * d, d, rng);
    f.gate_bias = zeros("fusion.gate_bias", 1, d);
    f.alpha = Parameter("fusion.alpha", Matrix::Zero(1, 1), false);
    return f;
}

ClassifierHead init_head(std::size_t embed_dim, std::size_t s_dim, std::size_t num_labels, double dropout_rate,
                         Rng& rng) {
    if (num_labels == 0) throw ConfigError("classifier needs at least one label");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
    ClassifierHead h;
    h.dropout_rate = dropout_rate;
    h.embed_dim = embed_dim;
    h.s_dim = s_dim;
    h.weights = weight("head.weights", static_cast<Eigen::Index>(embed_dim + s_dim),
                       static_cast<Eigen::Index>(num_labels), rng);
    h.bias = zeros("head.bias", 1, static_cast<Eigen::Index>(num_labels));
    return h;
}

FusionModel init_model(ModelKind kind, const ToyEncoderConfig& config, Vocabulary vocab,
                       std::vector<std::string> labels, std::vector<std::string> gi_categories,
                       std::vector<std::string> s_axes, double head_dropout) {
    config.validate();
    FusionModel m;
    m.kind = kind;
    m.config = config;
    m.vocab = std::move(vocab);
    m.labels = std::move(labels);
    m.gi_categories = std::move(gi_categories);
    m.s_axes = kind == ModelKind::lex_enhance ? std::move(s_axes) : std::vector<std::string>{};
    if (kind == ModelKind::lex_enhance && m.s_axes.empty()) throw ConfigError("lex_enhance needs a non-empty s vector");

    const auto d = static_cast<Eigen::Index>(config.embed_dim);
    const auto ff = static_cast<Eigen::Index>(config.ffn_dim);
    Rng er(derive_seed(config.seed, kEncoderStream));
    m.encoder.token_embedding =
        Parameter("encoder.token_embedding", normal_matrix(static_cast<Eigen::Index>(m.vocab.size()), d, 0.1, er));
    m.encoder.position_embedding = Parameter(
        "encoder.position_embedding", normal_matrix(static_cast<Eigen::Index>(config.max_seq), d, 0.02, er));
    m.encoder.ln_gamma = ones("encoder.ln_gamma", d);
    m.encoder.ln_beta = zeros("encoder.ln_beta", 1, d);
    for (std::size_t i = 0; i < config.layers; ++i) {
        const std::string p = fmt::format("encoder.layer{}.", i);
        EncoderLayer L;
        L.wq = weight(p + "wq", d, d, er);
        L.bq = zeros(p + "bq", 1, d);
        L.wk = weight(p + "wk", d, d, er);
        L.bk = zeros(p + "bk", 1, d);
        L.wv = weight(p + "wv", d, d, er);
        L.bv = zeros(p + "bv", 1, d);
        L.wo = weight(p + "wo", d, d, er);
        L.bo = zeros(p + "bo", 1, d);
        L.ln1_gamma = ones(p + "ln1_gamma", d);
        L.ln1_beta = zeros(p + "ln1_beta", 1, d);
        L.w1 = weight(p + "w1", d, ff, er);
        L.b1 = zeros(p + "b1", 1, ff);
        L.w2 = weight(p + "w2", ff, d, er);
        L.b2 = zeros(p + "b2", 1, d);
        L.ln2_gamma = ones(p + "ln2_gamma", d);
        L.ln2_beta = zeros(p + "ln2_beta", 1, d);
        m.encoder.layers.push_back(std::move(L));
    }

    Rng hr(derive_seed(config.seed, kHeadStream));
    m.head = init_head(config.embed_dim, m.s_axes.size(), m.labels.size(), head_dropout, hr);

    if (kind == ModelKind::early_fusion) {
        Rng fr(derive_seed(config.seed, kFusionStream));
        m.fusion = init_early_fusion(m.gi_categories.size(), config.embed_dim, fr);
    }
    return m;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    Matrix mask(rows, cols);
    const double keep = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) mask(i, j) = rng.bernoulli(rate) ? 0.0 : keep;
    return mask;
}

namespace ad {

Var early_fuse(Var e, Var x, Var projection, Var gate_weight, Var gate_bias, Var alpha) {
    if (e.rows() != x.rows())
        throw ValidationError(fmt::format("early_fuse: {} embedding rows vs {} GI rows", e.rows(), x.rows()));
    if (x.cols() != projection.rows())
        throw ValidationError(
            fmt::format("early_fuse: GI width {} but projection expects {}", x.cols(), projection.rows()));
    if (e.cols() != projection.cols())
        throw ValidationError(
            fmt::format("early_fuse: embedding width {} but projection yields {}", e.cols(), projection.cols()));
    if (gate_weight.rows() != 2 * e.cols() || gate_weight.cols() != e.cols() || gate_bias.cols() != e.cols())
        throw ValidationError("early_fuse: gate shape does not match embedding width");
    Var p = gelu(matmul(x, projection));
    Var g = sigmoid(add_row(matmul(concat_cols({e, p}), gate_weight), gate_bias));
    return add(e, scale_by(mul(g, p), alpha));
}

}  // namespace ad

Var early_fuse(Tape& tape, Var e, const Matrix& x, EarlyFusionLayer& layer) {
    return ad::early_fuse(e, tape.constant(x), tape.param(layer.projection), tape.param(layer.gate_weight),
                          tape.param(layer.gate_bias), tape.param(layer.alpha));
}

Matrix early_fuse(const Matrix& e, const Matrix& x, const EarlyFusionLayer& layer) {
    Tape t;
    return ad::early_fuse(t.constant(e), t.constant(x), t.constant(layer.projection.value),
                          t.constant(layer.gate_weight.value), t.constant(layer.gate_bias.value),
                          t.constant(layer.alpha.value))
        .value();
}

Var lex_enhance_forward(Tape& tape, Var h_cls, const Matrix& s, ClassifierHead& head, bool training, Rng* rng) {
    if (h_cls.rows() != 1 || static_cast<std::size_t>(h_cls.cols()) != head.embed_dim)
        throw ValidationError(
            fmt::format("lex_enhance: h_cls has width {}, head expects {}", h_cls.cols(), head.embed_dim));
    if (head.s_dim == 0) {
        if (s.size() != 0) throw ValidationError("classifier head takes no s vector");
        return head_forward(tape, h_cls, head, training, rng);
    }
    if (s.rows() != 1 || static_cast<std::size_t>(s.cols()) != head.s_dim)
        throw ValidationError(fmt::format("lex_enhance: s has width {}, head expects {}", s.cols(), head.s_dim));
    return head_forward(tape, ad::concat_cols({h_cls, tape.constant(s)}), head, training, rng);
}

Matrix lex_enhance_forward(const Matrix& h_cls, const Matrix& s, const ClassifierHead& head, bool training,
                           Rng* rng) {
    Tape t;
    // No backward pass runs on this tape, so the parameters are never written.
    auto& h = const_cast<ClassifierHead&>(head);
    return lex_enhance_forward(t, t.constant(h_cls), s, h, training, rng).value();
}

ForwardTrace forward(Tape& tape, FusionModel& model, const ModelInput& input, bool training, Rng* rng) {
    const std::size_t n = input.token_ids.size();
    if (n == 0) throw ValidationError("forward: empty token sequence");
    if (n > model.config.max_seq)
        throw ValidationError(fmt::format("forward: {} tokens exceed max_seq {}", n, model.config.max_seq));
    auto& enc = model.encoder;
    Var tok = ad::gather_rows(tape.param(enc.token_embedding), input.token_ids);
    Var pos = ad::first_rows(tape.param(enc.position_embedding), static_cast<Eigen::Index>(n));
    ForwardTrace tr;
    tr.embeddings = ad::layer_norm_rows(ad::add(tok, pos), tape.param(enc.ln_gamma), tape.param(enc.ln_beta));
    tr.fused = tr.embeddings;
    if (model.fusion) {
        if (static_cast<std::size_t>(input.gi.rows()) != n)
            throw ValidationError(fmt::format("forward: GI matrix has {} rows for {} tokens", input.gi.rows(), n));
        tr.fused = early_fuse(tape, tr.embeddings, input.gi, *model.fusion);
    }
    Var x = tr.fused;
    for (auto& L : enc.layers) x = encoder_block(tape, x, L, model.config.heads);
    tr.pooled = ad::row(x, 0);
    tr.logits = lex_enhance_forward(tape, tr.pooled, model.head.s_dim > 0 ? input.s : Matrix(), model.head, training, rng);
    return tr;
}

Var loss(Var logits, const std::vector<std::size_t>& gold, std::size_t num_labels, TaskMode mode) {
    if (static_cast<std::size_t>(logits.cols()) != num_labels) throw ValidationError("loss: logit width mismatch");
    if (mode == TaskMode::single_label) {
        if (gold.size() != 1) throw ValidationError("loss: single_label examples need exactly one gold label");
        return ad::softmax_cross_entropy(logits, gold.front());
    }
    Matrix targets = Matrix::Zero(1, static_cast<Eigen::Index>(num_labels));
    for (auto j : gold) {
        if (j >= num_labels) throw ValidationError("loss: gold label index out of range");
        targets(0, static_cast<Eigen::Index>(j)) = 1.0;
    }
    return ad::bce_with_logits(logits, targets);
}

std::vector<double> predict(const FusionModel& model, const ModelInput& input, TaskMode mode) {
    Tape t;
    // Evaluation never calls backward(), so the model is only read.
    auto& m = const_cast<FusionModel&>(model);
    const Matrix logits = forward(t, m, input, false, nullptr).logits.value();
    std::vector<double> out(static_cast<std::size_t>(logits.cols()));
    if (mode == TaskMode::multi_label) {
        for (Eigen::Index j = 0; j < logits.cols(); ++j) out[static_cast<std::size_t>(j)] = sigmoid_value(logits(0, j));
    } else {
        const double mx = logits.maxCoeff();
        double z = 0.0;
        for (Eigen::Index j = 0; j < logits.cols(); ++j) z += std::exp(logits(0, j) - mx);
        for (Eigen::Index j = 0; j < logits.cols(); ++j)
            out[static_cast<std::size_t>(j)] = std::exp(logits(0, j) - mx) / z;
    }
    return out;
}

}  // namespace emosig::fusion
