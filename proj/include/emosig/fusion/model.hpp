#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emosig/fusion/autodiff.hpp"
#include "emosig/fusion/metrics.hpp"
#include "emosig/fusion/rng.hpp"
#include "emosig/fusion/vocab.hpp"

namespace emosig::fusion {

enum class ModelKind { baseline, lex_enhance, early_fusion };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);

struct ToyEncoderConfig {
    std::size_t embed_dim = 32;
    std::size_t layers = 1;
    std::size_t heads = 2;
    std::size_t max_seq = 64;
    std::size_t ffn_dim = 64;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EncoderLayer {
    Parameter wq, bq, wk, bk, wv, bv, wo, bo;
    Parameter ln1_gamma, ln1_beta;
    Parameter w1, b1, w2, b2;
    Parameter ln2_gamma, ln2_beta;
};

struct Encoder {
    Parameter token_embedding;     // vocab x d
    Parameter position_embedding;  // max_seq x d
    Parameter ln_gamma, ln_beta;
    std::vector<EncoderLayer> layers;
};

// Linear classifier over [h_cls] or, when s_dim > 0, over [h_cls; s].
struct ClassifierHead {
    double dropout_rate = 0.2;
    std::size_t embed_dim = 0;
    std::size_t s_dim = 0;
    Parameter weights;  // (embed_dim + s_dim) x num_labels
    Parameter bias;     // 1 x num_labels

    std::size_t input_dim() const noexcept { return embed_dim + s_dim; }
    std::size_t num_labels() const noexcept { return static_cast<std::size_t>(bias.value.cols()); }
};

using LexEnhanceHead = ClassifierHead;

struct EarlyFusionLayer {
    Parameter projection;   // W_p: gi_dim x d, no bias
    Parameter gate_weight;  // W_g: 2d x d
    Parameter gate_bias;    // b_g: 1 x d
    Parameter alpha;        // 1 x 1

    std::size_t gi_dim() const noexcept { return static_cast<std::size_t>(projection.value.rows()); }
    std::size_t embed_dim() const noexcept { return static_cast<std::size_t>(projection.value.cols()); }
};

struct FusionModel {
    ModelKind kind = ModelKind::baseline;
    ToyEncoderConfig config;
    Vocabulary vocab;
    std::vector<std::string> labels;
    std::vector<std::string> gi_categories;  // columns of the token GI matrix
    std::vector<std::string> s_axes;         // LexEnhance input axes
    Encoder encoder;
    ClassifierHead head;
    std::optional<EarlyFusionLayer> fusion;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

struct ModelInput {
    std::vector<std::size_t> token_ids;  // [CLS] first
    Matrix gi;                           // token_ids.size() x gi_dim; negated and [CLS] rows are zero
    Matrix s;                            // 1 x s_dim (empty unless LexEnhance)
};

EarlyFusionLayer init_early_fusion(std::size_t gi_dim, std::size_t embed_dim, Rng& rng);
ClassifierHead init_head(std::size_t embed_dim, std::size_t s_dim, std::size_t num_labels, double dropout_rate,
                         Rng& rng);

// Encoder, head and fusion layer draw from separate streams of config.seed, so
// an early-fusion model starts with the same encoder and head as the baseline.
FusionModel init_model(ModelKind kind, const ToyEncoderConfig& config, Vocabulary vocab,
                       std::vector<std::string> labels, std::vector<std::string> gi_categories,
                       std::vector<std::string> s_axes, double head_dropout);

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

namespace ad {
Var early_fuse(Var e, Var x, Var projection, Var gate_weight, Var gate_bias, Var alpha);
}

Var early_fuse(Tape& tape, Var e, const Matrix& x, EarlyFusionLayer& layer);
Matrix early_fuse(const Matrix& e, const Matrix& x, const EarlyFusionLayer& layer);

// `rng` is required when training with a nonzero dropout rate.
Var lex_enhance_forward(Tape& tape, Var h_cls, const Matrix& s, ClassifierHead& head, bool training, Rng* rng);
Matrix lex_enhance_forward(const Matrix& h_cls, const Matrix& s, const ClassifierHead& head, bool training,
                           Rng* rng = nullptr);

struct ForwardTrace {
    Var embeddings;  // E
    Var fused;       // E after early fusion (== embeddings otherwise)
    Var pooled;      // h_cls
    Var logits;
};

ForwardTrace forward(Tape& tape, FusionModel& model, const ModelInput& input, bool training, Rng* rng);

Var loss(Var logits, const std::vector<std::size_t>& gold, std::size_t num_labels, TaskMode mode);

// Probabilities per label in evaluation mode (softmax or sigmoid).
std::vector<double> predict(const FusionModel& model, const ModelInput& input, TaskMode mode);

}  // namespace emosig::fusion
