#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emosig/corpus.hpp"
#include "emosig/features.hpp"
#include "emosig/lexicon.hpp"
#include "emosig/signatures.hpp"
#include "emosig/fusion/metrics.hpp"
#include "emosig/fusion/model.hpp"

namespace emosig::fusion {

struct TrainConfig {
    std::vector<std::uint64_t> seeds{1, 2, 10, 21, 42};
    double learning_rate = 1e-5;
    std::size_t patience = 3;
    double dropout_early_fusion = 0.3;
    double dropout_lex_enhance = 0.2;
    double dropout_baseline = 0.2;
    std::size_t max_epochs = 20;
    std::size_t batch_size = 16;
    TaskMode task_mode = TaskMode::multi_label;
    double weight_decay = 0.01;
    double top_fraction = kDefaultTopFraction;  // signatures behind the s vector
    ToyEncoderConfig encoder;                   // encoder.seed is replaced by each run seed

    void validate() const;
    double head_dropout(ModelKind kind) const;
};

// Labelled texts with a fixed train/validation/test assignment.
struct SplitCorpus {
    std::vector<Record> train;
    std::vector<Record> validation;
    std::vector<Record> test;
};

// JSONL rows {"text": ..., "labels": [...], "split": "train"|"validation"|"test"}.
SplitCorpus load_split_corpus(const std::filesystem::path& path);
SplitCorpus parse_split_corpus(std::string_view text, const std::string& source);

struct EncodedSplit {
    std::vector<ModelInput> inputs;
    std::vector<std::vector<std::size_t>> gold;  // label indices, ascending
};

struct PreparedCorpus {
    std::vector<std::string> labels;  // sorted union over all splits
    Vocabulary vocab;                 // training split only
    std::vector<CategoryName> gi_categories;
    std::vector<EmotionSignature> signatures;  // built from the training split
    std::vector<CategoryName> s_axes;
    // Per-axis standardization of s, fitted on the training split.
    std::vector<double> s_mean;
    std::vector<double> s_scale;
    std::size_t max_seq = 0;
    EncodedSplit train;
    EncodedSplit validation;
    EncodedSplit test;
};

PreparedCorpus prepare_corpus(const SplitCorpus& corpus, const Lexicon& lexicon, const TextPipeline& pipeline,
                              const TrainConfig& config);

// Rescales every input's s to (s - mean) / scale in place.
void standardize_s(EncodedSplit& split, const std::vector<double>& mean, const std::vector<double>& scale);

ModelInput encode_text(const std::vector<std::string>& tokens, const Vocabulary& vocab, const Lexicon& lexicon,
                       const std::vector<CategoryName>& s_axes, std::size_t max_seq,
                       const ExtractOptions& options = {});

// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopper {
public:
    explicit EarlyStopper(std::size_t patience);

    // Returns true when the score improves on the best so far.
    bool update(double score);
    bool should_stop() const noexcept { return since_best_ >= patience_; }
    std::size_t best_epoch() const noexcept { return best_epoch_; }  // 1-based, 0 before any update
    double best_score() const noexcept { return best_; }

private:
    std::size_t patience_;
    std::size_t epoch_ = 0;
    std::size_t best_epoch_ = 0;
    std::size_t since_best_ = 0;
    double best_ = 0.0;
};

class AdamW {
public:
    AdamW(std::vector<Parameter*> params, double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
          double eps = 1e-8);

    void step();
    void zero_grad();

private:
    std::vector<Parameter*> params_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    double lr_, wd_, b1_, b2_, eps_;
    std::size_t t_ = 0;
};

struct EpochRecord {
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
    double val_macro_precision = 0.0;
    double val_macro_recall = 0.0;
    bool improved = false;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    EvalResult test;
    FusionModel model;  // best-epoch weights
};

struct TrainResult {
    ModelKind kind = ModelKind::baseline;
    EvalResult result;  // test split, aggregated over seeds
    std::vector<SeedRun> runs;
    std::vector<EpochRecord> curve;

    std::string curve_csv() const;
    nlohmann::json to_json() const;
};

EvalResult evaluate_model(const FusionModel& model, const EncodedSplit& split, const std::vector<std::string>& labels,
                          TaskMode mode);

SeedRun train_seed(ModelKind kind, const PreparedCorpus& data, const TrainConfig& config, std::uint64_t seed,
                   std::vector<EpochRecord>* curve = nullptr);

TrainResult train(ModelKind kind, const PreparedCorpus& data, const TrainConfig& config);

}  // namespace emosig::fusion
