#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace emosig::fusion {

enum class TaskMode { multi_label, single_label };

TaskMode parse_task_mode(std::string_view name);
std::string_view to_string(TaskMode mode);

inline constexpr double kMultiLabelThreshold = 0.5;

struct LabelScores {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;

    friend bool operator==(const LabelScores&, const LabelScores&) = default;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single seed

    friend bool operator==(const MeanStd&, const MeanStd&) = default;
};

struct SeedStats {
    std::vector<std::uint64_t> seeds;
    MeanStd macro_f1;
    MeanStd macro_precision;
    MeanStd macro_recall;

    friend bool operator==(const SeedStats&, const SeedStats&) = default;
};

struct EvalResult {
    double macro_f1 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    std::map<std::string, LabelScores> per_label;
    SeedStats seed_stats;

    nlohmann::json to_json() const;
    friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

MeanStd mean_std(const std::vector<double>& values);

// Predicted label sets from scores: threshold on probabilities for multi-label,
// argmax (lowest index on ties) for single-label.
std::vector<std::vector<std::size_t>> decide(const std::vector<std::vector<double>>& scores, TaskMode mode,
                                             double threshold = kMultiLabelThreshold);

// Per-label precision/recall/F1 (0/0 := 0) and their unweighted means.
EvalResult evaluate_sets(const std::vector<std::vector<std::size_t>>& predicted,
                         const std::vector<std::vector<std::size_t>>& gold, const std::vector<std::string>& labels);

// Scores are per-example vectors over `labels` (probabilities for multi-label).
EvalResult evaluate(const std::vector<std::vector<double>>& scores, const std::vector<std::vector<std::size_t>>& gold,
                    const std::vector<std::string>& labels, TaskMode mode);

// Mean over runs; macro values are recomputed from the averaged per-label scores.
EvalResult aggregate_seeds(const std::vector<EvalResult>& runs, const std::vector<std::uint64_t>& seeds);

}  // namespace emosig::fusion
