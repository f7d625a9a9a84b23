#include "emosig/fusion/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emosig/error.hpp"

namespace emosig::fusion {

TaskMode parse_task_mode(std::string_view name) {
    if (name == "multi_label") return TaskMode::multi_label;
    if (name == "single_label") return TaskMode::single_label;
    throw ConfigError(fmt::format("unknown task_mode '{}'", name));
}

std::string_view to_string(TaskMode mode) { return mode == TaskMode::multi_label ? "multi_label" : "single_label"; }

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd r;
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

std::vector<std::vector<std::size_t>> decide(const std::vector<std::vector<double>>& scores, TaskMode mode,
                                             double threshold) {
    std::vector<std::vector<std::size_t>> out;
    out.reserve(scores.size());
    for (const auto& row : scores) {
        std::vector<std::size_t> picked;
        if (mode == TaskMode::multi_label) {
            for (std::size_t j = 0; j < row.size(); ++j)
                if (row[j] >= threshold) picked.push_back(j);
        } else if (!row.empty()) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < row.size(); ++j)
                if (row[j] > row[best]) best = j;
            picked.push_back(best);
        }
        out.push_back(std::move(picked));
    }
    return out;
}

EvalResult evaluate_sets(const std::vector<std::vector<std::size_t>>& predicted,
                         const std::vector<std::vector<std::size_t>>& gold, const std::vector<std::string>& labels) {
    if (predicted.size() != gold.size())
        throw ValidationError(fmt::format("evaluate: {} predictions vs {} gold rows", predicted.size(), gold.size()));
    if (labels.empty()) throw ValidationError("evaluate: empty label space");
    const std::size_t L = labels.size();
    std::vector<std::size_t> tp(L, 0), fp(L, 0), fn(L, 0);
    std::vector<std::uint8_t> in_pred(L), in_gold(L);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::fill(in_pred.begin(), in_pred.end(), 0);
        std::fill(in_gold.begin(), in_gold.end(), 0);
        for (auto j : predicted[i]) {
            if (j >= L) throw ValidationError(fmt::format("evaluate: predicted label index {} outside label space", j));
            in_pred[j] = 1;
        }
        for (auto j : gold[i]) {
            if (j >= L) throw ValidationError(fmt::format("evaluate: gold label index {} outside label space", j));
            in_gold[j] = 1;
        }
        for (std::size_t j = 0; j < L; ++j) {
            if (in_pred[j] && in_gold[j]) ++tp[j];
            if (in_pred[j] && !in_gold[j]) ++fp[j];
            if (!in_pred[j] && in_gold[j]) ++fn[j];
        }
    }
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    EvalResult r;
    double sf = 0.0, sp = 0.0, sr = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        LabelScores s;
        s.precision = ratio(tp[j], tp[j] + fp[j]);
        s.recall = ratio(tp[j], tp[j] + fn[j]);
        s.f1 = ratio(2 * tp[j], 2 * tp[j] + fp[j] + fn[j]);
        sf += s.f1;
        sp += s.precision;
        sr += s.recall;
        if (!r.per_label.emplace(labels[j], s).second)
            throw ValidationError(fmt::format("evaluate: duplicate label '{}'", labels[j]));
    }
    r.macro_f1 = sf / static_cast<double>(L);
    r.macro_precision = sp / static_cast<double>(L);
    r.macro_recall = sr / static_cast<double>(L);
    r.seed_stats.macro_f1 = {r.macro_f1, 0.0};
    r.seed_stats.macro_precision = {r.macro_precision, 0.0};
    r.seed_stats.macro_recall = {r.macro_recall, 0.0};
    return r;
}

EvalResult evaluate(const std::vector<std::vector<double>>& scores, const std::vector<std::vector<std::size_t>>& gold,
                    const std::vector<std::string>& labels, TaskMode mode) {
    for (const auto& row : scores) {
        if (row.size() != labels.size())
            throw ValidationError(
                fmt::format("evaluate: score vector of length {} for {} labels", row.size(), labels.size()));
    }
    if (mode == TaskMode::single_label) {
        for (const auto& g : gold)
            if (g.size() != 1) throw ValidationError("evaluate: single_label gold rows need exactly one label");
    }
    return evaluate_sets(decide(scores, mode), gold, labels);
}

EvalResult aggregate_seeds(const std::vector<EvalResult>& runs, const std::vector<std::uint64_t>& seeds) {
    if (runs.empty()) throw ValidationError("aggregate_seeds: no runs");
    EvalResult out;
    const double n = static_cast<double>(runs.size());
    for (const auto& [label, _] : runs.front().per_label) {
        LabelScores acc;
        for (const auto& r : runs) {
            const auto& s = r.per_label.at(label);
            acc.f1 += s.f1;
            acc.precision += s.precision;
            acc.recall += s.recall;
        }
        out.per_label[label] = {acc.f1 / n, acc.precision / n, acc.recall / n};
    }
    double sf = 0.0, sp = 0.0, sr = 0.0;
    for (const auto& [label, s] : out.per_label) {
        sf += s.f1;
        sp += s.precision;
        sr += s.recall;
    }
    const double L = static_cast<double>(out.per_label.size());
    out.macro_f1 = sf / L;
    out.macro_precision = sp / L;
    out.macro_recall = sr / L;

    std::vector<double> f1, p, r;
    for (const auto& run : runs) {
        f1.push_back(run.macro_f1);
        p.push_back(run.macro_precision);
        r.push_back(run.macro_recall);
    }
    out.seed_stats = {seeds, mean_std(f1), mean_std(p), mean_std(r)};
    return out;
}

nlohmann::json EvalResult::to_json() const {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [l, s] : per_label) labels[l] = {{"f1", s.f1}, {"precision", s.precision}, {"recall", s.recall}};
    auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
    return {{"macro_f1", macro_f1},
            {"macro_precision", macro_precision},
            {"macro_recall", macro_recall},
            {"per_label", labels},
            {"seed_stats",
             {{"seeds", seed_stats.seeds},
              {"macro_f1", ms(seed_stats.macro_f1)},
              {"macro_precision", ms(seed_stats.macro_precision)},
              {"macro_recall", ms(seed_stats.macro_recall)}}}};
}

}  // namespace emosig::fusion
