#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "emosig/fusion/model.hpp"

namespace emosig::fusion {

inline constexpr double kFiniteDifferenceStep = 1e-5;
// Denominator floor of the relative error, so entries whose true gradient is
// ~0 are judged on absolute error instead.
inline constexpr double kRelativeErrorFloor = 1e-6;

double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor);

struct GradCheckSample {
    ModelInput input;
    std::vector<std::size_t> gold;
    TaskMode mode = TaskMode::multi_label;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
    std::map<std::string, double> per_parameter;  // max relative error per tensor

    nlohmann::json to_json() const;
};

// Compares the tape gradients of the fusion layer (if any) and head parameters
// with central differences. Dropout runs with one frozen mask drawn from
// `dropout_seed`.
GradCheckResult grad_check(FusionModel& model, const GradCheckSample& sample, std::uint64_t dropout_seed,
                           double step = kFiniteDifferenceStep);

struct GradCheckSetup {
    std::size_t vocab_size = 12;
    std::size_t gi_dim = 6;
    std::size_t s_dim = 5;
    std::size_t num_labels = 4;
    std::size_t tokens = 3;
    TaskMode mode = TaskMode::multi_label;
    ToyEncoderConfig encoder;
};

// A model whose fusion and head parameters are drawn at random (alpha ~ N(0,1)).
FusionModel random_gradcheck_model(ModelKind kind, const GradCheckSetup& setup, std::uint64_t seed);
GradCheckSample random_gradcheck_sample(const GradCheckSetup& setup, std::uint64_t seed);

struct GradCheckSummary {
    ModelKind kind = ModelKind::early_fusion;
    std::size_t draws = 0;
    double step = kFiniteDifferenceStep;
    double max_rel_error = 0.0;
    std::vector<GradCheckResult> results;

    nlohmann::json to_json() const;
};

GradCheckSummary grad_check_draws(ModelKind kind, const GradCheckSetup& setup, std::size_t draws,
                                  std::uint64_t seed, double step = kFiniteDifferenceStep);

struct AlphaExpansion {
    double analytic = 0.0;       // tape gradient of alpha
    double expansion = 0.0;      // sum_i dL/dE~_i . (g_i * p_i)
    double finite_difference = 0.0;
};

// Evaluation-mode alpha gradient three ways, for a model with a fusion layer.
AlphaExpansion alpha_expansion(FusionModel& model, const GradCheckSample& sample, double step = kFiniteDifferenceStep);

}  // namespace emosig::fusion
