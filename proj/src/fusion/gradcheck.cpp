#include "emosig/fusion/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "emosig/error.hpp"

namespace emosig::fusion {

namespace {

double loss_value(FusionModel& model, const GradCheckSample& sample, bool training, const Rng& mask_rng) {
    Tape t;
    Rng r = mask_rng;
    auto tr = forward(t, model, sample.input, training, &r);
    return loss(tr.logits, sample.gold, model.labels.size(), sample.mode).value()(0, 0);
}

std::vector<Parameter*> checked_parameters(FusionModel& model) {
    std::vector<Parameter*> out;
    if (model.fusion) {
        for (Parameter* p : {&model.fusion->projection, &model.fusion->gate_weight, &model.fusion->gate_bias,
                             &model.fusion->alpha})
            out.push_back(p);
    }
    out.push_back(&model.head.weights);
    out.push_back(&model.head.bias);
    return out;
}

void fill_normal(Matrix& m, double sd, Rng& rng) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
}

double xavier_sd(const Matrix& w) { return std::sqrt(2.0 / static_cast<double>(w.rows() + w.cols())); }

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
    const double den = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / den;
}

GradCheckResult grad_check(FusionModel& model, const GradCheckSample& sample, std::uint64_t dropout_seed,
                           double step) {
    const Rng mask_rng(dropout_seed);
    for (Parameter* p : model.parameters()) p->zero_grad();
    {
        Tape t;
        Rng r = mask_rng;
        auto tr = forward(t, model, sample.input, true, &r);
        t.backward(loss(tr.logits, sample.gold, model.labels.size(), sample.mode));
    }
    GradCheckResult res;
    for (Parameter* p : checked_parameters(model)) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            double& w = p->value.data()[i];
            const double orig = w;
            w = orig + step;
            const double up = loss_value(model, sample, true, mask_rng);
            w = orig - step;
            const double down = loss_value(model, sample, true, mask_rng);
            w = orig;
            const double numeric = (up - down) / (2.0 * step);
            const double err = relative_error(p->grad.data()[i], numeric);
            ++res.checked;
            worst = std::max(worst, err);
            if (res.worst_parameter.empty() || err > res.max_rel_error) {
                res.max_rel_error = err;
                res.worst_parameter = p->name;
                res.worst_index = static_cast<std::size_t>(i);
                res.worst_analytic = p->grad.data()[i];
                res.worst_numeric = numeric;
            }
        }
        res.per_parameter[p->name] = worst;
    }
    return res;
}

FusionModel random_gradcheck_model(ModelKind kind, const GradCheckSetup& setup, std::uint64_t seed) {
    std::vector<std::string> words{"[CLS]", "[PAD]", "[UNK]"};
    for (std::size_t i = 0; i < setup.vocab_size; ++i) words.push_back(fmt::format("w{}", i));
    std::vector<std::string> labels, gi, axes;
    for (std::size_t i = 0; i < setup.num_labels; ++i) labels.push_back(fmt::format("label{}", i));
    for (std::size_t i = 0; i < setup.gi_dim; ++i) gi.push_back(fmt::format("C{}", i));
    for (std::size_t i = 0; i < setup.s_dim; ++i) axes.push_back(fmt::format("S{}", i));
    ToyEncoderConfig enc = setup.encoder;
    enc.seed = seed;
    FusionModel m = init_model(kind, enc, Vocabulary::from_words(words), labels, gi, axes, 0.2);

    // Weights at the initializer's scale; biases and alpha move off zero.
    Rng rng(derive_seed(seed, 99));
    if (m.fusion) {
        fill_normal(m.fusion->projection.value, xavier_sd(m.fusion->projection.value), rng);
        fill_normal(m.fusion->gate_weight.value, xavier_sd(m.fusion->gate_weight.value), rng);
        fill_normal(m.fusion->gate_bias.value, 0.5, rng);
        fill_normal(m.fusion->alpha.value, 1.0, rng);
    }
    fill_normal(m.head.weights.value, xavier_sd(m.head.weights.value), rng);
    fill_normal(m.head.bias.value, 0.5, rng);
    return m;
}

GradCheckSample random_gradcheck_sample(const GradCheckSetup& setup, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 98));
    GradCheckSample s;
    s.mode = setup.mode;
    s.input.token_ids.push_back(Vocabulary::kCls);
    for (std::size_t i = 0; i < setup.tokens; ++i) s.input.token_ids.push_back(3 + rng.below(setup.vocab_size));
    const auto n = static_cast<Eigen::Index>(s.input.token_ids.size());
    s.input.gi = Matrix::Zero(n, static_cast<Eigen::Index>(setup.gi_dim));
    for (Eigen::Index i = 1; i < n; ++i) {
        s.input.gi(i, static_cast<Eigen::Index>(rng.below(setup.gi_dim))) = 1.0;
        for (Eigen::Index j = 0; j < s.input.gi.cols(); ++j)
            if (rng.bernoulli(0.3)) s.input.gi(i, j) = 1.0;
    }
    s.input.s = Matrix(1, static_cast<Eigen::Index>(setup.s_dim));
    for (Eigen::Index j = 0; j < s.input.s.cols(); ++j) s.input.s(0, j) = rng.uniform();
    if (setup.mode == TaskMode::single_label) {
        s.gold.push_back(rng.below(setup.num_labels));
    } else {
        for (std::size_t j = 0; j < setup.num_labels; ++j)
            if (rng.bernoulli(0.5)) s.gold.push_back(j);
    }
    return s;
}

GradCheckSummary grad_check_draws(ModelKind kind, const GradCheckSetup& setup, std::size_t draws,
                                  std::uint64_t seed, double step) {
    GradCheckSummary out;
    out.kind = kind;
    out.draws = draws;
    out.step = step;
    for (std::size_t k = 0; k < draws; ++k) {
        const std::uint64_t s = derive_seed(seed, 1000 + k);
        FusionModel m = random_gradcheck_model(kind, setup, s);
        const auto sample = random_gradcheck_sample(setup, s);
        out.results.push_back(grad_check(m, sample, derive_seed(s, 7), step));
        out.max_rel_error = std::max(out.max_rel_error, out.results.back().max_rel_error);
    }
    return out;
}

AlphaExpansion alpha_expansion(FusionModel& model, const GradCheckSample& sample, double step) {
    if (!model.fusion) throw ValidationError("alpha_expansion needs an early-fusion model");
    auto& f = *model.fusion;
    for (Parameter* p : model.parameters()) p->zero_grad();
    AlphaExpansion out;
    Tape t;
    auto tr = forward(t, model, sample.input, false, nullptr);
    t.backward(loss(tr.logits, sample.gold, model.labels.size(), sample.mode));
    out.analytic = f.alpha.grad(0, 0);

    const Matrix& e = tr.embeddings.value();
    const Matrix dfused = t.grad(tr.fused);
    Matrix p = sample.input.gi * f.projection.value;
    p = p.unaryExpr([](double v) { return gelu_value(v); });
    Matrix ep(e.rows(), e.cols() * 2);
    ep << e, p;
    Matrix g = (ep * f.gate_weight.value).rowwise() + Eigen::RowVectorXd(f.gate_bias.value.row(0));
    g = g.unaryExpr([](double v) { return sigmoid_value(v); });
    out.expansion = (dfused.array() * g.array() * p.array()).sum();

    const Rng unused(0);
    const double orig = f.alpha.value(0, 0);
    f.alpha.value(0, 0) = orig + step;
    const double up = loss_value(model, sample, false, unused);
    f.alpha.value(0, 0) = orig - step;
    const double down = loss_value(model, sample, false, unused);
    f.alpha.value(0, 0) = orig;
    out.finite_difference = (up - down) / (2.0 * step);
    return out;
}

nlohmann::json GradCheckResult::to_json() const {
    return {{"max_rel_error", max_rel_error},
            {"worst_parameter", worst_parameter},
            {"worst_index", worst_index},
            {"worst_analytic", worst_analytic},
            {"worst_numeric", worst_numeric},
            {"checked", checked},
            {"per_parameter", per_parameter}};
}

nlohmann::json GradCheckSummary::to_json() const {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& x : results) r.push_back(x.to_json());
    return {{"model", std::string(to_string(kind))},
            {"draws", draws},
            {"max_rel_error", max_rel_error},
            {"step", step},
            {"results", r}};
}

}  // namespace emosig::fusion
