#include <doctest.h>

#include <cmath>

#include "emosig/error.hpp"
#include "emosig/fusion/gradcheck.hpp"
#include "emosig/fusion/model.hpp"
#include "support.hpp"

using namespace emosig;
using namespace emosig::fusion;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
    return m;
}

Matrix random_bits(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    return m;
}

EarlyFusionLayer layer_with_alpha(std::size_t gi, std::size_t d, double alpha, std::uint64_t seed) {
    Rng rng(seed);
    auto layer = init_early_fusion(gi, d, rng);
    layer.gate_bias.value = random_matrix(rng, 1, static_cast<Eigen::Index>(d));
    layer.alpha.value(0, 0) = alpha;
    return layer;
}

FusionModel small_model(ModelKind kind, std::size_t s_dim = 0) {
    ToyEncoderConfig cfg;
    cfg.embed_dim = 8;
    cfg.ffn_dim = 16;
    cfg.max_seq = 10;
    cfg.seed = 5;
    std::vector<std::string> words = {"a", "b", "c", "d", "e"};
    std::vector<std::string> s_axes;
    for (std::size_t i = 0; i < s_dim; ++i) s_axes.push_back("S" + std::to_string(i));
    return init_model(kind, cfg, Vocabulary::build({words}), {"x", "y", "z"}, {"G0", "G1", "G2", "G3"}, s_axes,
                      0.2);
}

ModelInput small_input(Rng& rng, std::size_t s_dim = 0) {
    ModelInput in;
    in.token_ids = {Vocabulary::kCls, 3, 4, 2, 6, 5};
    in.gi = random_bits(rng, 6, 4);
    in.gi.row(0).setZero();
    if (s_dim > 0) in.s = random_matrix(rng, 1, static_cast<Eigen::Index>(s_dim));
    return in;
}

}  // namespace

TEST_CASE("scalar early fusion matches the hand computation") {
    EarlyFusionLayer layer;
    layer.projection = Parameter("p", Matrix::Constant(1, 1, 1.0));
    layer.gate_weight = Parameter("g", Matrix::Zero(2, 1));
    layer.gate_bias = Parameter("b", Matrix::Zero(1, 1));
    layer.alpha = Parameter("a", Matrix::Constant(1, 1, 1.0));
    const Matrix out = early_fuse(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0), layer);
    const double expected = 2.0 + 0.5 * (0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0))));
    CHECK(out(0, 0) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(out(0, 0) == doctest::Approx(2.4206723730342715).epsilon(1e-15));
    CHECK(out(0, 0) == doctest::Approx(oracle::early_fuse_scalar(2, 1, 1, 0, 0, 0, 1)).epsilon(1e-15));
}

TEST_CASE("early fusion matches the scalar oracle for one dimension") {
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        const double e = rng.normal(), x = rng.bernoulli(0.5) ? 1.0 : 0.0, wp = rng.normal(), ge = rng.normal(),
                     gp = rng.normal(), bg = rng.normal(), alpha = rng.normal();
        EarlyFusionLayer layer;
        layer.projection = Parameter("p", Matrix::Constant(1, 1, wp));
        Matrix gw(2, 1);
        gw << ge, gp;
        layer.gate_weight = Parameter("g", gw);
        layer.gate_bias = Parameter("b", Matrix::Constant(1, 1, bg));
        layer.alpha = Parameter("a", Matrix::Constant(1, 1, alpha));
        const Matrix out = early_fuse(Matrix::Constant(1, 1, e), Matrix::Constant(1, 1, x), layer);
        CHECK(out(0, 0) == doctest::Approx(oracle::early_fuse_scalar(e, x, wp, ge, gp, bg, alpha)).epsilon(1e-12));
    }
}

TEST_CASE("alpha zero and zero GI rows leave embeddings untouched bit for bit") {
    Rng rng(43);
    const Matrix e = random_matrix(rng, 7, 8);
    const Matrix x = random_bits(rng, 7, 5);
    CHECK(early_fuse(e, x, layer_with_alpha(5, 8, 0.0, 1)) == e);

    Matrix partial = x;
    partial.row(2).setZero();
    partial.row(5).setZero();
    const Matrix fused = early_fuse(e, partial, layer_with_alpha(5, 8, 1.7, 2));
    CHECK(fused.row(2) == e.row(2));
    CHECK(fused.row(5) == e.row(5));
    CHECK(early_fuse(e, Matrix::Zero(7, 5), layer_with_alpha(5, 8, -3.0, 3)) == e);
}

TEST_CASE("early fusion shape errors") {
    auto layer = layer_with_alpha(5, 8, 1.0, 4);
    CHECK_THROWS_AS(early_fuse(Matrix::Zero(3, 8), Matrix::Zero(4, 5), layer), Error);
    CHECK_THROWS_AS(early_fuse(Matrix::Zero(3, 8), Matrix::Zero(3, 6), layer), Error);
    CHECK_THROWS_AS(early_fuse(Matrix::Zero(3, 7), Matrix::Zero(3, 5), layer), Error);
}

TEST_CASE("gate stays inside (0,1)") {
    auto layer = layer_with_alpha(3, 4, 1.0, 8);
    Rng rng(9);
    const Matrix e = random_matrix(rng, 5, 4);
    const Matrix x = random_bits(rng, 5, 3);
    Tape tape;
    Var ev = tape.constant(e);
    Var xv = tape.constant(x);
    Var p = ad::gelu(ad::matmul(xv, tape.param(layer.projection)));
    Var g = ad::sigmoid(
        ad::add_row(ad::matmul(ad::concat_cols({ev, p}), tape.param(layer.gate_weight)), tape.param(layer.gate_bias)));
    CHECK(g.value().minCoeff() > 0.0);
    CHECK(g.value().maxCoeff() < 1.0);
}

TEST_CASE("early fusion model equals the baseline at initialisation") {
    auto base = small_model(ModelKind::baseline);
    auto fused = small_model(ModelKind::early_fusion);
    REQUIRE(fused.fusion.has_value());
    CHECK(fused.fusion->alpha.value(0, 0) == 0.0);
    Rng rng(47);
    for (int i = 0; i < 10; ++i) {
        auto in = small_input(rng);
        Tape t1, t2;
        const Matrix a = forward(t1, base, in, false, nullptr).logits.value();
        const Matrix b = forward(t2, fused, in, false, nullptr).logits.value();
        CHECK(a == b);
    }
}

TEST_CASE("lex enhance head shapes") {
    Rng rng(53);
    auto head = init_head(32, 12, 6, 0.2, rng);
    CHECK(head.input_dim() == 44);
    CHECK(head.weights.value.rows() == 44);
    CHECK(head.weights.value.cols() == 6);
    const Matrix logits = lex_enhance_forward(random_matrix(rng, 1, 32), random_matrix(rng, 1, 12), head, false);
    CHECK(logits.cols() == 6);
    CHECK_THROWS_AS(lex_enhance_forward(random_matrix(rng, 1, 32), random_matrix(rng, 1, 11), head, false), Error);
    CHECK_THROWS_AS(lex_enhance_forward(random_matrix(rng, 1, 31), random_matrix(rng, 1, 12), head, false), Error);
}

TEST_CASE("zero weights give the bias") {
    Rng rng(59);
    auto head = init_head(8, 3, 4, 0.2, rng);
    head.weights.value.setZero();
    head.bias.value = random_matrix(rng, 1, 4);
    for (int i = 0; i < 5; ++i)
        CHECK(lex_enhance_forward(random_matrix(rng, 1, 8), random_matrix(rng, 1, 3), head, false) == head.bias.value);
}

TEST_CASE("evaluation mode is deterministic and training mode drops out") {
    Rng rng(61);
    auto head = init_head(8, 3, 4, 0.2, rng);
    const Matrix h = random_matrix(rng, 1, 8), s = random_matrix(rng, 1, 3);
    CHECK(lex_enhance_forward(h, s, head, false) == lex_enhance_forward(h, s, head, false));
    Rng d1(1), d2(2);
    CHECK(lex_enhance_forward(h, s, head, true, &d1) != lex_enhance_forward(h, s, head, true, &d2));

    auto model = small_model(ModelKind::lex_enhance, 3);
    auto in = small_input(rng, 3);
    CHECK(predict(model, in, TaskMode::multi_label) == predict(model, in, TaskMode::multi_label));
}

TEST_CASE("dropout mask values") {
    Rng rng(67);
    const Matrix m = dropout_mask(20, 20, 0.25, rng);
    for (Eigen::Index i = 0; i < m.size(); ++i) CHECK((m.data()[i] == 0.0 || m.data()[i] == 1.0 / 0.75));
    CHECK(dropout_mask(3, 3, 0.0, rng) == Matrix::Ones(3, 3));
}

TEST_CASE("predicted probabilities") {
    auto model = small_model(ModelKind::baseline);
    Rng rng(71);
    auto in = small_input(rng);
    auto single = predict(model, in, TaskMode::single_label);
    double sum = 0;
    for (double p : single) sum += p;
    CHECK(sum == doctest::Approx(1.0));
    for (double p : predict(model, in, TaskMode::multi_label)) CHECK((p > 0.0 && p < 1.0));
}

TEST_CASE("model kind names") {
    CHECK(parse_model_kind("early_fusion") == ModelKind::early_fusion);
    CHECK(to_string(ModelKind::lex_enhance) == "lex_enhance");
    CHECK_THROWS_AS(parse_model_kind("bogus"), ConfigError);
    ToyEncoderConfig bad;
    bad.heads = 3;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("gradient check passes on random draws") {
    GradCheckSetup setup;
    for (auto kind : {ModelKind::early_fusion, ModelKind::lex_enhance}) {
        auto summary = grad_check_draws(kind, setup, 5, 123);
        CHECK(summary.results.size() == 5);
        CHECK(summary.max_rel_error < 1e-4);
    }
}

TEST_CASE("fresh early fusion model passes the gradient check") {
    auto model = small_model(ModelKind::early_fusion);
    Rng rng(73);
    GradCheckSample sample{small_input(rng), {0, 2}, TaskMode::multi_label};
    auto r = grad_check(model, sample, 5);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("alpha gradient expansion") {
    GradCheckSetup setup;
    auto model = random_gradcheck_model(ModelKind::early_fusion, setup, 77);
    model.fusion->alpha.value(0, 0) = 0.0;
    auto sample = random_gradcheck_sample(setup, 78);
    auto a = alpha_expansion(model, sample);
    CHECK(a.analytic != 0.0);
    CHECK(a.analytic == doctest::Approx(a.expansion).epsilon(1e-10));
    CHECK(relative_error(a.analytic, a.finite_difference) < 1e-6);
}

TEST_CASE("zero GI input gives zero projection gradient") {
    GradCheckSetup setup;
    auto model = random_gradcheck_model(ModelKind::early_fusion, setup, 79);
    auto sample = random_gradcheck_sample(setup, 80);
    sample.input.gi.setZero();
    for (auto* p : model.parameters()) p->zero_grad();
    Tape tape;
    auto trace = forward(tape, model, sample.input, false, nullptr);
    tape.backward(loss(trace.logits, sample.gold, model.labels.size(), sample.mode));
    CHECK(model.fusion->projection.grad.isZero(0.0));
    CHECK(model.fusion->alpha.grad(0, 0) == 0.0);
}

TEST_CASE("relative error floor") {
    CHECK(relative_error(1.0, 1.0) == 0.0);
    CHECK(relative_error(2.0, 1.0) == 0.5);
    CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-3));
}
