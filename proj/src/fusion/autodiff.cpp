#include "emosig/fusion/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "emosig/error.hpp"

namespace emosig::fusion {

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

double sigmoid_value(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
    Node n;
    n.value = p.value;
    n.requires_grad = true;
    n.param = &p;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::vector<std::size_t> parents, Backward backward) {
    Node n;
    n.value = std::move(value);
    for (auto p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Matrix Tape::grad(Var v) const {
    const auto& n = nodes_[v.id];
    if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
    auto& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.has_grad) {
        n.grad = g;
        n.has_grad = true;
    } else {
        n.grad += g;
    }
}

void Tape::backward(Var loss) {
    if (loss.tape != this || value(loss).size() != 1) throw std::logic_error("backward() needs a 1x1 loss on this tape");
    for (auto& n : nodes_) n.has_grad = false;
    nodes_[loss.id].requires_grad = true;
    accumulate(loss.id, Matrix::Ones(1, 1));
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        auto& n = nodes_[i];
        if (!n.has_grad) continue;
        if (n.param) n.param->grad += n.grad;
        if (n.backward) {
            // Parents have smaller ids, so accumulate() never touches this node's grad.
            n.backward(*this, n.grad);
        }
    }
}

namespace ad {

namespace {

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok)
        throw ValidationError(fmt::format("{}: shape mismatch {}x{} vs {}x{}", op, a.rows(), a.cols(), b.rows(), b.cols()));
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& t = *a.tape;
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.cols() == bv.rows(), "matmul", av, bv);
    return t.record(av * bv, {a.id, b.id}, [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a.id)) t.accumulate(a.id, g * t.value(b).transpose());
        if (t.requires_grad(b.id)) t.accumulate(b.id, t.value(a).transpose() * g);
    });
}

Var add(Var a, Var b) {
    Tape& t = *a.tape;
    require(a.rows() == b.rows() && a.cols() == b.cols(), "add", a.value(), b.value());
    return t.record(a.value() + b.value(), {a.id, b.id}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, g);
    });
}

Var add_row(Var a, Var r) {
    Tape& t = *a.tape;
    require(r.rows() == 1 && r.cols() == a.cols(), "add_row", a.value(), r.value());
    Matrix out = a.value();
    out.rowwise() += r.value().row(0);
    return t.record(std::move(out), {a.id, r.id}, [a, r](Tape& t, const Matrix& g) {
        t.accumulate(a.id, g);
        if (t.requires_grad(r.id)) t.accumulate(r.id, g.colwise().sum());
    });
}

Var mul(Var a, Var b) {
    Tape& t = *a.tape;
    require(a.rows() == b.rows() && a.cols() == b.cols(), "mul", a.value(), b.value());
    return t.record(a.value().cwiseProduct(b.value()), {a.id, b.id}, [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a.id)) t.accumulate(a.id, g.cwiseProduct(t.value(b)));
        if (t.requires_grad(b.id)) t.accumulate(b.id, g.cwiseProduct(t.value(a)));
    });
}

Var scale(Var a, double s) {
    return a.tape->record(a.value() * s, {a.id}, [a, s](Tape& t, const Matrix& g) { t.accumulate(a.id, g * s); });
}

Var scale_by(Var a, Var s) {
    Tape& t = *a.tape;
    if (s.rows() != 1 || s.cols() != 1) throw ValidationError("scale_by: scale must be 1x1");
    const double sv = s.value()(0, 0);
    return t.record(a.value() * sv, {a.id, s.id}, [a, s](Tape& t, const Matrix& g) {
        const double sv = t.value(s)(0, 0);
        if (t.requires_grad(a.id)) t.accumulate(a.id, g * sv);
        if (t.requires_grad(s.id)) t.accumulate(s.id, Matrix::Constant(1, 1, g.cwiseProduct(t.value(a)).sum()));
    });
}

Var gelu(Var a) {
    Matrix out = a.value().unaryExpr([](double x) { return gelu_value(x); });
    return a.tape->record(std::move(out), {a.id}, [a](Tape& t, const Matrix& g) {
        t.accumulate(a.id, g.cwiseProduct(t.value(a).unaryExpr([](double x) { return gelu_derivative(x); })));
    });
}

Var sigmoid(Var a) {
    Matrix out = a.value().unaryExpr([](double x) { return sigmoid_value(x); });
    Matrix y = out;
    return a.tape->record(std::move(out), {a.id}, [a, y](Tape& t, const Matrix& g) {
        t.accumulate(a.id, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
    });
}

Var softmax_rows(Var a) {
    const Matrix& x = a.value();
    Matrix y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        auto e = (x.row(i).array() - m).exp();
        y.row(i) = e / e.sum();
    }
    Matrix yc = y;
    return a.tape->record(std::move(y), {a.id}, [a, yc](Tape& t, const Matrix& g) {
        Matrix dx(yc.rows(), yc.cols());
        for (Eigen::Index i = 0; i < yc.rows(); ++i) {
            const double dot = g.row(i).dot(yc.row(i));
            dx.row(i) = yc.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
        }
        t.accumulate(a.id, dx);
    });
}

Var layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
    const Matrix& xv = x.value();
    const Eigen::Index n = xv.rows(), d = xv.cols();
    require(gamma.rows() == 1 && gamma.cols() == d, "layer_norm gamma", xv, gamma.value());
    require(beta.rows() == 1 && beta.cols() == d, "layer_norm beta", xv, beta.value());
    Matrix xhat(n, d);
    Eigen::VectorXd inv_std(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = xv.row(i).mean();
        const double var = (xv.row(i).array() - mean).square().mean();
        inv_std(i) = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (xv.row(i).array() - mean) * inv_std(i);
    }
    Matrix out = xhat;
    for (Eigen::Index i = 0; i < n; ++i)
        out.row(i) = xhat.row(i).cwiseProduct(gamma.value().row(0)) + beta.value().row(0);
    return x.tape->record(std::move(out), {x.id, gamma.id, beta.id},
                          [x, gamma, beta, xhat, inv_std](Tape& t, const Matrix& g) {
                              const Eigen::Index n = xhat.rows(), d = xhat.cols();
                              if (t.requires_grad(gamma.id)) t.accumulate(gamma.id, g.cwiseProduct(xhat).colwise().sum());
                              if (t.requires_grad(beta.id)) t.accumulate(beta.id, g.colwise().sum());
                              if (!t.requires_grad(x.id)) return;
                              Matrix dx(n, d);
                              const auto& gm = t.value(gamma);
                              for (Eigen::Index i = 0; i < n; ++i) {
                                  Eigen::RowVectorXd gh = g.row(i).cwiseProduct(gm.row(0));
                                  const double mean_gh = gh.mean();
                                  const double mean_ghx = gh.dot(xhat.row(i)) / static_cast<double>(d);
                                  dx.row(i) = inv_std(i) *
                                              (gh.array() - mean_gh - xhat.row(i).array() * mean_ghx).matrix();
                              }
                              t.accumulate(x.id, dx);
                          });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_cols: no inputs");
    Tape& t = *parts.front().tape;
    const Eigen::Index rows = parts.front().rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        require(p.rows() == rows, "concat_cols", parts.front().value(), p.value());
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::vector<std::size_t> ids;
    Eigen::Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
        ids.push_back(p.id);
    }
    return t.record(std::move(out), ids, [parts](Tape& t, const Matrix& g) {
        Eigen::Index c = 0;
        for (const auto& p : parts) {
            const Eigen::Index w = t.value(p).cols();
            if (t.requires_grad(p.id)) t.accumulate(p.id, g.middleCols(c, w));
            c += w;
        }
    });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw ValidationError("slice_cols: out of range");
    return a.tape->record(a.value().middleCols(start, count), {a.id}, [a, start, count](Tape& t, const Matrix& g) {
        Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
        full.middleCols(start, count) = g;
        t.accumulate(a.id, full);
    });
}

Var row(Var a, Eigen::Index i) {
    if (i < 0 || i >= a.rows()) throw ValidationError("row: out of range");
    return a.tape->record(a.value().row(i), {a.id}, [a, i](Tape& t, const Matrix& g) {
        Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
        full.row(i) = g.row(0);
        t.accumulate(a.id, full);
    });
}

Var first_rows(Var a, Eigen::Index count) {
    if (count < 0 || count > a.rows()) throw ValidationError("first_rows: out of range");
    return a.tape->record(a.value().topRows(count), {a.id}, [a, count](Tape& t, const Matrix& g) {
        Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
        full.topRows(count) = g;
        t.accumulate(a.id, full);
    });
}

Var transpose(Var a) {
    return a.tape->record(a.value().transpose(), {a.id},
                          [a](Tape& t, const Matrix& g) { t.accumulate(a.id, g.transpose()); });
}

Var gather_rows(Var table, const std::vector<std::size_t>& ids) {
    const Matrix& tv = table.value();
    Matrix out(static_cast<Eigen::Index>(ids.size()), tv.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= static_cast<std::size_t>(tv.rows())) throw ValidationError("gather_rows: index out of range");
        out.row(static_cast<Eigen::Index>(i)) = tv.row(static_cast<Eigen::Index>(ids[i]));
    }
    return table.tape->record(std::move(out), {table.id}, [table, ids](Tape& t, const Matrix& g) {
        const Matrix& tv = t.value(table);
        Matrix full = Matrix::Zero(tv.rows(), tv.cols());
        for (std::size_t i = 0; i < ids.size(); ++i)
            full.row(static_cast<Eigen::Index>(ids[i])) += g.row(static_cast<Eigen::Index>(i));
        t.accumulate(table.id, full);
    });
}

Var dropout(Var a, const Matrix& mask) {
    require(mask.rows() == a.rows() && mask.cols() == a.cols(), "dropout", a.value(), mask);
    return a.tape->record(a.value().cwiseProduct(mask), {a.id},
                          [a, mask](Tape& t, const Matrix& g) { t.accumulate(a.id, g.cwiseProduct(mask)); });
}

Var softmax_cross_entropy(Var logits, std::size_t target) {
    const Matrix& z = logits.value();
    if (z.rows() != 1 || target >= static_cast<std::size_t>(z.cols()))
        throw ValidationError("softmax_cross_entropy: bad logits shape or target");
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    Matrix p = (z.array() - lse).exp().matrix();
    const double loss = lse - z(0, static_cast<Eigen::Index>(target));
    return logits.tape->record(Matrix::Constant(1, 1, loss), {logits.id},
                               [logits, p, target](Tape& t, const Matrix& g) {
                                   Matrix d = p;
                                   d(0, static_cast<Eigen::Index>(target)) -= 1.0;
                                   t.accumulate(logits.id, d * g(0, 0));
                               });
}

Var bce_with_logits(Var logits, const Matrix& targets) {
    const Matrix& z = logits.value();
    require(z.rows() == 1 && targets.rows() == 1 && targets.cols() == z.cols(), "bce_with_logits", z, targets);
    const double L = static_cast<double>(z.cols());
    double loss = 0.0;
    Matrix p(1, z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double x = z(0, j), y = targets(0, j);
        // log(1 + exp(-|x|)) form stays finite for large |x|.
        loss += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
        p(0, j) = sigmoid_value(x);
    }
    loss /= L;
    return logits.tape->record(Matrix::Constant(1, 1, loss), {logits.id},
                               [logits, p, targets, L](Tape& t, const Matrix& g) {
                                   t.accumulate(logits.id, (p - targets) * (g(0, 0) / L));
                               });
}

}  // namespace ad
}  // namespace emosig::fusion
