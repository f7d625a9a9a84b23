#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace emosig::fusion {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A trainable tensor. `grad` accumulates across backward passes until zeroed.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool decay = true;  // receives decoupled weight decay

    Parameter() = default;
    Parameter(std::string n, Matrix v, bool wd = true)
        : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())), decay(wd) {}

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node recorded on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so walking them
// backwards is a valid topological order.
class Tape {
public:
    using Backward = std::function<void(Tape&, const Matrix& upstream)>;

    Var constant(Matrix value);
    Var param(Parameter& p);
    Var record(Matrix value, std::vector<std::size_t> parents, Backward backward);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    // Gradient of the last backward() target w.r.t. a node (zero if unreachable).
    Matrix grad(Var v) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    // Adds to the gradient of node `id` (no-op for constants).
    void accumulate(std::size_t id, const Matrix& g);

    // `loss` must be 1x1. Parameter grads accumulate into Parameter::grad.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool has_grad = false;
        bool requires_grad = false;
        Parameter* param = nullptr;
        Backward backward;
    };
    std::vector<Node> nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var add_row(Var a, Var row);  // broadcast a 1 x c row over every row of a
Var mul(Var a, Var b);        // elementwise
Var scale(Var a, double s);
Var scale_by(Var a, Var s);   // s is 1 x 1
Var gelu(Var a);              // exact: x * Phi(x)
Var sigmoid(Var a);
Var softmax_rows(Var a);
Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var row(Var a, Eigen::Index i);
Var transpose(Var a);
Var gather_rows(Var table, const std::vector<std::size_t>& ids);
Var first_rows(Var a, Eigen::Index count);
Var dropout(Var a, const Matrix& mask);  // mask already holds 0 or 1/(1-p)

// Mean softmax cross-entropy of a 1 x L logit row against one class.
Var softmax_cross_entropy(Var logits, std::size_t target);
// Mean binary cross-entropy with logits over the L labels.
Var bce_with_logits(Var logits, const Matrix& targets);

}  // namespace ad

// Scalar helpers shared by the autodiff ops and plain forward code.
double gelu_value(double x);
double gelu_derivative(double x);
double sigmoid_value(double x);

}  // namespace emosig::fusion
