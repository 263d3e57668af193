#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "c2l/matrix.hpp"
#include "c2l/rng.hpp"

namespace c2l {

enum class Mode { train, eval };

enum class Activation { sigmoid, tanh, relu };

// One vertex of a reverse-mode computation graph. Values are immutable after
// creation; only `grad` mutates, and only during a backward pass. A graph is
// confined to one thread, distinct graphs may run concurrently.
struct Node {
    Mat value;
    Mat grad; // allocated lazily, same shape as value
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> parents;
    // Pulls from this->grad and accumulates into the parents' grads.
    std::function<void(Node&)> backprop;

    Mat& grad_ref() {
        if (grad.size() == 0) {
            grad = Mat::Zero(value.rows(), value.cols());
        }
        return grad;
    }
};

// Cheap handle to a Node. Ops are free functions over Values; an op whose
// inputs all have requires_grad == false produces a detached result (no
// parents, no closure), which is what eval-mode forwards run on.
class Value {
public:
    Value() = default;
    explicit Value(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Value leaf(Mat m, bool requires_grad = false) {
        auto n = std::make_shared<Node>();
        n->value = std::move(m);
        n->requires_grad = requires_grad;
        return Value(std::move(n));
    }

    static Value constant(Mat m) { return leaf(std::move(m), false); }

    bool defined() const { return node_ != nullptr; }
    const Mat& val() const { return node_->value; }
    Mat& grad() const { return node_->grad_ref(); }
    bool requires_grad() const { return node_->requires_grad; }
    void zero_grad() const { node_->grad = Mat::Zero(node_->value.rows(), node_->value.cols()); }
    const std::shared_ptr<Node>& node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// --- graph construction -------------------------------------------------

Value matmul(const Value& a, const Value& b);
Value add(const Value& a, const Value& b);          // same shape
Value sub(const Value& a, const Value& b);          // same shape
Value mul(const Value& a, const Value& b);          // elementwise, same shape
Value scale(const Value& a, Scalar c);              // constant scalar multiply

// a (m x n) plus a broadcast b of shape (1 x 1), (1 x n) or (m x 1).
Value add_broadcast(const Value& a, const Value& b);

Value apply_activation(const Value& x, Activation kind);
inline Value sigmoid(const Value& x) { return apply_activation(x, Activation::sigmoid); }
inline Value tanh_act(const Value& x) { return apply_activation(x, Activation::tanh); }
inline Value relu(const Value& x) { return apply_activation(x, Activation::relu); }

// Row-wise softmax with max-subtraction; temperature divides the scores
// before exponentiation. With causal == true the input must be square and
// each row i only distributes mass over columns j <= i, the rest are exact
// zeros.
Value softmax_rows(const Value& scores, Scalar temperature, bool causal);

// Causal (lower-triangular-allowed) softmax over an n x n score matrix.
Value masked_softmax(const Value& scores, Scalar temperature);

// Row-wise layer normalization with population variance, then gain/bias
// (both 1 x n).
Value layer_norm(const Value& x, const Value& gain, const Value& bias, Scalar eps);

// Inverted dropout: train mode zeroes each element with probability p and
// scales survivors by 1/(1-p); eval mode is the identity.
Value dropout(const Value& x, Scalar p, Mode mode, Rng& rng);

Value transpose(const Value& a);
Value concat_rows(std::span<const Value> parts);
Value concat_cols(std::span<const Value> parts);
Value slice_rows(const Value& a, Index first, Index count);
Value slice_cols(const Value& a, Index first, Index count);
inline Value row(const Value& a, Index i) { return slice_rows(a, i, 1); }

Value row_sums(const Value& a);                    // m x n -> m x 1
Value sqrt_elems(const Value& a);                  // elementwise, a >= 0
Value clamp_min(const Value& a, Scalar floor);     // elementwise max(a, floor)
Value div_colwise(const Value& a, const Value& b); // a (m x n) / b (m x 1) per row
Value sum_all(const Value& a);                     // -> 1 x 1

// Mean squared error against a constant target of the same shape.
Value mse_loss(const Value& pred, const Mat& target);

// --- backward -----------------------------------------------------------

// Reverse-topological gradient accumulation from a scalar (1 x 1) output.
// Gradients accumulate across calls; reset leaves explicitly between steps.
void backward(const Value& output);

} // namespace c2l
