#include "c2l/autodiff.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

namespace c2l {

namespace {

std::shared_ptr<Node> make_node(Mat value, const char* op,
                                std::vector<std::shared_ptr<Node>> parents) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->op = op;
    for (const auto& p : parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    if (n->requires_grad) {
        n->parents = std::move(parents);
    }
    return n;
}

std::shared_ptr<Node> make_node(Mat value, const char* op, const Value& a) {
    return make_node(std::move(value), op, std::vector<std::shared_ptr<Node>>{a.node()});
}

std::shared_ptr<Node> make_node(Mat value, const char* op, const Value& a, const Value& b) {
    return make_node(std::move(value), op,
                     std::vector<std::shared_ptr<Node>>{a.node(), b.node()});
}

// Largest double below 1; sigmoid/tanh outputs are clamped to the open
// interval so saturated logits cannot round to an endpoint.
const Scalar kBelowOne = std::nextafter(1.0, 0.0);
const Scalar kAboveZero = std::numeric_limits<Scalar>::min();

} // namespace

Value matmul(const Value& a, const Value& b) {
    require_matmul_compatible(a.val(), b.val());
    Mat y(a.val().rows(), b.val().cols());
    y.noalias() = a.val() * b.val();
    auto n = make_node(std::move(y), "matmul", a, b);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        Node* pb = b.node().get();
        n->backprop = [pa, pb](Node& self) {
            if (pa->requires_grad) {
                pa->grad_ref().noalias() += self.grad * pb->value.transpose();
            }
            if (pb->requires_grad) {
                pb->grad_ref().noalias() += pa->value.transpose() * self.grad;
            }
        };
    }
    return Value(n);
}

Value add(const Value& a, const Value& b) {
    require_same_shape(a.val(), b.val(), "add");
    auto n = make_node(a.val() + b.val(), "add", a, b);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        Node* pb = b.node().get();
        n->backprop = [pa, pb](Node& self) {
            if (pa->requires_grad) pa->grad_ref() += self.grad;
            if (pb->requires_grad) pb->grad_ref() += self.grad;
        };
    }
    return Value(n);
}

Value sub(const Value& a, const Value& b) {
    require_same_shape(a.val(), b.val(), "sub");
    auto n = make_node(a.val() - b.val(), "sub", a, b);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        Node* pb = b.node().get();
        n->backprop = [pa, pb](Node& self) {
            if (pa->requires_grad) pa->grad_ref() += self.grad;
            if (pb->requires_grad) pb->grad_ref() -= self.grad;
        };
    }
    return Value(n);
}

Value mul(const Value& a, const Value& b) {
    require_same_shape(a.val(), b.val(), "mul");
    auto n = make_node(a.val().cwiseProduct(b.val()), "mul", a, b);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        Node* pb = b.node().get();
        n->backprop = [pa, pb](Node& self) {
            if (pa->requires_grad) pa->grad_ref() += self.grad.cwiseProduct(pb->value);
            if (pb->requires_grad) pb->grad_ref() += self.grad.cwiseProduct(pa->value);
        };
    }
    return Value(n);
}

Value scale(const Value& a, Scalar c) {
    auto n = make_node(a.val() * c, "scale", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa, c](Node& self) { pa->grad_ref() += self.grad * c; };
    }
    return Value(n);
}

Value add_broadcast(const Value& a, const Value& b) {
    const Mat& av = a.val();
    const Mat& bv = b.val();
    const bool scalar = bv.rows() == 1 && bv.cols() == 1;
    const bool rowvec = bv.rows() == 1 && bv.cols() == av.cols();
    const bool colvec = bv.cols() == 1 && bv.rows() == av.rows();
    if (!scalar && !rowvec && !colvec) {
        throw ShapeError("add_broadcast: cannot broadcast " + shape_str(bv) + " onto " +
                         shape_str(av));
    }
    Mat y = av;
    if (scalar) {
        y.array() += bv(0, 0);
    } else if (rowvec) {
        y.rowwise() += bv.row(0);
    } else {
        y.colwise() += bv.col(0);
    }
    auto n = make_node(std::move(y), "add_broadcast", a, b);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        Node* pb = b.node().get();
        n->backprop = [pa, pb, scalar, rowvec](Node& self) {
            if (pa->requires_grad) pa->grad_ref() += self.grad;
            if (pb->requires_grad) {
                Mat& gb = pb->grad_ref();
                if (scalar) {
                    gb(0, 0) += self.grad.sum();
                } else if (rowvec) {
                    gb.row(0) += self.grad.colwise().sum();
                } else {
                    gb.col(0) += self.grad.rowwise().sum();
                }
            }
        };
    }
    return Value(n);
}

Value apply_activation(const Value& x, Activation kind) {
    const Mat& xv = x.val();
    Mat y(xv.rows(), xv.cols());
    switch (kind) {
    case Activation::sigmoid:
        y = xv.unaryExpr([](Scalar v) {
            Scalar s;
            if (v >= 0.0) {
                s = 1.0 / (1.0 + std::exp(-v));
            } else {
                const Scalar e = std::exp(v);
                s = e / (1.0 + e);
            }
            return std::min(std::max(s, kAboveZero), kBelowOne);
        });
        break;
    case Activation::tanh:
        y = xv.unaryExpr([](Scalar v) {
            return std::min(std::max(std::tanh(v), -kBelowOne), kBelowOne);
        });
        break;
    case Activation::relu:
        y = xv.cwiseMax(0.0);
        break;
    }
    auto n = make_node(std::move(y), "activation", x);
    if (n->requires_grad) {
        Node* pa = x.node().get();
        n->backprop = [pa, kind](Node& self) {
            const Mat& y = self.value;
            switch (kind) {
            case Activation::sigmoid:
                pa->grad_ref().array() +=
                    self.grad.array() * y.array() * (1.0 - y.array());
                break;
            case Activation::tanh:
                pa->grad_ref().array() += self.grad.array() * (1.0 - y.array().square());
                break;
            case Activation::relu:
                pa->grad_ref().array() +=
                    self.grad.array() * (pa->value.array() > 0.0).cast<Scalar>();
                break;
            }
        };
    }
    return Value(n);
}

Value softmax_rows(const Value& scores, Scalar temperature, bool causal) {
    if (!(temperature > 0.0)) {
        throw ParamError("softmax: temperature must be positive, got " +
                         std::to_string(temperature));
    }
    const Mat& s = scores.val();
    if (causal && s.rows() != s.cols()) {
        throw ShapeError("masked_softmax: causal mask needs a square matrix, got " +
                         shape_str(s));
    }
    const Index rows = s.rows();
    const Index cols = s.cols();
    Mat y = Mat::Zero(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Index last = causal ? i : cols - 1;
        Scalar maxv = -std::numeric_limits<Scalar>::infinity();
        for (Index j = 0; j <= last; ++j) {
            maxv = std::max(maxv, s(i, j) / temperature);
        }
        Scalar denom = 0.0;
        for (Index j = 0; j <= last; ++j) {
            const Scalar w = std::exp(s(i, j) / temperature - maxv);
            y(i, j) = w;
            denom += w;
        }
        for (Index j = 0; j <= last; ++j) {
            y(i, j) /= denom;
        }
    }
    auto n = make_node(std::move(y), "softmax", scores);
    if (n->requires_grad) {
        Node* pa = scores.node().get();
        n->backprop = [pa, temperature, causal](Node& self) {
            const Mat& y = self.value;
            const Mat& g = self.grad;
            Mat& gx = pa->grad_ref();
            for (Index i = 0; i < y.rows(); ++i) {
                const Index last = causal ? i : y.cols() - 1;
                Scalar dot = 0.0;
                for (Index j = 0; j <= last; ++j) {
                    dot += g(i, j) * y(i, j);
                }
                for (Index j = 0; j <= last; ++j) {
                    gx(i, j) += y(i, j) * (g(i, j) - dot) / temperature;
                }
            }
        };
    }
    return Value(n);
}

Value masked_softmax(const Value& scores, Scalar temperature) {
    return softmax_rows(scores, temperature, true);
}

Value layer_norm(const Value& x, const Value& gain, const Value& bias, Scalar eps) {
    const Mat& xv = x.val();
    const Index cols = xv.cols();
    if (gain.val().rows() != 1 || gain.val().cols() != cols || bias.val().rows() != 1 ||
        bias.val().cols() != cols) {
        throw ShapeError("layer_norm: gain/bias must be 1x" + std::to_string(cols) +
                         ", got " + shape_str(gain.val()) + " and " + shape_str(bias.val()));
    }
    const Index rows = xv.rows();
    Mat xhat(rows, cols);
    Mat inv_std(rows, 1);
    for (Index i = 0; i < rows; ++i) {
        const Scalar mean = xv.row(i).mean();
        const Scalar var = (xv.row(i).array() - mean).square().sum() / Scalar(cols);
        const Scalar inv = 1.0 / std::sqrt(var + eps);
        inv_std(i, 0) = inv;
        xhat.row(i) = (xv.row(i).array() - mean) * inv;
    }
    Mat y = xhat;
    y.array().rowwise() *= gain.val().row(0).array();
    y.rowwise() += bias.val().row(0);
    auto n = make_node(std::move(y), "layer_norm",
                       std::vector<std::shared_ptr<Node>>{x.node(), gain.node(), bias.node()});
    if (n->requires_grad) {
        Node* px = x.node().get();
        Node* pg = gain.node().get();
        Node* pb = bias.node().get();
        n->backprop = [px, pg, pb, xhat, inv_std](Node& self) {
            const Mat& g = self.grad;
            const Index rows = g.rows();
            const Index cols = g.cols();
            if (pg->requires_grad) {
                pg->grad_ref().row(0) += g.cwiseProduct(xhat).colwise().sum();
            }
            if (pb->requires_grad) {
                pb->grad_ref().row(0) += g.colwise().sum();
            }
            if (px->requires_grad) {
                Mat& gx = px->grad_ref();
                for (Index i = 0; i < rows; ++i) {
                    Eigen::Array<Scalar, 1, Eigen::Dynamic> w =
                        g.row(i).array() * pg->value.row(0).array();
                    const Scalar mw = w.mean();
                    const Scalar mwx = (w * xhat.row(i).array()).mean();
                    gx.row(i).array() +=
                        inv_std(i, 0) * (w - mw - xhat.row(i).array() * mwx);
                }
                (void)cols;
            }
        };
    }
    return Value(n);
}

Value dropout(const Value& x, Scalar p, Mode mode, Rng& rng) {
    if (p < 0.0 || p >= 1.0) {
        throw ParamError("dropout: p must lie in [0, 1), got " + std::to_string(p));
    }
    if (mode == Mode::eval || p == 0.0) {
        return x;
    }
    const Mat& xv = x.val();
    const Scalar keep_scale = 1.0 / (1.0 - p);
    Mat mask(xv.rows(), xv.cols());
    for (Index i = 0; i < xv.rows(); ++i) {
        for (Index j = 0; j < xv.cols(); ++j) {
            mask(i, j) = rng.uniform() < p ? 0.0 : keep_scale;
        }
    }
    auto n = make_node(xv.cwiseProduct(mask), "dropout", x);
    if (n->requires_grad) {
        Node* pa = x.node().get();
        n->backprop = [pa, mask](Node& self) {
            pa->grad_ref() += self.grad.cwiseProduct(mask);
        };
    }
    return Value(n);
}

Value transpose(const Value& a) {
    auto n = make_node(a.val().transpose(), "transpose", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa](Node& self) { pa->grad_ref() += self.grad.transpose(); };
    }
    return Value(n);
}

Value concat_rows(std::span<const Value> parts) {
    if (parts.empty()) {
        throw ParamError("concat_rows: no parts");
    }
    const Index cols = parts[0].val().cols();
    Index rows = 0;
    std::vector<std::shared_ptr<Node>> parents;
    parents.reserve(parts.size());
    for (const Value& p : parts) {
        if (p.val().cols() != cols) {
            throw ShapeError("concat_rows: column mismatch, " + shape_str(p.val()) +
                             " vs " + std::to_string(cols) + " columns");
        }
        rows += p.val().rows();
        parents.push_back(p.node());
    }
    Mat y(rows, cols);
    Index at = 0;
    for (const Value& p : parts) {
        y.middleRows(at, p.val().rows()) = p.val();
        at += p.val().rows();
    }
    auto n = make_node(std::move(y), "concat_rows", std::move(parents));
    if (n->requires_grad) {
        n->backprop = [](Node& self) {
            Index at = 0;
            for (auto& parent : self.parents) {
                const Index r = parent->value.rows();
                if (parent->requires_grad) {
                    parent->grad_ref() += self.grad.middleRows(at, r);
                }
                at += r;
            }
        };
    }
    return Value(n);
}

Value concat_cols(std::span<const Value> parts) {
    if (parts.empty()) {
        throw ParamError("concat_cols: no parts");
    }
    const Index rows = parts[0].val().rows();
    Index cols = 0;
    std::vector<std::shared_ptr<Node>> parents;
    parents.reserve(parts.size());
    for (const Value& p : parts) {
        if (p.val().rows() != rows) {
            throw ShapeError("concat_cols: row mismatch, " + shape_str(p.val()) + " vs " +
                             std::to_string(rows) + " rows");
        }
        cols += p.val().cols();
        parents.push_back(p.node());
    }
    Mat y(rows, cols);
    Index at = 0;
    for (const Value& p : parts) {
        y.middleCols(at, p.val().cols()) = p.val();
        at += p.val().cols();
    }
    auto n = make_node(std::move(y), "concat_cols", std::move(parents));
    if (n->requires_grad) {
        n->backprop = [](Node& self) {
            Index at = 0;
            for (auto& parent : self.parents) {
                const Index c = parent->value.cols();
                if (parent->requires_grad) {
                    parent->grad_ref() += self.grad.middleCols(at, c);
                }
                at += c;
            }
        };
    }
    return Value(n);
}

Value slice_rows(const Value& a, Index first, Index count) {
    const Mat& av = a.val();
    if (first < 0 || count < 1 || first + count > av.rows()) {
        throw ShapeError("slice_rows: rows [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of " + shape_str(av));
    }
    auto n = make_node(av.middleRows(first, count), "slice_rows", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa, first, count](Node& self) {
            pa->grad_ref().middleRows(first, count) += self.grad;
        };
    }
    return Value(n);
}

Value slice_cols(const Value& a, Index first, Index count) {
    const Mat& av = a.val();
    if (first < 0 || count < 1 || first + count > av.cols()) {
        throw ShapeError("slice_cols: cols [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of " + shape_str(av));
    }
    auto n = make_node(av.middleCols(first, count), "slice_cols", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa, first, count](Node& self) {
            pa->grad_ref().middleCols(first, count) += self.grad;
        };
    }
    return Value(n);
}

Value row_sums(const Value& a) {
    Mat y = a.val().rowwise().sum();
    auto n = make_node(std::move(y), "row_sums", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa](Node& self) {
            pa->grad_ref().colwise() += self.grad.col(0);
        };
    }
    return Value(n);
}

Value sqrt_elems(const Value& a) {
    Mat y = a.val().cwiseSqrt();
    auto n = make_node(std::move(y), "sqrt", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa](Node& self) {
            pa->grad_ref().array() += self.grad.array() * 0.5 / self.value.array();
        };
    }
    return Value(n);
}

Value clamp_min(const Value& a, Scalar floor) {
    Mat y = a.val().cwiseMax(floor);
    auto n = make_node(std::move(y), "clamp_min", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa, floor](Node& self) {
            pa->grad_ref().array() +=
                self.grad.array() * (pa->value.array() > floor).cast<Scalar>();
        };
    }
    return Value(n);
}

Value div_colwise(const Value& a, const Value& b) {
    const Mat& av = a.val();
    const Mat& bv = b.val();
    if (bv.cols() != 1 || bv.rows() != av.rows()) {
        throw ShapeError("div_colwise: divisor must be " + std::to_string(av.rows()) +
                         "x1, got " + shape_str(bv));
    }
    Mat y = av.array().colwise() / bv.col(0).array();
    auto n = make_node(std::move(y), "div_colwise", a, b);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        Node* pb = b.node().get();
        n->backprop = [pa, pb](Node& self) {
            const Mat& g = self.grad;
            if (pa->requires_grad) {
                pa->grad_ref().array() += g.array().colwise() / pb->value.col(0).array();
            }
            if (pb->requires_grad) {
                Mat gy = g.cwiseProduct(self.value);
                pb->grad_ref().col(0).array() -=
                    gy.rowwise().sum().array() / pb->value.col(0).array();
            }
        };
    }
    return Value(n);
}

Value sum_all(const Value& a) {
    Mat y(1, 1);
    y(0, 0) = a.val().sum();
    auto n = make_node(std::move(y), "sum_all", a);
    if (n->requires_grad) {
        Node* pa = a.node().get();
        n->backprop = [pa](Node& self) {
            pa->grad_ref().array() += self.grad(0, 0);
        };
    }
    return Value(n);
}

Value mse_loss(const Value& pred, const Mat& target) {
    const Mat& pv = pred.val();
    if (pv.size() == 0) {
        throw ParamError("mse_loss: empty batch");
    }
    require_same_shape(pv, target, "mse_loss");
    const Scalar m = static_cast<Scalar>(pv.size());
    Mat y(1, 1);
    y(0, 0) = (pv - target).array().square().sum() / m;
    auto n = make_node(std::move(y), "mse_loss", pred);
    if (n->requires_grad) {
        Node* pa = pred.node().get();
        Mat t = target;
        n->backprop = [pa, t, m](Node& self) {
            pa->grad_ref() += self.grad(0, 0) * 2.0 / m * (pa->value - t);
        };
    }
    return Value(n);
}

void backward(const Value& output) {
    if (!output.defined()) {
        throw Error("backward: undefined output");
    }
    Node* root = output.node().get();
    if (root->value.rows() != 1 || root->value.cols() != 1) {
        throw ShapeError("backward: output must be a 1x1 scalar, got " +
                         shape_str(root->value));
    }
    root->grad_ref()(0, 0) += 1.0;
    if (!root->requires_grad) {
        return;
    }

    // Iterative post-order DFS over grad-requiring parents; reversing it
    // gives a valid reverse-topological schedule.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    struct Frame {
        Node* node;
        std::size_t next;
    };
    std::vector<Frame> stack;
    stack.push_back({root, 0});
    visited.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.node->parents.size()) {
            Node* p = f.node->parents[f.next++].get();
            if (p->requires_grad && visited.insert(p).second) {
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop) {
            n->backprop(*n);
        }
    }
}

} // namespace c2l
