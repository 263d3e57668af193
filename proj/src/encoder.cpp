#include "c2l/encoder.hpp"

#include <vector>

namespace c2l {

Value gru_step(const Value& x, const Value& h, const GruValues& p) {
    Value reset = sigmoid(add(add_broadcast(matmul(x, p.w_reset), p.b_in_reset),
                              add_broadcast(matmul(h, p.u_reset), p.b_hid_reset)));
    Value update = sigmoid(add(add_broadcast(matmul(x, p.w_update), p.b_in_update),
                               add_broadcast(matmul(h, p.u_update), p.b_hid_update)));
    // candidate: hidden-side affine term is gated by reset before tanh
    Value hid_affine = add_broadcast(matmul(h, p.u_cand), p.b_hid_cand);
    Value cand = tanh_act(add(add_broadcast(matmul(x, p.w_cand), p.b_in_cand),
                              mul(reset, hid_affine)));
    Value keep = sub(Value::constant(Mat::Ones(1, update.val().cols())), update);
    return add(mul(keep, h), mul(update, cand));
}

Value gru_forward(const Value& tokens, const GruValues& p) {
    const Index steps = tokens.val().rows();
    if (steps < 1) {
        throw ShapeError("gru_forward: empty token sequence");
    }
    const Index hidden_dim = p.u_reset.val().rows();
    Value h = Value::constant(Mat::Zero(1, hidden_dim));
    std::vector<Value> states;
    states.reserve(steps);
    for (Index n = 0; n < steps; ++n) {
        h = gru_step(row(tokens, n), h, p);
        states.push_back(h);
    }
    return concat_rows(states);
}

AttentionResult causal_cosine_attention_detail(const Value& hidden, Scalar temperature,
                                               Scalar norm_floor) {
    if (!(temperature > 0.0)) {
        throw ParamError("causal_cosine_attention: temperature must be positive, got " +
                         std::to_string(temperature));
    }
    Value sumsq = row_sums(mul(hidden, hidden));
    Value norms = sqrt_elems(clamp_min(sumsq, norm_floor * norm_floor));
    Value unit = div_colwise(hidden, norms);
    Value sim = matmul(unit, transpose(unit));
    Value weights = masked_softmax(sim, temperature);
    Value output = matmul(weights, hidden);
    return AttentionResult{output, weights};
}

Value causal_cosine_attention(const Value& hidden, Scalar temperature, Scalar norm_floor) {
    return causal_cosine_attention_detail(hidden, temperature, norm_floor).output;
}

Value take_context(const Value& attended) {
    const Index rows = attended.val().rows();
    if (rows < 1) {
        throw ShapeError("take_context: empty sequence");
    }
    return row(attended, rows - 1);
}

} // namespace c2l
