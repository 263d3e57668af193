#pragma once

#include <string>

#include "c2l/autodiff.hpp"
#include "c2l/features.hpp"
#include "c2l/matrix.hpp"

namespace c2l {

// Gated recurrent weights, two-bias convention: input-side and hidden-side
// bias vectors; the hidden-side candidate bias sits inside the term that is
// gated by the reset gate.
template <class T>
struct GruWeightsT {
    T w_reset, w_update, w_cand;  // in x d
    T u_reset, u_update, u_cand;  // d x d
    T b_in_reset, b_in_update, b_in_cand;    // 1 x d
    T b_hid_reset, b_hid_update, b_hid_cand; // 1 x d

    template <class Self, class F>
    static void visit_impl(Self& self, const std::string& prefix, F&& f) {
        f(prefix + ".w_reset", self.w_reset, TensorKind::weight);
        f(prefix + ".w_update", self.w_update, TensorKind::weight);
        f(prefix + ".w_cand", self.w_cand, TensorKind::weight);
        f(prefix + ".u_reset", self.u_reset, TensorKind::weight);
        f(prefix + ".u_update", self.u_update, TensorKind::weight);
        f(prefix + ".u_cand", self.u_cand, TensorKind::weight);
        f(prefix + ".b_in_reset", self.b_in_reset, TensorKind::bias);
        f(prefix + ".b_in_update", self.b_in_update, TensorKind::bias);
        f(prefix + ".b_in_cand", self.b_in_cand, TensorKind::bias);
        f(prefix + ".b_hid_reset", self.b_hid_reset, TensorKind::bias);
        f(prefix + ".b_hid_update", self.b_hid_update, TensorKind::bias);
        f(prefix + ".b_hid_cand", self.b_hid_cand, TensorKind::bias);
    }
    template <class F>
    void visit(const std::string& prefix, F&& f) {
        visit_impl(*this, prefix, f);
    }
    template <class F>
    void visit(const std::string& prefix, F&& f) const {
        visit_impl(*this, prefix, f);
    }
};

using GruWeights = GruWeightsT<Mat>;
using GruValues = GruWeightsT<Value>;

// One gated recurrent step: x (1 x in), h (1 x d) -> next hidden (1 x d).
Value gru_step(const Value& x, const Value& h, const GruValues& p);

// Runs the cell over the rows of a token sequence starting from a zero
// hidden state; returns the stacked hidden states (rows x d).
Value gru_forward(const Value& tokens, const GruValues& p);

struct AttentionResult {
    Value output;  // rows x d
    Value weights; // rows x rows, strictly lower-triangular-allowed
};

// Cosine-similarity attention over hidden states with a causal mask; each
// output row is the attention-weighted sum of the raw (un-normalized)
// hidden states up to and including its own position. Row norms are floored
// at `norm_floor` so zero rows stay well-defined.
AttentionResult causal_cosine_attention_detail(const Value& hidden, Scalar temperature,
                                               Scalar norm_floor = 1e-12);

Value causal_cosine_attention(const Value& hidden, Scalar temperature,
                              Scalar norm_floor = 1e-12);

// Last row of the attended sequence.
Value take_context(const Value& attended);

} // namespace c2l
