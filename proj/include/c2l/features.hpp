#pragma once

#include <array>
#include <string>

#include "c2l/autodiff.hpp"
#include "c2l/matrix.hpp"

namespace c2l {

enum class TensorKind { weight, bias, gain };

// Learnable tensors of one per-signal branch: time-step projection, attention
// scoring, and the two-layer coefficient network. Instantiated with Mat for
// storage and with Value when bound into a computation graph.
template <class T>
struct SignalExtractorParamsT {
    T pool_proj_w;  // 1 x d, scalar sample -> hidden
    T pool_proj_b;  // 1 x d
    T pool_score_w; // d x 1, hidden -> attention score
    T pool_score_b; // 1 x 1
    T coeff_w1;     // d x d
    T coeff_b1;     // 1 x d
    T coeff_w2;     // d x k_theta
    T coeff_b2;     // 1 x k_theta

    template <class Self, class F>
    static void visit_impl(Self& self, const std::string& prefix, F&& f) {
        f(prefix + ".pool_proj_w", self.pool_proj_w, TensorKind::weight);
        f(prefix + ".pool_proj_b", self.pool_proj_b, TensorKind::bias);
        f(prefix + ".pool_score_w", self.pool_score_w, TensorKind::weight);
        f(prefix + ".pool_score_b", self.pool_score_b, TensorKind::bias);
        f(prefix + ".coeff_w1", self.coeff_w1, TensorKind::weight);
        f(prefix + ".coeff_b1", self.coeff_b1, TensorKind::bias);
        f(prefix + ".coeff_w2", self.coeff_w2, TensorKind::weight);
        f(prefix + ".coeff_b2", self.coeff_b2, TensorKind::bias);
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

using SignalExtractorParams = SignalExtractorParamsT<Mat>;
using SignalExtractorValues = SignalExtractorParamsT<Value>;

// Constant Fourier basis: row 0 is all ones, rows (2k-1, 2k) hold
// cos(2 pi k t) and sin(2 pi k t) on the grid t_j = j / token_len. Never
// learned, shared by all three signal branches.
struct SeasonalityBasis {
    Mat table; // k_theta x token_len
    int harmonics = 0;
    int token_len = 0;
};

SeasonalityBasis build_basis(int harmonics, int token_len);

// Non-overlapping, order-preserving view of a window split into chunks.
struct ChunkedWindow {
    Mat window; // full L x C window
    Index chunk_count = 0;
    Index chunk_len = 0;

    Index channels() const { return window.cols(); }
    Scalar at(Index chunk, Index step, Index channel) const {
        return window(chunk * chunk_len + step, channel);
    }
    // One chunk of one signal as a column vector.
    Mat signal(Index chunk, Index channel) const {
        return window.block(chunk * chunk_len, channel, chunk_len, 1);
    }
};

ChunkedWindow chunk(Mat window, Index chunks);

struct PoolResult {
    Value pooled;  // 1 x d
    Value weights; // 1 x chunk_len, non-negative, sums to 1
};

// Softmax-weighted pooling of one chunk of one signal (column vector in,
// hidden feature out).
PoolResult theta_attention_pool(const Value& signal, const SignalExtractorValues& p);

// Two linear layers with a ReLU between them: pooled feature -> coefficients.
Value theta_project(const Value& pooled, const SignalExtractorValues& p);

// coefficients (1 x k_theta) times the basis table -> token (1 x token_len).
Value make_token(const Value& coefficients, const Value& basis_table);
Value make_token(const Value& coefficients, const SeasonalityBasis& basis);

// Full feature-extraction stage: window (L x C) -> token sequence
// (chunks * token_len) x C, column order matching the window channels.
Value extract_tokens(const Value& window, const std::array<const SignalExtractorValues*, 3>& branches,
                     const Value& basis_table, Index chunks);

} // namespace c2l
