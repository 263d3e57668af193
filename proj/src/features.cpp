#include "c2l/features.hpp"

#include <cmath>
#include <vector>

namespace c2l {

SeasonalityBasis build_basis(int harmonics, int token_len) {
    if (harmonics < 1 || token_len < 1) {
        throw ParamError("build_basis: harmonics and token length must be >= 1");
    }
    const Index k_theta = 1 + 2 * static_cast<Index>(harmonics);
    Mat table(k_theta, token_len);
    constexpr Scalar two_pi = 2.0 * 3.141592653589793238462643383279502884;
    for (Index j = 0; j < token_len; ++j) {
        const Scalar t = static_cast<Scalar>(j) / static_cast<Scalar>(token_len);
        table(0, j) = 1.0;
        for (Index k = 1; k <= harmonics; ++k) {
            table(2 * k - 1, j) = std::cos(two_pi * static_cast<Scalar>(k) * t);
            table(2 * k, j) = std::sin(two_pi * static_cast<Scalar>(k) * t);
        }
    }
    return SeasonalityBasis{std::move(table), harmonics, token_len};
}

ChunkedWindow chunk(Mat window, Index chunks) {
    if (chunks < 1 || window.rows() % chunks != 0) {
        throw ConfigError("chunk: chunk count " + std::to_string(chunks) +
                          " does not divide window length " + std::to_string(window.rows()));
    }
    ChunkedWindow cw;
    cw.chunk_count = chunks;
    cw.chunk_len = window.rows() / chunks;
    cw.window = std::move(window);
    return cw;
}

PoolResult theta_attention_pool(const Value& signal, const SignalExtractorValues& p) {
    // hidden: (L_c x 1) * (1 x d) + bias -> L_c x d
    Value hidden = add_broadcast(matmul(signal, p.pool_proj_w), p.pool_proj_b);
    // scores over time steps, softmaxed as one row
    Value scores = add_broadcast(matmul(hidden, p.pool_score_w), p.pool_score_b);
    Value weights = softmax_rows(transpose(scores), 1.0, false); // 1 x L_c
    Value pooled = matmul(weights, hidden);                      // 1 x d
    return PoolResult{pooled, weights};
}

Value theta_project(const Value& pooled, const SignalExtractorValues& p) {
    Value h = relu(add_broadcast(matmul(pooled, p.coeff_w1), p.coeff_b1));
    return add_broadcast(matmul(h, p.coeff_w2), p.coeff_b2);
}

Value make_token(const Value& coefficients, const Value& basis_table) {
    return matmul(coefficients, basis_table);
}

Value make_token(const Value& coefficients, const SeasonalityBasis& basis) {
    return make_token(coefficients, Value::constant(basis.table));
}

Value extract_tokens(const Value& window,
                     const std::array<const SignalExtractorValues*, 3>& branches,
                     const Value& basis_table, Index chunks) {
    const Index rows = window.val().rows();
    const Index channels = window.val().cols();
    if (channels != static_cast<Index>(branches.size())) {
        throw ShapeError("extract_tokens: window has " + std::to_string(channels) +
                         " channels, expected " + std::to_string(branches.size()));
    }
    if (chunks < 1 || rows % chunks != 0) {
        throw ConfigError("extract_tokens: chunk count " + std::to_string(chunks) +
                          " does not divide window length " + std::to_string(rows));
    }
    const Index chunk_len = rows / chunks;

    std::vector<Value> columns;
    columns.reserve(branches.size());
    for (Index c = 0; c < channels; ++c) {
        std::vector<Value> tokens;
        tokens.reserve(chunks);
        for (Index n = 0; n < chunks; ++n) {
            Value sig = slice_cols(slice_rows(window, n * chunk_len, chunk_len), c, 1);
            Value pooled = theta_attention_pool(sig, *branches[c]).pooled;
            Value coeff = theta_project(pooled, *branches[c]);
            tokens.push_back(transpose(make_token(coeff, basis_table))); // token_len x 1
        }
        columns.push_back(concat_rows(tokens));
    }
    return concat_cols(columns);
}

} // namespace c2l
