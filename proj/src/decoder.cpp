#include "c2l/decoder.hpp"

namespace c2l {

Value soc_head(const Value& state, const HeadValues& head, Scalar dropout_p,
               Scalar norm_eps, Mode mode, Rng* rng) {
    Value normed = layer_norm(state, head.norm_gain, head.norm_bias, norm_eps);
    if (mode == Mode::train && dropout_p > 0.0) {
        if (rng == nullptr) {
            throw ParamError("soc_head: train mode with dropout needs an rng");
        }
        normed = dropout(normed, dropout_p, mode, *rng);
    }
    return sigmoid(add_broadcast(matmul(normed, head.out_w), head.out_b));
}

} // namespace c2l
