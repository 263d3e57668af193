#pragma once

#include <string>

#include "c2l/encoder.hpp"

namespace c2l {

// Normalized, regularized output head: layer norm -> dropout -> linear ->
// sigmoid.
template <class T>
struct HeadParamsT {
    T norm_gain; // 1 x d
    T norm_bias; // 1 x d
    T out_w;     // d x 1
    T out_b;     // 1 x 1

    template <class Self, class F>
    static void visit_impl(Self& self, const std::string& prefix, F&& f) {
        f(prefix + ".norm_gain", self.norm_gain, TensorKind::gain);
        f(prefix + ".norm_bias", self.norm_bias, TensorKind::bias);
        f(prefix + ".out_w", self.out_w, TensorKind::weight);
        f(prefix + ".out_b", self.out_b, TensorKind::bias);
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

using HeadParams = HeadParamsT<Mat>;
using HeadValues = HeadParamsT<Value>;

// Single-step recurrent update of the context with the newest measurement.
inline Value cell_update(const Value& latest, const Value& context, const GruValues& cell) {
    return gru_step(latest, context, cell);
}

// Maps the updated state to a state-of-charge estimate in the open (0, 1).
// Dropout is active only in train mode.
Value soc_head(const Value& state, const HeadValues& head, Scalar dropout_p,
               Scalar norm_eps, Mode mode, Rng* rng);

} // namespace c2l
